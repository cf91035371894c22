use std::fmt::Write as _;
use std::io::Write;

use super::sweep::format_float;

use crate::ensembles::{sample_haar_state, RngStream};
use crate::error::Result;
use crate::linalg::{partial_trace, ComplexMatrix, HermitianMatrix, PureState, C64};
use crate::moments::{
    ab_bijection_check, brute_first_moment, brute_second_moment, exact_covariance,
    exact_first_moment, exact_joint_variance, exact_joint_variance_dense, exact_second_moment,
    mc_covariance, single_copy_second_moment, single_shadow_second_moment, CovPattern,
    MomentReport, MomentValue,
};
use crate::observables::random_observable;
use crate::par::{try_map_indexed, Execution};

/// Tolerance for formula against brute force.
pub const MOMENT_TOL: f64 = 1e-10;
/// Tolerance for the `s = 1` special case.
pub const SPECIAL_CASE_TOL: f64 = 1e-12;
/// Slack allowed when an exact covariance is compared with its bound.
pub const BOUND_SLACK: f64 = 1e-9;

/// One line of the verification table. `deviation` is the measured
/// discrepancy (or the excess over a bound) and passes when `≤ tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub group: &'static str,
    pub label: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    fn new(group: &'static str, label: String, deviation: f64, tolerance: f64) -> Self {
        Self {
            group,
            label,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }

    fn flag(group: &'static str, label: String, ok: bool) -> Self {
        Self {
            group,
            label,
            deviation: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass: ok,
        }
    }

    fn from_report(group: &'static str, r: &MomentReport, tolerance: f64) -> Self {
        Self::new(group, r.label.clone(), r.max_abs_deviation, tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub rows: Vec<CheckRow>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    /// A fixed-width text table, one check per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:<44} {:>12} {:>10}  result",
            "group", "check", "deviation", "tol"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<10} {:<44} {:>12.3e} {:>10.1e}  {}",
                r.group,
                r.label,
                r.deviation,
                r.tolerance,
                if r.pass { "pass" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "{} checks, {} failed",
            self.rows.len(),
            self.failures()
        );
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Added to entry `(0,0)` of every closed-form value before comparison;
    /// nonzero values exist to prove the checks can fail.
    pub perturb: f64,
    pub seed: u64,
    pub execution: Execution,
    /// Random instances per dimension for the covariance bound checks.
    pub bound_instances: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            perturb: 0.0,
            seed: 0,
            execution: Execution::Parallel,
            bound_instances: 5,
        }
    }
}

fn perturbed(m: &HermitianMatrix, eps: f64) -> ComplexMatrix {
    let mut out = m.as_matrix().clone();
    out[(0, 0)] += C64::new(eps, 0.0);
    out
}

fn pure(d: usize, seed: u64, stream: u64) -> Result<HermitianMatrix> {
    Ok(sample_haar_state(d, &mut RngStream::new(seed, stream))?.density())
}

/// The moment grid: `(s, d)` for `s ≤ 3, d ≤ 3` plus `(4, 2)`, with `s = 0`
/// included as the Haar case.
pub fn moment_grid() -> Vec<(usize, usize)> {
    let mut grid: Vec<(usize, usize)> =
        (2..=3).flat_map(|d| (0..=3).map(move |s| (s, d))).collect();
    grid.push((4, 2));
    grid
}

/// Runs every formula/brute-force equivalence and bound check.
pub fn verify_all(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut rows = Vec::new();
    let eps = opts.perturb;

    for (idx, &(s, d)) in moment_grid().iter().enumerate() {
        let rho = pure(d, opts.seed, idx as u64)?;
        let (b1, t1) = brute_first_moment(&rho, s, opts.execution)?;
        let r1 = MomentReport::new(
            format!("E[Psi] s={s} d={d}"),
            MomentValue::Matrix(perturbed(&exact_first_moment(&rho, s)?, eps)),
            MomentValue::Matrix(b1.into_matrix()),
        )?;
        rows.push(CheckRow::from_report("first", &r1, MOMENT_TOL));
        let fact: usize = (1..=s).product();
        rows.push(CheckRow::flag(
            "first",
            format!("identity terms s={s} d={d}"),
            t1.fixing_first == fact,
        ));

        let (b2, t2) = brute_second_moment(&rho, s, opts.execution)?;
        let r2 = MomentReport::new(
            format!("E[Psi x Psi] s={s} d={d}"),
            MomentValue::Matrix(perturbed(&exact_second_moment(&rho, s)?, eps)),
            MomentValue::Matrix(b2.into_matrix()),
        )?;
        rows.push(CheckRow::from_report("second", &r2, MOMENT_TOL));
        let counts_ok = 2 * t2.type_a == t2.total
            && t2.ii == fact
            && t2.rho_i == s * fact
            && t2.i_rho == s * fact
            && 2 * t2.rho_rho == s * s.saturating_sub(1) * fact;
        rows.push(CheckRow::flag(
            "second",
            format!("type A/B tallies s={s} d={d}"),
            counts_ok,
        ));
    }

    for d in 2..=4 {
        let rho = pure(d, opts.seed, 100 + d as u64)?;
        let r = MomentReport::new(
            format!("s=1 special case d={d}"),
            MomentValue::Matrix(perturbed(&single_copy_second_moment(&rho)?, eps)),
            MomentValue::Matrix(exact_second_moment(&rho, 1)?.into_matrix()),
        )?;
        rows.push(CheckRow::from_report("special", &r, SPECIAL_CASE_TOL));

        let m2 = single_shadow_second_moment(&rho)?;
        let marg = partial_trace(m2.as_matrix(), d, 2, &[0])?;
        let r = MomentReport::new(
            format!("shadow marginal d={d}"),
            MomentValue::Matrix(perturbed(&rho, eps)),
            MomentValue::Matrix(marg),
        )?;
        rows.push(CheckRow::from_report("shadow", &r, MOMENT_TOL));

        let phi = PureState::from_density(&rho, 1e-8)?;
        let o = random_observable(
            d,
            (d as f64 / 2.0).max(1.0),
            &mut RngStream::new(opts.seed, 200 + d as u64),
        )?;
        for s in [1, 3, 8] {
            let fast = exact_joint_variance(&phi, o.matrix(), s)? + eps;
            let dense = exact_joint_variance_dense(&rho, o.matrix(), s)?;
            rows.push(CheckRow::new(
                "variance",
                format!("joint variance routes s={s} d={d}"),
                (fast - dense).abs(),
                MOMENT_TOL,
            ));
        }
    }

    for n in 2..=6 {
        rows.push(CheckRow::flag(
            "perm",
            format!("type A/B bijection n={n}"),
            ab_bijection_check(n)?,
        ));
    }

    for d in [2, 4] {
        for inst in 0..opts.bound_instances {
            let stream = 1000 + (d * 100 + inst) as u64;
            let mut rng = RngStream::new(opts.seed, stream);
            let rho = sample_haar_state(d, &mut rng)?.density();
            let b = [1.0, d as f64 / 2.0, d as f64][inst % 3].max(1.0);
            let o = random_observable(d, b, &mut rng)?;
            for p in [
                CovPattern::IjJk,
                CovPattern::IjKj,
                CovPattern::IjJi,
                CovPattern::IjIj,
            ] {
                let value = exact_covariance(p, &rho, o.matrix())? + eps;
                let bound = p.bound(&rho, o.matrix());
                rows.push(CheckRow::new(
                    "bound",
                    format!("{} <= bound d={d} B={b} #{inst}", p.name()),
                    (value - bound).max(0.0),
                    BOUND_SLACK,
                ));
            }
        }
    }
    Ok(VerifyReport { rows })
}

/// Exact against Monte Carlo covariance for one pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CovRow {
    pub pattern: CovPattern,
    pub exact: f64,
    pub mc: f64,
    pub stderr: f64,
    pub bound: f64,
    /// `|mc − exact| ≤ 5 stderr` and `exact ≤ bound + slack`.
    pub pass: bool,
}

/// Compares every pattern's exact covariance with `draws` Monte Carlo draws
/// on one random `(ρ, O)` in dimension `d`.
pub fn cov_check(
    d: usize,
    b: f64,
    draws: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<CovRow>> {
    let mut setup = RngStream::new(seed, 0);
    let phi = sample_haar_state(d, &mut setup)?;
    let o = random_observable(d, b, &mut setup)?;
    let rho = phi.density();
    try_map_indexed(CovPattern::ALL.len(), exec, |i| -> Result<CovRow> {
        let pattern = CovPattern::ALL[i];
        let exact = exact_covariance(pattern, &rho, o.matrix())?;
        let mc = mc_covariance(
            pattern,
            &phi,
            o.matrix(),
            draws,
            &mut RngStream::new(seed, 1 + i as u64),
        )?;
        let bound = pattern.bound(&rho, o.matrix());
        let pass = (mc.value - exact).abs() <= 5.0 * mc.stderr && exact <= bound + BOUND_SLACK;
        Ok(CovRow {
            pattern,
            exact,
            mc: mc.value,
            stderr: mc.stderr,
            bound,
            pass,
        })
    })
}

/// Column names of the covariance CSV.
pub const COV_HEADER: [&str; 6] = ["pattern", "exact", "mc", "stderr", "bound", "pass"];

pub fn write_cov_csv<W: Write>(rows: &[CovRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COV_HEADER)?;
    for r in rows {
        w.write_record([
            r.pattern.name().to_string(),
            format_float(r.exact),
            format_float(r.mc),
            format_float(r.stderr),
            format_float(r.bound),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
