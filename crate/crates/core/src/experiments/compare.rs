use std::io::Write;

use super::sweep::format_float;
use crate::ensembles::{sample_haar_state, RngStream};
use crate::error::{invalid, Result};
use crate::estimators::{choose_estimator, quadratic_estimate, EstimatorChoice};
use crate::measurement::measure_independent_batch;
use crate::moments::{exact_linear_variance, exact_quadratic_variance};
use crate::observables::random_sign_observable;
use crate::par::{try_map_indexed, Execution};
use crate::stats::sample_variance;

/// Settings for a linear-versus-quadratic variance comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    pub d: usize,
    pub b: f64,
    pub eps: f64,
    pub s_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub execution: Execution,
    /// Also evaluate the exact variances (the quadratic one costs `O(d⁶)`).
    pub exact: bool,
}

/// Variances of `Tr(O X̂)` and `Tr(O Ŷ)` at one batch size.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub s: usize,
    pub linear_var: f64,
    pub quadratic_var: f64,
    /// `quadratic_var / linear_var`.
    pub ratio: f64,
    pub linear_exact: Option<f64>,
    pub quadratic_exact: Option<f64>,
    /// `B/s`.
    pub predicted_linear: f64,
    /// `B d / s² + 1/s`.
    pub predicted_quadratic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub choice: EstimatorChoice,
    pub rows: Vec<CompareRow>,
}

/// Draws one `ρ` and one sign observable with `Tr(O²) = ⌊B⌋` (traceless when
/// `⌊B⌋` is even) from stream 0, then for each `s` measures `s` single copies
/// per trial and feeds the same outcomes to both estimators.
pub fn compare_estimators(cfg: &CompareConfig) -> Result<CompareReport> {
    if cfg.trials < 2 {
        return Err(invalid("comparison needs at least two trials"));
    }
    if !(cfg.b >= 1.0 && cfg.b <= cfg.d as f64) {
        return Err(invalid(format!("B = {} outside [1, {}]", cfg.b, cfg.d)));
    }
    if cfg.s_values.iter().any(|&s| s < 2) {
        return Err(invalid("every s must be at least 2"));
    }
    let mut setup = RngStream::new(cfg.seed, 0);
    let phi = sample_haar_state(cfg.d, &mut setup)?;
    let o = random_sign_observable(cfg.d, cfg.b.floor() as usize, &mut setup)?;
    let om = o.matrix();
    let (df, tr_o) = (cfg.d as f64, om.trace());
    let bsq = om.frobenius_sq();

    let mut rows = Vec::with_capacity(cfg.s_values.len());
    for (slot, &s) in cfg.s_values.iter().enumerate() {
        let pairs = try_map_indexed(cfg.trials, cfg.execution, |trial| -> Result<(f64, f64)> {
            // streams 1.. belong to trials; each s value gets its own block
            let id = 1 + (slot * cfg.trials + trial) as u64;
            let mut rng = RngStream::new(cfg.seed, id);
            let outs = measure_independent_batch(&phi, s, &mut rng)?;
            let linear = outs
                .iter()
                .map(|out| (df + 1.0) * out.psi().expectation(om) - tr_o)
                .sum::<f64>()
                / s as f64;
            Ok((linear, quadratic_estimate(&outs, om)?))
        })?;
        let (lin, quad): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let linear_var = sample_variance(&lin);
        let quadratic_var = sample_variance(&quad);
        let (linear_exact, quadratic_exact) = if cfg.exact {
            let rho = phi.density();
            (
                Some(exact_linear_variance(&phi, om, s)?),
                Some(exact_quadratic_variance(&rho, om, s)?),
            )
        } else {
            (None, None)
        };
        let sf = s as f64;
        rows.push(CompareRow {
            s,
            linear_var,
            quadratic_var,
            ratio: quadratic_var / linear_var,
            linear_exact,
            quadratic_exact,
            predicted_linear: bsq / sf,
            predicted_quadratic: bsq * df / (sf * sf) + 1.0 / sf,
        });
    }
    Ok(CompareReport {
        choice: choose_estimator(cfg.b, cfg.d, cfg.eps),
        rows,
    })
}

/// Column names of the comparison CSV.
pub const COMPARE_HEADER: [&str; 8] = [
    "s",
    "linear_var",
    "quadratic_var",
    "ratio",
    "linear_exact",
    "quadratic_exact",
    "predicted_linear",
    "predicted_quadratic",
];

/// Writes the comparison table; missing exact values are left empty.
pub fn write_compare_csv<W: Write>(rows: &[CompareRow], out: W) -> Result<()> {
    let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_HEADER)?;
    for r in rows {
        w.write_record([
            r.s.to_string(),
            format_float(r.linear_var),
            format_float(r.quadratic_var),
            format_float(r.ratio),
            opt(r.linear_exact),
            opt(r.quadratic_exact),
            format_float(r.predicted_linear),
            format_float(r.predicted_quadratic),
        ])?;
    }
    w.flush()?;
    Ok(())
}
