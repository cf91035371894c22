use std::io::Write;

use rand::Rng;

use super::config::{ExperimentConfig, Mode};
use crate::bhm::{gen_instance, run_protocol};
use crate::ensembles::{sample_haar_state, RngStream};
use crate::error::{Result, ShadowError};
use crate::estimators::{
    estimate_independent, estimate_joint, plan_batches, plan_linear, plan_quadratic, BatchPlan,
    EstimatorChoice,
};
use crate::observables::random_observable;
use crate::par::try_map_indexed;
use crate::stats::{wilson_interval, Interval};

/// Column names of the sweep CSV, in order.
pub const RESULT_HEADER: [&str; 12] = [
    "mode",
    "d",
    "B",
    "eps",
    "delta",
    "s",
    "k",
    "trial_id",
    "estimate",
    "truth",
    "abs_error",
    "success",
];

/// Column names of the BHM CSV, in order.
pub const BHM_HEADER: [&str; 4] = ["run_id", "b", "guess", "samples_used"];

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One trial of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub mode: Mode,
    pub d: usize,
    pub b: f64,
    pub eps: f64,
    pub delta: f64,
    pub s: usize,
    pub k: usize,
    pub trial_id: usize,
    pub estimate: f64,
    pub truth: f64,
    pub abs_error: f64,
    pub success: bool,
}

impl ResultRow {
    fn record(&self) -> [String; 12] {
        [
            self.mode.to_string(),
            self.d.to_string(),
            format_float(self.b),
            format_float(self.eps),
            format_float(self.delta),
            self.s.to_string(),
            self.k.to_string(),
            self.trial_id.to_string(),
            format_float(self.estimate),
            format_float(self.truth),
            format_float(self.abs_error),
            self.success.to_string(),
        ]
    }
}

/// Rows of a sweep plus the failure rate and its Wilson interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub plan: BatchPlan,
    pub rows: Vec<ResultRow>,
    pub failures: usize,
    pub failure_rate: Interval,
}

/// The batch plan a sweep mode uses.
pub fn plan_for(cfg: &ExperimentConfig) -> Result<BatchPlan> {
    match cfg.mode {
        Mode::Jm => plan_batches(cfg.b, cfg.eps, cfg.delta),
        Mode::ImLinear => plan_linear(cfg.b, cfg.eps, cfg.delta),
        Mode::ImQuadratic => plan_quadratic(cfg.b, cfg.d, cfg.eps, cfg.delta),
        other => Err(ShadowError::Config(format!("mode {other} is not a sweep"))),
    }
}

/// Runs `cfg.trials` independent trials. Trial `t` draws a Haar-random `ρ`
/// and a random `O ∈ Obs(B)` from stream `t`, computes the truth `Tr(Oρ)`
/// exactly, and then runs the configured estimation pipeline on that stream.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepSummary> {
    cfg.validate()?;
    let plan = plan_for(cfg)?;
    let rows = try_map_indexed(cfg.trials, cfg.execution, |trial| -> Result<ResultRow> {
        let mut rng = RngStream::new(cfg.seed, trial as u64);
        let phi = sample_haar_state(cfg.d, &mut rng)?;
        let o = random_observable(cfg.d, cfg.b, &mut rng)?;
        let truth = phi.expectation(o.matrix());
        let estimate = match cfg.mode {
            Mode::Jm => estimate_joint(&phi, o.matrix(), &plan, &mut rng)?,
            Mode::ImLinear => {
                estimate_independent(&phi, o.matrix(), &plan, EstimatorChoice::Linear, &mut rng)?
            }
            Mode::ImQuadratic => estimate_independent(
                &phi,
                o.matrix(),
                &plan,
                EstimatorChoice::Quadratic,
                &mut rng,
            )?,
            _ => unreachable!("plan_for rejects non-sweep modes"),
        };
        let abs_error = (estimate - truth).abs();
        Ok(ResultRow {
            mode: cfg.mode,
            d: cfg.d,
            b: cfg.b,
            eps: cfg.eps,
            delta: cfg.delta,
            s: plan.s,
            k: plan.k,
            trial_id: trial,
            estimate,
            truth,
            abs_error,
            success: abs_error < cfg.eps,
        })
    })?;
    let failures = rows.iter().filter(|r| !r.success).count();
    Ok(SweepSummary {
        plan,
        failure_rate: wilson_interval(failures, rows.len()),
        failures,
        rows,
    })
}

/// Writes the header and one record per row.
pub fn write_result_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

/// One run of the hidden matching protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BhmRow {
    pub run_id: usize,
    pub b: bool,
    pub guess: bool,
    pub samples_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BhmSummary {
    pub rows: Vec<BhmRow>,
    pub successes: usize,
    pub success_rate: Interval,
}

/// Runs `cfg.trials` protocol instances with `cfg.n`, `cfg.alpha`,
/// `cfg.delta`. Run `r` draws a uniform promise bit and instance from stream
/// `r`.
pub fn run_bhm(cfg: &ExperimentConfig) -> Result<BhmSummary> {
    let cfg = ExperimentConfig {
        mode: Mode::Bhm,
        ..cfg.clone()
    };
    cfg.validate()?;
    let rows = try_map_indexed(cfg.trials, cfg.execution, |run| -> Result<BhmRow> {
        let mut rng = RngStream::new(cfg.seed, run as u64);
        let b = rng.random::<bool>();
        let inst = gen_instance(cfg.n, cfg.alpha, b, &mut rng)?;
        let outcome = run_protocol(&inst, cfg.delta, &mut rng)?;
        Ok(BhmRow {
            run_id: run,
            b,
            guess: outcome.guess,
            samples_used: outcome.samples_used,
        })
    })?;
    let successes = rows.iter().filter(|r| r.b == r.guess).count();
    Ok(BhmSummary {
        success_rate: wilson_interval(successes, rows.len()),
        successes,
        rows,
    })
}

pub fn write_bhm_csv<W: Write>(rows: &[BhmRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BHM_HEADER)?;
    for r in rows {
        w.write_record([
            r.run_id.to_string(),
            u8::from(r.b).to_string(),
            u8::from(r.guess).to_string(),
            r.samples_used.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
