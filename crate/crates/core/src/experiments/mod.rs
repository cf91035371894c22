//! Experiment drivers behind the command-line interface: configuration,
//! Monte Carlo sweeps with CSV output, estimator comparison, and the moment
//! verification suite.

mod compare;
mod config;
mod sweep;
mod verify;

pub use compare::{
    compare_estimators, write_compare_csv, CompareConfig, CompareReport, CompareRow, COMPARE_HEADER,
};
pub use config::{parse_key_values, ExperimentConfig, Mode};
pub use sweep::{
    format_float, plan_for, run_bhm, run_sweep, write_bhm_csv, write_result_csv, BhmRow,
    BhmSummary, ResultRow, SweepSummary, BHM_HEADER, RESULT_HEADER,
};
pub use verify::{
    cov_check, moment_grid, verify_all, write_cov_csv, CheckRow, CovRow, VerifyOptions,
    VerifyReport, BOUND_SLACK, COV_HEADER, MOMENT_TOL, SPECIAL_CASE_TOL,
};
