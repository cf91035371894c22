use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shadowlab::estimators::{choose_estimator, EstimatorChoice};
use shadowlab::experiments::{
    compare_estimators, cov_check, run_bhm, run_sweep, verify_all, write_bhm_csv,
    write_compare_csv, write_cov_csv, write_result_csv, CompareConfig, ExperimentConfig, Mode,
    VerifyOptions,
};
use shadowlab::par::Execution;
use shadowlab::ShadowError;

const SEED_ENV: &str = "SHADOWLAB_SEED";

#[derive(Parser)]
#[command(name = "shadowlab", version, about = "Shadow tomography experiments")]
struct Cli {
    /// Run every trial on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// `key = value` file; explicit flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (falls back to the config file, then $SHADOWLAB_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "B")]
    b: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Linear,
    Quadratic,
    Auto,
}

#[derive(Subcommand)]
enum Command {
    /// Joint measurement with median of means.
    Jm(SweepArgs),
    /// Independent single-copy measurements.
    Im {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, value_enum, default_value = "auto")]
        estimator: EstimatorArg,
    },
    /// Boolean hidden matching protocol runs.
    Bhm {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        runs: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form moments and bounds against brute force.
    VerifyMoments {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Shift every closed-form value by this amount (the run should then fail).
        #[arg(long, default_value_t = 0.0, hide = true)]
        perturb: f64,
    },
    /// Exact against Monte Carlo covariance for every index pattern.
    CovCheck {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long = "B", default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical variance of the linear and quadratic estimators across s.
    Compare {
        #[arg(long, default_value_t = 64)]
        d: usize,
        #[arg(long = "B", default_value_t = 64.0)]
        b: f64,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long = "s", value_delimiter = ',', default_value = "8,16,32")]
        s_values: Vec<usize>,
        #[arg(long, default_value_t = 400)]
        trials: usize,
        /// Also compute the exact variances.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
    Check(String),
}

impl From<ShadowError> for Failure {
    fn from(e: ShadowError) -> Self {
        match e {
            ShadowError::Config(_)
            | ShadowError::InvalidArgument(_)
            | ShadowError::Infeasible(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Layers the config file, then `SHADOWLAB_SEED` (only if neither a flag nor
/// the file set the seed), then flags.
fn base_config(common: &Common, execution: Execution) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig {
        execution,
        ..Default::default()
    };
    let mut file_seed = false;
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        file_seed = cfg.apply_text(&text)?.iter().any(|k| k == "seed");
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    } else if !file_seed {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            cfg.seed = raw.trim().parse().map_err(|_| {
                Failure::Usage(format!("{SEED_ENV}={raw:?} is not an unsigned integer"))
            })?;
        }
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn apply_sweep(cfg: &mut ExperimentConfig, a: &SweepArgs) {
    if let Some(d) = a.d {
        cfg.d = d;
    }
    if let Some(b) = a.b {
        cfg.b = b;
    }
    if let Some(eps) = a.eps {
        cfg.eps = eps;
    }
    if let Some(delta) = a.delta {
        cfg.delta = delta;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn sweep(cfg: ExperimentConfig) -> Result<(), Failure> {
    let summary = run_sweep(&cfg)?;
    write_result_csv(&summary.rows, sink(cfg.out.as_deref())?)?;
    let w = summary.failure_rate;
    eprintln!(
        "{}: s={} k={} copies/trial={} failures {}/{} rate {:.4} [{:.4}, {:.4}] delta {}",
        cfg.mode,
        summary.plan.s,
        summary.plan.k,
        summary.plan.total(),
        summary.failures,
        summary.rows.len(),
        w.estimate,
        w.lower,
        w.upper,
        cfg.delta
    );
    if !summary.rows.is_empty() && w.lower > cfg.delta {
        return Err(Failure::Check(format!(
            "failure rate significantly above delta = {}",
            cfg.delta
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let execution = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Jm(a) => {
            let mut cfg = base_config(&a.common, execution)?;
            apply_sweep(&mut cfg, &a);
            cfg.mode = Mode::Jm;
            sweep(cfg)
        }
        Command::Im {
            sweep: a,
            estimator,
        } => {
            let mut cfg = base_config(&a.common, execution)?;
            apply_sweep(&mut cfg, &a);
            let choice = match estimator {
                EstimatorArg::Linear => EstimatorChoice::Linear,
                EstimatorArg::Quadratic => EstimatorChoice::Quadratic,
                EstimatorArg::Auto => choose_estimator(cfg.b, cfg.d, cfg.eps),
            };
            cfg.mode = match choice {
                EstimatorChoice::Linear => Mode::ImLinear,
                EstimatorChoice::Quadratic => Mode::ImQuadratic,
            };
            sweep(cfg)
        }
        Command::Bhm {
            n,
            alpha,
            delta,
            runs,
            common,
        } => {
            let mut cfg = base_config(&common, execution)?;
            cfg.mode = Mode::Bhm;
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(a) = alpha {
                cfg.alpha = a;
            }
            if let Some(d) = delta {
                cfg.delta = d;
            }
            if let Some(r) = runs {
                cfg.trials = r;
            }
            let summary = run_bhm(&cfg)?;
            write_bhm_csv(&summary.rows, sink(cfg.out.as_deref())?)?;
            let w = summary.success_rate;
            eprintln!(
                "bhm: n={} alpha={} successes {}/{} rate {:.4} [{:.4}, {:.4}]",
                cfg.n,
                cfg.alpha,
                summary.successes,
                summary.rows.len(),
                w.estimate,
                w.lower,
                w.upper
            );
            if !summary.rows.is_empty() && w.upper < 1.0 - cfg.delta {
                return Err(Failure::Check(format!(
                    "success rate significantly below 1 - delta = {}",
                    1.0 - cfg.delta
                )));
            }
            Ok(())
        }
        Command::VerifyMoments {
            config,
            seed,
            perturb,
        } => {
            let cfg = base_config(
                &Common {
                    config,
                    seed,
                    out: None,
                },
                execution,
            )?;
            let report = verify_all(&VerifyOptions {
                perturb,
                seed: cfg.seed,
                execution,
                ..Default::default()
            })?;
            print!("{}", report.render());
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Check(format!(
                    "{} checks failed",
                    report.failures()
                )))
            }
        }
        Command::CovCheck {
            d,
            b,
            trials,
            common,
        } => {
            let cfg = base_config(&common, execution)?;
            let rows = cov_check(d, b, trials, cfg.seed, execution)?;
            write_cov_csv(&rows, sink(cfg.out.as_deref())?)?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            if failed > 0 {
                return Err(Failure::Check(format!(
                    "{failed} covariance patterns failed"
                )));
            }
            Ok(())
        }
        Command::Compare {
            d,
            b,
            eps,
            s_values,
            trials,
            exact,
            common,
        } => {
            let cfg = base_config(&common, execution)?;
            let report = compare_estimators(&CompareConfig {
                d,
                b,
                eps,
                s_values,
                trials,
                seed: cfg.seed,
                execution,
                exact,
            })?;
            write_compare_csv(&report.rows, sink(cfg.out.as_deref())?)?;
            eprintln!(
                "recommended estimator for B={b} d={d} eps={eps}: {:?}",
                report.choice
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) | Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
