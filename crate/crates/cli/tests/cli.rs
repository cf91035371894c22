use std::path::Path;
use std::process::{Command, Output};

fn shadowlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shadowlab"))
        .args(args)
        .env_remove("SHADOWLAB_SEED")
        .output()
        .expect("binary runs")
}

fn with_env(args: &[&str], seed: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shadowlab"))
        .args(args)
        .env("SHADOWLAB_SEED", seed)
        .output()
        .expect("binary runs")
}

const JM: [&str; 9] = ["jm", "--d", "4", "--B", "2", "--eps", "0.3", "--trials", "20"];

#[test]
fn identical_seed_gives_identical_csv() {
    let a = shadowlab(&[&JM[..], &["--seed", "5"]].concat());
    let b = shadowlab(&[&JM[..], &["--seed", "5"]].concat());
    let c = shadowlab(&[&JM[..], &["--seed", "6"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let seq = shadowlab(&[&JM[..], &["--seed", "5", "--sequential"]].concat());
    assert_eq!(a.stdout, seq.stdout);
}

#[test]
fn zero_trials_prints_only_the_header() {
    let out = shadowlab(&["im", "--estimator", "linear", "--trials", "0"]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "mode,d,B,eps,delta,s,k,trial_id,estimate,truth,abs_error,success\n"
    );
}

#[test]
fn seed_precedence_flag_then_config_then_env() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "d = 4\nB = 2\neps = 0.3\ntrials = 10\nseed = 8\n").unwrap();
    let no_seed = dir.path().join("plain.cfg");
    std::fs::write(&no_seed, "d = 4\nB = 2\neps = 0.3\ntrials = 10\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let no_seed = no_seed.to_str().unwrap();

    let file = with_env(&["jm", "--config", cfg], "3").stdout;
    let flag8 = with_env(&["jm", "--config", no_seed, "--seed", "8"], "3").stdout;
    assert_eq!(file, flag8, "config seed beats the environment");

    let env3 = with_env(&["jm", "--config", no_seed], "3").stdout;
    let flag3 = shadowlab(&["jm", "--config", no_seed, "--seed", "3"]).stdout;
    assert_eq!(env3, flag3, "environment is used when nothing else sets the seed");

    let flag_wins = with_env(&["jm", "--config", cfg, "--seed", "3"], "9").stdout;
    assert_eq!(flag_wins, flag3, "flag beats config and environment");

    let default = shadowlab(&["jm", "--config", no_seed]).stdout;
    let zero = shadowlab(&["jm", "--config", no_seed, "--seed", "0"]).stdout;
    assert_eq!(default, zero);
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "d = 4\nB = 2\ntrials = 10\n").unwrap();
    let out = shadowlab(&["jm", "--config", cfg.to_str().unwrap(), "--trials", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.starts_with("jm,4,")));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let out = shadowlab(&["bhm", "--n", "8", "--runs", "5", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(Path::new(&path)).unwrap();
    assert!(text.starts_with("run_id,b,guess,samples_used\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    assert_eq!(shadowlab(&["jm", "--d"]).status.code(), Some(2));
    assert_eq!(shadowlab(&["nonsense"]).status.code(), Some(2));
    assert_eq!(shadowlab(&["jm", "--B", "100"]).status.code(), Some(2));
    assert_eq!(shadowlab(&["bhm", "--n", "10"]).status.code(), Some(2));
    assert_eq!(shadowlab(&["jm", "--config", "/no/such/file"]).status.code(), Some(2));
    assert_eq!(with_env(&["jm", "--trials", "1"], "abc").status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(shadowlab(&["jm", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_moments_exit_status_tracks_checks() {
    let ok = shadowlab(&["verify-moments"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8(ok.stdout).unwrap().contains("0 failed"));
    let bad = shadowlab(&["verify-moments", "--perturb", "1e-3"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn cov_check_and_compare_emit_csv() {
    let cov = shadowlab(&["cov-check", "--trials", "5000", "--seed", "2"]);
    assert!(cov.status.success());
    let text = String::from_utf8(cov.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("pattern,exact,mc,stderr,bound,pass\n"));

    let cmp = shadowlab(&["compare", "--d", "8", "--B", "8", "--s", "4,8", "--trials", "50", "--exact"]);
    assert!(cmp.status.success());
    let text = String::from_utf8(cmp.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(!text.lines().nth(1).unwrap().contains(",,"));
}
