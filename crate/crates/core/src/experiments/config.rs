use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Result, ShadowError};
use crate::par::Execution;

/// Which pipeline an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Jm,
    ImLinear,
    ImQuadratic,
    Bhm,
    VerifyMoments,
    CovCheck,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Jm,
        Mode::ImLinear,
        Mode::ImQuadratic,
        Mode::Bhm,
        Mode::VerifyMoments,
        Mode::CovCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Jm => "jm",
            Mode::ImLinear => "im-linear",
            Mode::ImQuadratic => "im-quadratic",
            Mode::Bhm => "bhm",
            Mode::VerifyMoments => "verify-moments",
            Mode::CovCheck => "cov-check",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = ShadowError;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ShadowError::Config(format!("unknown mode {s:?}")))
    }
}

/// A declarative experiment description. Fields not used by a mode are
/// ignored by it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub d: usize,
    pub b: f64,
    pub eps: f64,
    pub delta: f64,
    /// Monte Carlo trials, or protocol runs for [`Mode::Bhm`].
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub n: usize,
    pub alpha: f64,
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Jm,
            d: 8,
            b: 4.0,
            eps: 0.2,
            delta: 0.05,
            trials: 100,
            seed: 0,
            out: None,
            n: 16,
            alpha: 0.25,
            execution: Execution::Parallel,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| ShadowError::Config(format!("cannot parse {key} = {value:?}")))
}

/// Splits `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            ShadowError::Config(format!("line {}: expected key = value", lineno + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "mode" => self.mode = value.parse()?,
            "d" => self.d = parse(key, value)?,
            "B" | "b" => self.b = parse(key, value)?,
            "eps" | "epsilon" => self.eps = parse(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "trials" | "runs" => self.trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "n" => self.n = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "execution" => {
                self.execution = match value {
                    "parallel" => Execution::Parallel,
                    "sequential" => Execution::Sequential,
                    _ => return Err(ShadowError::Config(format!("unknown execution {value:?}"))),
                }
            }
            _ => return Err(ShadowError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<Vec<String>> {
        let pairs = parse_key_values(text)?;
        let keys = pairs.iter().map(|(k, _)| k.clone()).collect();
        for (k, v) in pairs {
            self.set(&k, &v)?;
        }
        Ok(keys)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ShadowError::Config(msg));
        match self.mode {
            Mode::Jm | Mode::ImLinear | Mode::ImQuadratic => {
                if self.d < 2 {
                    return bad(format!("d = {} < 2", self.d));
                }
                if !(self.b >= 1.0 && self.b <= self.d as f64) {
                    return bad(format!("B = {} outside [1, d = {}]", self.b, self.d));
                }
                if !(self.eps > 0.0 && self.eps <= 1.0) {
                    return bad(format!("eps = {} outside (0, 1]", self.eps));
                }
                if !(self.delta > 0.0 && self.delta < 1.0) {
                    return bad(format!("delta = {} outside (0, 1)", self.delta));
                }
            }
            Mode::Bhm => {
                crate::bhm::edge_count(self.n, self.alpha)
                    .map_err(|e| ShadowError::Config(e.to_string()))?;
                if !(self.delta > 0.0 && self.delta < 1.0) {
                    return bad(format!("delta = {} outside (0, 1)", self.delta));
                }
            }
            Mode::VerifyMoments => {}
            Mode::CovCheck => {
                if self.d < 2 {
                    return bad(format!("d = {} < 2", self.d));
                }
                if self.trials < 2 {
                    return bad("cov-check needs at least two draws".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values_with_comments() {
        let cfg = ExperimentConfig::from_text(
            "mode = im-quadratic\n# note\nd=16 # inline\nB = 16\n\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(cfg.mode, Mode::ImQuadratic);
        assert_eq!(cfg.d, 16);
        assert_eq!(cfg.b, 16.0);
        assert_eq!(cfg.seed, 9);
        assert!(ExperimentConfig::from_text("d 16").is_err());
        assert!(ExperimentConfig::from_text("colour = red").is_err());
        assert!(ExperimentConfig::from_text("d = x").is_err());
    }

    #[test]
    fn validation_ranges() {
        let mut cfg = ExperimentConfig {
            b: 9.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg.b = 4.0;
        assert!(cfg.validate().is_ok());
        cfg.mode = Mode::Bhm;
        cfg.n = 6;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.name().parse::<Mode>().unwrap(), m);
        }
    }
}
