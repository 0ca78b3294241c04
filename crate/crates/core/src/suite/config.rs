//! Suite parameters from a flat `key = value` file and command-line
//! overrides.

use crate::error::{HktError, Result};
use crate::reduction::HermitianConvention;
use std::path::{Path, PathBuf};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "HKT_CONFIG";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    /// Replaces the default bound of every numerical `below` check.
    pub tolerance: Option<f64>,
    pub samples: usize,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub r: Option<f64>,
    /// Per-index overrides of the Hopf angles, `theta1` first.
    pub thetas: Vec<Option<f64>>,
    pub generator: Option<String>,
    pub m: Option<i32>,
    pub inner: Option<f64>,
    pub outer: Option<f64>,
    pub hermitian_convention: HermitianConvention,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            tolerance: None,
            samples: 20,
            seed: None,
            n: None,
            r: None,
            thetas: Vec::new(),
            generator: None,
            m: None,
            inner: None,
            outer: None,
            hermitian_convention: HermitianConvention::default(),
            format: OutputFormat::Text,
            out: None,
        }
    }
}

fn bad(key: &str, value: &str) -> HktError {
    HktError::Config(format!("invalid value `{value}` for `{key}`"))
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| bad(key, value))
}

fn positive(key: &str, value: &str) -> Result<f64> {
    let v: f64 = number(key, value)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, value))
    }
}

impl SuiteConfig {
    /// Applies one setting. Keys use `-` or `_` interchangeably.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "tolerance" => self.tolerance = Some(positive(&key, value)?),
            "samples" => {
                let s: usize = number(&key, value)?;
                if s == 0 {
                    return Err(bad(&key, value));
                }
                self.samples = s;
            }
            "seed" => self.seed = Some(number(&key, value)?),
            "n" => {
                let n: usize = number(&key, value)?;
                if n == 0 {
                    return Err(bad(&key, value));
                }
                self.n = Some(n);
            }
            "r" => self.r = Some(positive(&key, value)?),
            "theta" => {
                self.thetas = value
                    .split(',')
                    .map(|t| number::<f64>(&key, t).map(Some))
                    .collect::<Result<_>>()?;
            }
            "generator" => self.generator = Some(value.to_string()),
            "m" => {
                let m: i32 = number(&key, value)?;
                if m < 1 {
                    return Err(bad(&key, value));
                }
                self.m = Some(m);
            }
            "inner" => self.inner = Some(positive(&key, value)?),
            "outer" => self.outer = Some(positive(&key, value)?),
            "hermitian-convention" => {
                self.hermitian_convention = match value {
                    "conjugate-second" => HermitianConvention::ConjugateSecond,
                    "conjugate-first" => HermitianConvention::ConjugateFirst,
                    _ => return Err(bad(&key, value)),
                }
            }
            "format" => {
                self.format = match value {
                    "text" => OutputFormat::Text,
                    "json" => OutputFormat::Json,
                    _ => return Err(bad(&key, value)),
                }
            }
            "out" => self.out = Some(PathBuf::from(value)),
            k if k.starts_with("theta") => {
                let i: usize = k["theta".len()..]
                    .parse()
                    .map_err(|_| HktError::Config(format!("unknown key `{k}`")))?;
                if i == 0 {
                    return Err(HktError::Config("angles are numbered from theta1".into()));
                }
                if self.thetas.len() < i {
                    self.thetas.resize(i, None);
                }
                self.thetas[i - 1] = Some(number(k, value)?);
            }
            other => return Err(HktError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HktError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(k, v)
                .map_err(|e| HktError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HktError::Config(format!("{}: {e}", path.display())))?;
        let mut c = SuiteConfig::default();
        c.apply_text(&text)?;
        Ok(c)
    }

    /// The config file named by `HKT_CONFIG`, or the defaults.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::from_file(Path::new(&p)),
            _ => Ok(SuiteConfig::default()),
        }
    }

    pub fn require_seed(&self, example: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| HktError::Config(format!("example `{example}` is randomized and needs a seed")))
    }

    /// `tolerance` unless overridden.
    pub fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }

    /// Angles for `n` quaternionic indices, zero where unset.
    pub fn angles(&self, n: usize) -> Result<Vec<f64>> {
        if self.thetas.len() > n {
            return Err(HktError::Config(format!(
                "{} angles given for quaternionic dimension {n}",
                self.thetas.len()
            )));
        }
        Ok((0..n)
            .map(|i| self.thetas.get(i).copied().flatten().unwrap_or(0.0))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_text() {
        let mut c = SuiteConfig::default();
        c.apply_text("# defaults\nseed = 7\nsamples=5\ntheta = 0.5, 1\nhermitian_convention = conjugate-first\n")
            .unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.samples, 5);
        assert_eq!(c.angles(2).unwrap(), vec![0.5, 1.0]);
        assert_eq!(c.hermitian_convention, HermitianConvention::ConjugateFirst);
        c.set("theta2", "3").unwrap();
        assert_eq!(c.angles(3).unwrap(), vec![0.5, 3.0, 0.0]);
        assert!(c.angles(1).is_err());
    }

    #[test]
    fn rejects_bad_entries() {
        let mut c = SuiteConfig::default();
        assert!(c.apply_text("seed 7").is_err());
        assert!(c.set("samples", "0").is_err());
        assert!(c.set("tolerance", "-1").is_err());
        assert!(c.set("colour", "red").is_err());
        assert!(c.set("theta0", "1").is_err());
        assert!(c.set("format", "xml").is_err());
        assert!(c.require_seed("x").is_err());
    }
}
