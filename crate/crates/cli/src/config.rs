//! Run configuration: defaults, then `DEHN_PRECISION`, then the `--config`
//! file, then flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

pub const PRECISION_ENV: &str = "DEHN_PRECISION";

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub precision: Option<u32>,
    pub solver_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub bound: Option<u64>,
    pub threads: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("--config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("--config {}: {e}", path.display())))
    }

    /// Values set in `over` replace those in `self`.
    pub fn overlay(self, over: FileConfig) -> FileConfig {
        FileConfig {
            precision: over.precision.or(self.precision),
            solver_tol: over.solver_tol.or(self.solver_tol),
            max_iter: over.max_iter.or(self.max_iter),
            bound: over.bound.or(self.bound),
            threads: over.threads.or(self.threads),
            tol: over.tol.or(self.tol),
            out: over.out.or(self.out),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Decimal digits for relation searches.
    pub precision: u32,
    /// Newton stopping tolerance.
    pub solver_tol: f64,
    pub max_iter: usize,
    pub bound: u64,
    pub threads: usize,
    /// Collision and comparison tolerance.
    pub tol: f64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision: 50,
            solver_tol: 1e-12,
            max_iter: 50,
            bound: 10_000,
            threads: 4,
            tol: 1e-9,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn resolve(env_precision: Option<String>, file: FileConfig, flags: FileConfig) -> Result<Self, Failure> {
        let d = RunConfig::default();
        let env = match env_precision {
            Some(s) => Some(
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| Failure::Usage(format!("{PRECISION_ENV}={s:?} is not a digit count")))?,
            ),
            None => None,
        };
        let merged = file.overlay(flags);
        let cfg = RunConfig {
            precision: merged.precision.or(env).unwrap_or(d.precision),
            solver_tol: merged.solver_tol.unwrap_or(d.solver_tol),
            max_iter: merged.max_iter.unwrap_or(d.max_iter),
            bound: merged.bound.unwrap_or(d.bound),
            threads: merged.threads.unwrap_or(d.threads),
            tol: merged.tol.unwrap_or(d.tol),
            out: merged.out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        let bad = |flag: &str, why: &str| Err(Failure::Usage(format!("--{flag}: {why}")));
        if !(self.solver_tol > 0.0 && self.solver_tol.is_finite()) {
            return bad("solver-tol", "must be positive");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol", "must be positive");
        }
        if self.threads == 0 {
            return bad("threads", "must be at least 1");
        }
        if self.max_iter == 0 {
            return bad("max-iter", "must be at least 1");
        }
        if self.precision == 0 {
            return bad("precision", "must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_file_overrides_env() {
        let file = FileConfig {
            precision: Some(60),
            tol: Some(1e-10),
            ..Default::default()
        };
        let flags = FileConfig {
            tol: Some(1e-8),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Some("40".into()), file, flags).unwrap();
        assert_eq!(cfg.precision, 60);
        assert_eq!(cfg.tol, 1e-8);
        let cfg = RunConfig::resolve(Some("40".into()), FileConfig::default(), FileConfig::default()).unwrap();
        assert_eq!(cfg.precision, 40);
        assert_eq!(
            RunConfig::resolve(None, FileConfig::default(), FileConfig::default()).unwrap(),
            RunConfig::default()
        );
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let flags = FileConfig {
            threads: Some(0),
            ..Default::default()
        };
        assert!(matches!(
            RunConfig::resolve(None, FileConfig::default(), flags),
            Err(Failure::Usage(m)) if m.contains("--threads")
        ));
        assert!(RunConfig::resolve(Some("abc".into()), FileConfig::default(), FileConfig::default()).is_err());
    }
}
