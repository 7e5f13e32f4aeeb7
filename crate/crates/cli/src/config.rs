//! Run configuration: the JSON file behind `--config`, with defaults for
//! every field and validation that reports dotted field paths.

use std::path::{Path, PathBuf};

use gaboredge::detector::DetectorConfig;
use gaboredge::eval::NoiseSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Evaluation settings shared by `eval` and `sweep`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    /// Matching tolerance in pixels; derived from the image diagonal when
    /// absent.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Sweep grid as (beta_low, beta_up) pairs.
    #[serde(default)]
    pub grid: Option<Vec<(f64, f64)>>,
}

/// Default input/output paths; explicit flags override them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Top-level configuration file contents.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub io: IoConfig,
}

impl RunConfig {
    /// Every invariant violation as a dotted field-path message.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = self.detector.validate_at("detector.");
        if let Some(noise) = &self.noise {
            if noise.sigma < 0.0 {
                errs.push(format!("noise.sigma: must be >= 0, got {}", noise.sigma));
            }
        }
        if let Some(tol) = self.eval.tolerance {
            if tol < 0.0 {
                errs.push(format!("eval.tolerance: must be >= 0, got {tol}"));
            }
        }
        if let Some(grid) = &self.eval.grid {
            for (i, &(lo, up)) in grid.iter().enumerate() {
                if !(lo > 0.0 && lo < up && up < 1.0) {
                    errs.push(format!(
                        "eval.grid[{i}]: need 0 < beta_low < beta_up < 1, got ({lo}, {up})"
                    ));
                }
            }
        }
        if let Some(input) = &self.io.input {
            if !input.exists() {
                errs.push(format!("io.input: path {} does not exist", input.display()));
            }
        }
        errs
    }
}

/// Parse and validate a JSON config file, filling defaults for anything
/// missing.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Param(format!("malformed config {}: {e}", path.display())))?;
    let errs = config.validate();
    if errs.is_empty() {
        Ok(config)
    } else {
        Err(CliError::Param(format!(
            "invalid config {}: {}",
            path.display(),
            errs.join("; ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_yields_full_defaults() {
        let config: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(config, RunConfig::default());
        assert_eq!(config.detector.gabor.orientations, 8);
        assert_eq!(config.detector.gabor.frequencies, vec![0.1, 0.2]);
        assert_eq!(config.detector.gabor.gamma, 1.0);
        assert_eq!(config.detector.gabor.eta, 2.0);
        assert_eq!(config.detector.window, 7);
        assert_eq!(config.detector.beta_low, 0.70);
        assert_eq!(config.detector.beta_up, 0.90);
        assert!(config.validate().is_empty());
    }

    #[test]
    fn inverted_betas_name_both_fields() {
        let config: RunConfig =
            serde_json::from_str(r#"{"detector":{"beta_low":0.9,"beta_up":0.7}}"#).unwrap();
        let errs = config.validate();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].contains("detector.beta_low"));
        assert!(errs[0].contains("detector.beta_up"));
    }

    #[test]
    fn round_trip_is_identity() {
        let config: RunConfig = serde_json::from_str(
            r#"{
                "detector": {"gabor": {"orientations": 12}, "beta_low": 0.6},
                "noise": {"sigma": 15.0, "seed": 42},
                "eval": {"tolerance": 2.0, "grid": [[0.6, 0.8], [0.7, 0.9]]}
            }"#,
        )
        .unwrap();
        let json = serde_json::to_string(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"detectorr": {}}"#).is_err());
    }

    #[test]
    fn missing_input_path_is_flagged() {
        let config: RunConfig =
            serde_json::from_str(r#"{"io": {"input": "/no/such/file.png"}}"#).unwrap();
        let errs = config.validate();
        assert!(errs.iter().any(|e| e.starts_with("io.input")));
    }
}
