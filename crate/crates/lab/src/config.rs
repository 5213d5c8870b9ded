//! Run configuration: a versioned JSON document whose sections parameterize
//! each command. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stit_core::{AxisBox, SamplerSpec};

use crate::bias::BiasConfig;
use crate::equivalence::EquivalenceConfig;
use crate::error::{LabError, LabResult};
use crate::geometry::GeometryConfig;
use crate::rates::RateConfig;

/// Supported value of the `version` field.
pub const CONFIG_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; all available cores when absent.
    #[serde(default)]
    pub threads: Option<usize>,
    /// Output directory.
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub sample_tessellation: SampleConfig,
    #[serde(default)]
    pub fit: Option<FitConfig>,
    #[serde(default)]
    pub predict: Option<PredictConfig>,
    #[serde(default)]
    pub rates: RateConfig,
    #[serde(default)]
    pub suboptimality: SuboptConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub equivalence: EquivalenceConfig,
    #[serde(default)]
    pub bias: BiasConfig,
}

fn default_seed() -> u64 {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            seed: default_seed(),
            threads: None,
            out: default_out(),
            sample_tessellation: SampleConfig::default(),
            fit: None,
            predict: None,
            rates: RateConfig::default(),
            suboptimality: SuboptConfig::default(),
            geometry: GeometryConfig::default(),
            equivalence: EquivalenceConfig::default(),
            bias: BiasConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> LabResult<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(LabError::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// `sample-tessellation`: one tessellation of `window` (the unit cube when
/// absent).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub window: Option<AxisBox>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            sampler: SamplerSpec::Mondrian {
                weights: vec![0.5, 0.5],
                lifetime: 3.0,
            },
            window: None,
        }
    }
}

/// `fit`: a forest on a dataset CSV. With `feature_matrix` the sampler is
/// the lifted oblique Mondrian with that matrix and `lifetime`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub data: PathBuf,
    #[serde(default)]
    pub sampler: Option<SamplerSpec>,
    #[serde(default)]
    pub feature_matrix: Option<PathBuf>,
    #[serde(default)]
    pub lifetime: Option<f64>,
    #[serde(default = "one")]
    pub trees: usize,
    #[serde(default)]
    pub window: Option<AxisBox>,
}

fn one() -> usize {
    1
}

/// `predict`: predictions of a saved model at the points of a CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictConfig {
    pub model: PathBuf,
    pub points: PathBuf,
}

/// One `(lambda, w)` cell of the suboptimality grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuboptCell {
    pub lambda: f64,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuboptConfig {
    pub a: Vec<f64>,
    pub sigma: f64,
    pub n: usize,
    pub n_test: usize,
    pub replicates: usize,
    pub grid: Vec<SuboptCell>,
}

impl Default for SuboptConfig {
    fn default() -> Self {
        let mut grid = Vec::new();
        for lambda in [5.0, 10.0] {
            for w in [vec![0.5, 0.5], vec![0.7, 0.3]] {
                grid.push(SuboptCell { lambda, weights: w });
            }
        }
        SuboptConfig {
            a: vec![1.0, 1.0],
            sigma: 0.1,
            n: 10_000,
            n_test: 2_000,
            replicates: 20,
            grid,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_is_required_and_unknown_keys_rejected() {
        assert!(RunConfig::from_json(r#"{"seed": 3}"#).is_err());
        assert!(RunConfig::from_json(r#"{"version": 1, "sede": 3}"#).is_err());
        assert!(RunConfig::from_json(r#"{"version": 2}"#).is_err());
        let c = RunConfig::from_json(r#"{"version": 1, "geometry": {"leaf_reps": 10}}"#).unwrap();
        assert_eq!(c.geometry.leaf_reps, 10);
        assert_eq!(
            c.geometry.zero_cell_reps,
            GeometryConfig::default().zero_cell_reps
        );
    }

    #[test]
    fn default_round_trips() {
        let c = RunConfig::default();
        let back = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
