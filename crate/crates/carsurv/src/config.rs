//! Run configuration: a TOML document mirroring [`SimConfig`] plus output
//! paths. Unknown keys are rejected so typos fail loudly before any
//! replicate runs.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::SimConfig;
use crate::randomization::{SchemeKind, SchemeSpec};
use crate::trial_data::{CaseSpec, DEFAULT_LAMBDA0};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: CaseConfig,
    pub scheme: SchemeConfig,
    #[serde(default = "default_theta_grid")]
    pub theta_grid: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub bootstrap: Option<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_true")]
    pub common_random_numbers: bool,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub id: u8,
    pub n: usize,
    #[serde(default)]
    pub lambda0: Option<f64>,
    #[serde(default)]
    pub k_levels: Option<u8>,
    #[serde(default)]
    pub effect_scale: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    #[serde(default)]
    pub stratified: Option<bool>,
    #[serde(default)]
    pub block_size: Option<usize>,
    #[serde(default)]
    pub coin_p: Option<f64>,
    #[serde(default)]
    pub urn_s: Option<f64>,
    #[serde(default)]
    pub urn_omega: Option<f64>,
    #[serde(default)]
    pub ps_weights: Option<Vec<f64>>,
    #[serde(default)]
    pub ps_squared: Option<bool>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Rejection-rate CSV destination; stdout when absent.
    #[serde(default)]
    pub results: Option<PathBuf>,
    /// Optional power-curve SVG destination.
    #[serde(default)]
    pub svg: Option<PathBuf>,
    /// Optional per-replicate test report CSV destination.
    #[serde(default)]
    pub reports: Option<PathBuf>,
}

fn default_theta_grid() -> Vec<f64> {
    vec![0.0]
}

fn default_replicates() -> usize {
    10_000
}

fn default_alpha() -> f64 {
    0.05
}

fn default_true() -> bool {
    true
}

impl SchemeConfig {
    pub fn to_scheme_spec(&self) -> Result<SchemeSpec, ConfigError> {
        let mut spec = match self.kind {
            SchemeKind::Simple => SchemeSpec::simple(),
            SchemeKind::PermutedBlock => SchemeSpec::permuted_block(4),
            SchemeKind::EfronBiasedCoin => SchemeSpec::efron_biased_coin(2.0 / 3.0),
            SchemeKind::WeiUrn => SchemeSpec::wei_urn(1.0, 1.0),
            SchemeKind::PocockSimon => SchemeSpec::pocock_simon(2.0 / 3.0),
        };
        if let Some(s) = self.stratified {
            spec.stratified = s;
        }
        if let Some(b) = self.block_size {
            spec.block_size = b;
        }
        if let Some(p) = self.coin_p {
            spec.coin_p = p;
        }
        if let Some(s) = self.urn_s {
            spec.urn_s = s;
        }
        if let Some(o) = self.urn_omega {
            spec.urn_omega = o;
        }
        if let Some(w) = &self.ps_weights {
            spec.ps_weights = Some(w.clone());
        }
        if let Some(sq) = self.ps_squared {
            spec.ps_squared = sq;
        }
        spec.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(spec)
    }
}

impl CaseConfig {
    pub fn to_case_spec(&self) -> Result<CaseSpec, ConfigError> {
        let spec = CaseSpec {
            case_id: self.id,
            theta: 0.0,
            n: self.n,
            lambda0: self.lambda0.unwrap_or(DEFAULT_LAMBDA0),
            k_levels: self.k_levels.unwrap_or(4),
            effect_scale: self.effect_scale.unwrap_or(1.0),
        };
        spec.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(spec)
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Validate and lower into the harness configuration.
    pub fn to_sim_config(&self) -> Result<SimConfig, ConfigError> {
        let mut sim = SimConfig::new(self.case.to_case_spec()?, self.scheme.to_scheme_spec()?);
        sim.theta_grid = self.theta_grid.clone();
        sim.replicates = self.replicates;
        sim.bootstrap = self.bootstrap;
        sim.alpha = self.alpha;
        sim.seed = self.seed;
        sim.threads = self.threads;
        sim.common_random_numbers = self.common_random_numbers;
        sim.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(sim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [case]
        id = 1
        n = 500

        [scheme]
        kind = "permuted-block"
    "#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config = RunConfig::from_toml_str(MINIMAL).unwrap();
        let sim = config.to_sim_config().unwrap();
        assert_eq!(sim.case.case_id, 1);
        assert_eq!(sim.case.n, 500);
        assert_eq!(sim.replicates, 10_000);
        assert_eq!(sim.alpha, 0.05);
        assert_eq!(sim.theta_grid, vec![0.0]);
        assert!(sim.common_random_numbers);
        assert_eq!(sim.scheme.block_size, 4);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\nunknown_key = 1\n");
        assert!(RunConfig::from_toml_str(&text).is_err());
        let text = MINIMAL.replace("n = 500", "n = 500\nbogus = true");
        assert!(RunConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn unknown_scheme_kind_is_rejected() {
        let text = MINIMAL.replace("permuted-block", "alternating");
        assert!(RunConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn invalid_values_fail_validation_not_parsing() {
        let text = MINIMAL.replace("id = 1", "id = 9");
        let config = RunConfig::from_toml_str(&text).unwrap();
        assert!(matches!(
            config.to_sim_config(),
            Err(ConfigError::Invalid(_))
        ));
        // Top-level keys precede the tables in TOML.
        let text = format!("replicates = 0\n{MINIMAL}");
        let config = RunConfig::from_toml_str(&text).unwrap();
        assert!(config.to_sim_config().is_err());
    }

    #[test]
    fn full_config_round_trips() {
        let text = r#"
            theta_grid = [0.0, 0.2, 0.4]
            replicates = 2000
            bootstrap = 200
            alpha = 0.05
            seed = 7
            threads = 2
            common_random_numbers = false

            [case]
            id = 3
            n = 200
            k_levels = 8
            effect_scale = 1.0

            [scheme]
            kind = "urn"
            urn_s = 1.0
            urn_omega = 1.0

            [output]
            results = "out.csv"
            svg = "power.svg"
        "#;
        let config = RunConfig::from_toml_str(text).unwrap();
        let sim = config.to_sim_config().unwrap();
        assert_eq!(sim.case.k_levels, 8);
        assert_eq!(sim.bootstrap, Some(200));
        assert_eq!(sim.threads, Some(2));
        assert!(!sim.common_random_numbers);
        assert_eq!(config.output.results.as_deref().unwrap().to_str(), Some("out.csv"));
    }
}
