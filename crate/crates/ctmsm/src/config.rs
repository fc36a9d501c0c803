//! JSON configuration: scenarios and per-command run settings.

use std::path::PathBuf;

use ctmsm_core::sim::{BaselineScenario, CensoringHazard, ConfoundedScenario};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensoringConfig {
    pub base: f64,
    #[serde(default)]
    pub per_l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfoundedConfig {
    pub alpha_d0: f64,
    pub alpha_da: f64,
    pub alpha_dl: f64,
    pub alpha_dal: f64,
    pub alpha_a0: f64,
    pub alpha_al: f64,
    pub alpha_l0: f64,
    pub alpha_la: f64,
    pub horizon: f64,
    pub n: usize,
    pub censoring: Option<CensoringConfig>,
}

impl Default for ConfoundedConfig {
    fn default() -> Self {
        ConfoundedScenario::default().into()
    }
}

impl From<ConfoundedScenario> for ConfoundedConfig {
    fn from(s: ConfoundedScenario) -> Self {
        Self {
            alpha_d0: s.alpha_d0,
            alpha_da: s.alpha_da,
            alpha_dl: s.alpha_dl,
            alpha_dal: s.alpha_dal,
            alpha_a0: s.alpha_a0,
            alpha_al: s.alpha_al,
            alpha_l0: s.alpha_l0,
            alpha_la: s.alpha_la,
            horizon: s.horizon,
            n: s.n,
            censoring: s.censoring.map(|c| CensoringConfig { base: c.base, per_l: c.per_l }),
        }
    }
}

impl From<ConfoundedConfig> for ConfoundedScenario {
    fn from(c: ConfoundedConfig) -> Self {
        Self {
            alpha_d0: c.alpha_d0,
            alpha_da: c.alpha_da,
            alpha_dl: c.alpha_dl,
            alpha_dal: c.alpha_dal,
            alpha_a0: c.alpha_a0,
            alpha_al: c.alpha_al,
            alpha_l0: c.alpha_l0,
            alpha_la: c.alpha_la,
            horizon: c.horizon,
            n: c.n,
            censoring: c.censoring.map(|c| CensoringHazard { base: c.base, per_l: c.per_l }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub alpha0: f64,
    pub alpha_a: f64,
    pub p: f64,
    pub horizon: f64,
    pub n: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineScenario::default().into()
    }
}

impl From<BaselineScenario> for BaselineConfig {
    fn from(s: BaselineScenario) -> Self {
        Self { alpha0: s.alpha0, alpha_a: s.alpha_a, p: s.p, horizon: s.horizon, n: s.n }
    }
}

impl From<BaselineConfig> for BaselineScenario {
    fn from(c: BaselineConfig) -> Self {
        Self { alpha0: c.alpha0, alpha_a: c.alpha_a, p: c.p, horizon: c.horizon, n: c.n }
    }
}

/// A simulation scenario, tagged by `"type"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ScenarioConfig {
    Confounded(ConfoundedConfig),
    Baseline(BaselineConfig),
}

impl ScenarioConfig {
    pub fn horizon(&self) -> f64 {
        match self {
            ScenarioConfig::Confounded(c) => c.horizon,
            ScenarioConfig::Baseline(c) => c.horizon,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        match &mut self {
            ScenarioConfig::Confounded(c) => c.n = n,
            ScenarioConfig::Baseline(c) => c.n = n,
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WeightMethod {
    /// Continuous-time additive-hazard weights.
    #[default]
    Ct,
    /// Discrete-time stabilized IPTW.
    Iptw,
    /// Exact weights from the simulation scenario.
    Theoretical,
    /// Weights read from `weights_file`.
    File,
    None,
}

/// Settings shared by the data-analysis commands. Every key can also be given
/// as a command-line flag of the same name, which takes precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub events: Option<PathBuf>,
    pub baseline: Option<PathBuf>,
    pub horizon: Option<f64>,
    pub scenario: Option<ScenarioConfig>,
    pub scenario_file: Option<PathBuf>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub world: Option<String>,
    pub outcome_design: Option<Vec<String>>,
    pub treatment_design: Option<Vec<String>>,
    pub hypothetical_design: Option<Vec<String>>,
    pub method: Option<WeightMethod>,
    pub weights_file: Option<PathBuf>,
    pub bandwidth: Option<f64>,
    pub theta0: Option<f64>,
    pub intervals: Option<usize>,
    pub iptw_covariates: Option<Vec<String>>,
    pub truncation: Option<f64>,
    pub expanded: Option<bool>,
    pub transform: Option<String>,
    pub coef: Option<PathBuf>,
    pub bindings: Option<Vec<String>>,
    pub knots: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
}

macro_rules! overlay_fields {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl RunConfig {
    /// Values set in `other` replace those in `self`.
    pub fn overlay(mut self, other: RunConfig) -> Self {
        overlay_fields!(
            self, other, events, baseline, horizon, scenario, scenario_file, seed, n, world,
            outcome_design, treatment_design, hypothetical_design, method, weights_file, bandwidth,
            theta0, intervals, iptw_covariates, truncation, expanded, transform, coef, bindings, knots,
            output
        );
        self
    }

    pub fn require<'a, T>(value: &'a Option<T>, key: &str) -> CliResult<&'a T> {
        value.as_ref().ok_or_else(|| CliError::Config(format!("missing required setting `{key}`")))
    }

    /// The scenario, given inline or through `scenario_file`.
    pub fn resolve_scenario(&self) -> CliResult<Option<ScenarioConfig>> {
        if let Some(s) = self.scenario {
            return Ok(Some(s));
        }
        match &self.scenario_file {
            Some(p) => Ok(Some(crate::io::read_json(p)?)),
            None => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_json_round_trip() {
        let s = ScenarioConfig::Confounded(ConfoundedConfig {
            censoring: Some(CensoringConfig { base: 0.05, per_l: 0.2 }),
            ..Default::default()
        });
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<ScenarioConfig>(&text).unwrap(), s);
        let partial: ScenarioConfig = serde_json::from_str(r#"{"type":"baseline","n":10}"#).unwrap();
        assert_eq!(partial, ScenarioConfig::Baseline(BaselineConfig { n: 10, ..Default::default() }));
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig { seed: Some(1), intervals: Some(4), ..Default::default() };
        let flags = RunConfig { seed: Some(9), ..Default::default() };
        let merged = file.overlay(flags);
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.intervals, Some(4));
    }
}
