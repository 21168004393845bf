//! Experiment configuration (TOML).
//!
//! Every section is optional and falls back to the defaults below. Unknown
//! keys are rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use skewlab::dfa::MarkovSpec;
use skewlab::maxent::EntropyConfig;
use skewlab::{ObservableSpec, SystemSpec};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub system: SystemSpec,
    pub cone: ConeSection,
    pub entropy: EntropySection,
    pub decay: DecaySection,
    pub clt: CltSection,
    pub stability: StabilitySection,
    pub dfa: DfaSection,
    pub sample: SampleSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConeSection {
    pub alpha: f64,
    /// Overrides the automatically chosen b (c is kept).
    pub b: Option<f64>,
    pub depth: usize,
    pub leaves: usize,
    pub densities: usize,
    pub leaf_pairs: usize,
    pub elements: usize,
    pub diameter_pairs: usize,
    pub contraction_trials: usize,
}

impl Default for ConeSection {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            b: None,
            depth: 6,
            leaves: 6,
            densities: 10,
            leaf_pairs: 12,
            elements: 50,
            diameter_pairs: 100,
            contraction_trials: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropySection {
    pub n_values: Vec<usize>,
    pub eps_grid: Vec<f64>,
    pub samples: usize,
    pub depth: usize,
    pub seeds: usize,
    pub reference_points: usize,
    pub grid: usize,
    /// Expected entropy; defaults to log(degree).
    pub expected: Option<f64>,
    pub tolerance: f64,
    pub agreement: f64,
}

impl Default for EntropySection {
    fn default() -> Self {
        let e = EntropyConfig::default();
        Self {
            n_values: e.n_values,
            eps_grid: e.eps_grid,
            samples: e.samples,
            depth: e.depth,
            seeds: e.seeds,
            reference_points: e.reference_points,
            grid: skewlab::maxent::DEFAULT_GRID,
            expected: None,
            tolerance: 0.1,
            agreement: 0.15,
        }
    }
}

impl EntropySection {
    pub fn estimator_config(&self) -> EntropyConfig {
        EntropyConfig {
            n_values: self.n_values.clone(),
            eps_grid: self.eps_grid.clone(),
            samples: self.samples,
            depth: self.depth,
            seeds: self.seeds,
            reference_points: self.reference_points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecaySection {
    pub observable: ObservableSpec,
    pub partner: Option<ObservableSpec>,
    pub max_lag: usize,
    pub samples: usize,
    /// Accepted range for the fitted rate.
    pub tau_range: [f64; 2],
}

impl Default for DecaySection {
    fn default() -> Self {
        Self {
            observable: ObservableSpec::Dyadic { modes: 10 },
            partner: None,
            max_lag: 8,
            samples: 1_000_000,
            tau_range: [0.45, 0.55],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CltSection {
    pub observable: ObservableSpec,
    pub n: usize,
    pub count: usize,
    pub gk_samples: usize,
    pub max_lag: usize,
    pub truncation: Option<usize>,
    pub variance_tolerance: f64,
    pub min_p_value: f64,
}

impl Default for CltSection {
    fn default() -> Self {
        Self {
            observable: ObservableSpec::Cos { freq: 1 },
            n: 1000,
            count: 10_000,
            gk_samples: 1_000_000,
            max_lag: 20,
            truncation: None,
            variance_tolerance: 0.1,
            min_p_value: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    pub observables: Vec<ObservableSpec>,
    pub t_grid: Vec<f64>,
    pub samples: usize,
    pub grid: usize,
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self {
            observables: vec![ObservableSpec::Cos { freq: 1 }, ObservableSpec::Mixed],
            t_grid: vec![0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4],
            samples: 200_000,
            grid: 1 << 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DfaSection {
    pub system: MarkovSpec,
    /// Per-rectangle values of the test observable.
    pub values: Vec<f64>,
    pub max_lag: usize,
    pub samples: usize,
    pub alpha: f64,
    pub diameter_pairs: usize,
}

impl Default for DfaSection {
    fn default() -> Self {
        Self {
            system: MarkovSpec::default(),
            values: vec![1.0, -1.0],
            max_lag: 10,
            samples: 1_000_000,
            alpha: 1.0,
            diameter_pairs: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSection {
    pub count: usize,
    pub depth: usize,
    pub grid: usize,
}

impl Default for SampleSection {
    fn default() -> Self {
        Self { count: 10_000, depth: 40, grid: skewlab::maxent::DEFAULT_GRID }
    }
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let cfg: Self = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => Self::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.cone;
        if !(c.alpha > 0.0 && c.alpha <= 1.0) {
            bail!("cone.alpha must lie in (0, 1]");
        }
        if c.b.is_some_and(|b| !(b > 0.0)) {
            bail!("cone.b must be positive");
        }
        if c.depth == 0 || c.leaves == 0 || c.densities < 2 {
            bail!("cone.depth, cone.leaves must be positive and cone.densities at least 2");
        }
        let e = &self.entropy;
        if e.n_values.is_empty() || e.n_values.contains(&0) || e.eps_grid.iter().any(|&x| !(x > 0.0)) || e.eps_grid.is_empty() {
            bail!("entropy.n_values must be positive and entropy.eps_grid non-empty and positive");
        }
        if e.samples < 2 || e.reference_points == 0 || e.seeds == 0 {
            bail!("entropy.samples, entropy.reference_points and entropy.seeds must be positive");
        }
        if self.decay.samples < 200 || self.decay.max_lag == 0 {
            bail!("decay.samples must be at least 200 and decay.max_lag positive");
        }
        if self.decay.tau_range[0] > self.decay.tau_range[1] {
            bail!("decay.tau_range must be increasing");
        }
        if self.clt.n == 0 || self.clt.count < 2 || self.clt.gk_samples < 200 {
            bail!("clt.n, clt.count and clt.gk_samples are too small");
        }
        let s = &self.stability;
        if !s.t_grid.contains(&0.0) || s.observables.is_empty() || s.samples < 2 {
            bail!("stability.t_grid must contain 0 and stability.observables must be non-empty");
        }
        if s.t_grid.iter().any(|t| t.abs() >= 1.0) {
            bail!("stability.t_grid values must satisfy |t| < 1");
        }
        let d = &self.dfa;
        if d.values.len() != d.system.counts.len() {
            bail!("dfa.values needs one value per rectangle");
        }
        if d.samples < 200 || d.max_lag == 0 {
            bail!("dfa.samples must be at least 200 and dfa.max_lag positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg: ExperimentConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn sections_parse() {
        let cfg: ExperimentConfig = toml::from_str(
            r#"
            seed = 7
            [system]
            kind = "mp"
            mp_alpha = 0.3
            [decay]
            observable = { name = "cos", freq = 1 }
            max_lag = 12
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.system, SystemSpec::Mp { mp_alpha: 0.3, lambda_s: 0.05 });
        assert_eq!(cfg.decay.max_lag, 12);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("[cone]\nbeta = 1.0").is_err());
    }
}
