//! Experiment configuration file (TOML). All lengths are meters.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relations::{RelationSpec, RelationVocabulary, VocabularyFile};
use crate::simulator::HandleScene;
use crate::space::ParameterSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    #[serde(default)]
    pub scene: HandleScene,
    /// Parameter bounds; derived from the scene when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<ParameterSpace>,
    #[serde(default)]
    pub vocabulary: VocabularyConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub campaign: CampaignConfig,
    #[serde(default)]
    pub diagnosis: DiagnosisSettings,
    #[serde(default)]
    pub correction: CorrectionSettings,
    #[serde(default)]
    pub sweep: SweepSettings,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: defaults::seed(),
            scene: HandleScene::default(),
            space: None,
            vocabulary: VocabularyConfig::default(),
            model: ModelConfig::default(),
            campaign: CampaignConfig::default(),
            diagnosis: DiagnosisSettings::default(),
            correction: CorrectionSettings::default(),
            sweep: SweepSettings::default(),
        }
    }
}

/// Relations come from `file` (relative to the config file), from inline
/// `relation` entries, or are derived from the scene when both are empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabularyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, rename = "relation", skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<RelationSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Fraction of successes in which a relation must hold to become a precondition.
    #[serde(default = "defaults::beta")]
    pub beta: f64,
    #[serde(default = "defaults::mode")]
    pub mode: u32,
    /// Noise-free executions whose successes define the preconditions; when
    /// 0 the campaign's successes are used instead.
    #[serde(default = "defaults::demonstrations")]
    pub demonstrations: usize,
    /// Defaults to the bbox half extents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_scales: Option<Vec<f64>>,
    #[serde(default = "defaults::signal_variance")]
    pub signal_variance: f64,
    #[serde(default = "defaults::noise_variance")]
    pub noise_variance: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            beta: defaults::beta(),
            mode: defaults::mode(),
            demonstrations: defaults::demonstrations(),
            length_scales: None,
            signal_variance: defaults::signal_variance(),
            noise_variance: defaults::noise_variance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default = "defaults::campaign_count")]
    pub count: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            count: defaults::campaign_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosisSettings {
    /// Anchor standard deviation as a fraction of the mean bbox full extent.
    #[serde(default = "defaults::anchor_fraction")]
    pub anchor_fraction: f64,
    /// Overrides the anchor when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_std: Option<Vec<f64>>,
    #[serde(default = "defaults::samples_per_region")]
    pub samples_per_region: usize,
    #[serde(default = "defaults::expansion_ratio")]
    pub expansion_ratio: f64,
    #[serde(default = "defaults::max_expansions")]
    pub max_expansions: usize,
    #[serde(default = "defaults::runs")]
    pub runs: usize,
    #[serde(default = "defaults::acceptance")]
    pub acceptance: f64,
}

impl Default for DiagnosisSettings {
    fn default() -> Self {
        Self {
            anchor_fraction: defaults::anchor_fraction(),
            initial_std: None,
            samples_per_region: defaults::samples_per_region(),
            expansion_ratio: defaults::expansion_ratio(),
            max_expansions: defaults::max_expansions(),
            runs: defaults::runs(),
            acceptance: defaults::acceptance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrectionSettings {
    #[serde(default = "defaults::candidates")]
    pub candidates: usize,
    /// Shape used by `correct` and `retrain`.
    #[serde(default = "defaults::kappa")]
    pub kappa: f64,
    /// Shapes compared by the correction experiment.
    #[serde(default = "defaults::kappas")]
    pub kappas: Vec<f64>,
    #[serde(default = "defaults::trials")]
    pub trials: usize,
    /// Proposal budget per execution when sampling from a model.
    #[serde(default = "defaults::max_sampling_iterations")]
    pub max_sampling_iterations: usize,
}

impl Default for CorrectionSettings {
    fn default() -> Self {
        Self {
            candidates: defaults::candidates(),
            kappa: defaults::kappa(),
            kappas: defaults::kappas(),
            trials: defaults::trials(),
            max_sampling_iterations: defaults::max_sampling_iterations(),
        }
    }
}

/// Evenly spaced values, linear or logarithmic. Log grids are rounded when
/// `integer` is set and deduplicated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
    #[serde(default)]
    pub integer: bool,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        let mut out: Vec<f64> = (0..n)
            .map(|i| {
                let t = if n == 1 {
                    0.0
                } else {
                    i as f64 / (n - 1) as f64
                };
                if self.log {
                    (self.start.ln() + t * (self.end.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.end - self.start)
                }
            })
            .collect();
        if self.integer {
            for v in out.iter_mut() {
                *v = v.round();
            }
            out.dedup();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    #[serde(default = "defaults::repetitions")]
    pub repetitions: usize,
    #[serde(default = "defaults::anchor_grid")]
    pub anchor_ratio: Grid,
    #[serde(default = "defaults::expansion_grid")]
    pub expansion_ratio: Grid,
    #[serde(default = "defaults::samples_grid")]
    pub samples_per_region: Grid,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            repetitions: defaults::repetitions(),
            anchor_ratio: defaults::anchor_grid(),
            expansion_ratio: defaults::expansion_grid(),
            samples_per_region: defaults::samples_grid(),
        }
    }
}

impl SweepSettings {
    /// The 100-point anchor and expansion grids.
    pub fn full_resolution(mut self) -> Self {
        self.anchor_ratio.count = 100;
        self.expansion_ratio.count = 100;
        self
    }
}

mod defaults {
    use super::Grid;

    pub fn seed() -> u64 {
        2021
    }
    pub fn beta() -> f64 {
        0.95
    }
    pub fn mode() -> u32 {
        1
    }
    pub fn demonstrations() -> usize {
        500
    }
    pub fn signal_variance() -> f64 {
        1.0
    }
    pub fn noise_variance() -> f64 {
        0.01
    }
    pub fn campaign_count() -> usize {
        100
    }
    pub fn anchor_fraction() -> f64 {
        0.1
    }
    pub fn samples_per_region() -> usize {
        200
    }
    pub fn expansion_ratio() -> f64 {
        0.05
    }
    pub fn max_expansions() -> usize {
        50
    }
    pub fn runs() -> usize {
        50
    }
    pub fn acceptance() -> f64 {
        0.8
    }
    pub fn candidates() -> usize {
        10
    }
    pub fn kappa() -> f64 {
        2.0
    }
    pub fn kappas() -> Vec<f64> {
        vec![2.0, 4.0]
    }
    pub fn trials() -> usize {
        60
    }
    pub fn max_sampling_iterations() -> usize {
        200_000
    }
    pub fn repetitions() -> usize {
        5
    }
    pub fn anchor_grid() -> Grid {
        Grid {
            start: 0.05,
            end: 2.0,
            count: 20,
            log: false,
            integer: false,
        }
    }
    pub fn expansion_grid() -> Grid {
        Grid {
            start: 0.01,
            end: 1.0,
            count: 20,
            log: false,
            integer: false,
        }
    }
    pub fn samples_grid() -> Grid {
        Grid {
            start: 1.0,
            end: 1000.0,
            count: 10,
            log: true,
            integer: true,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Loads a config file, resolving a relative vocabulary path against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let Some(file) = &cfg.vocabulary.file {
            if file.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                cfg.vocabulary.file = Some(base.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn space(&self) -> ParameterSpace {
        self.space
            .clone()
            .unwrap_or_else(|| self.scene.default_space())
    }

    pub fn vocabulary(&self, space: &ParameterSpace) -> Result<RelationVocabulary> {
        match (&self.vocabulary.file, self.vocabulary.relations.is_empty()) {
            (Some(_), false) => Err(Error::InvalidConfig(
                "vocabulary: give either a file or inline relations, not both".into(),
            )),
            (Some(file), true) => {
                let text = std::fs::read_to_string(file)?;
                RelationVocabulary::from_specs(space, &VocabularyFile::from_toml(&text)?.relations)
            }
            (None, false) => RelationVocabulary::from_specs(space, &self.vocabulary.relations),
            (None, true) => self.scene.grasp_vocabulary(space),
        }
    }
}
