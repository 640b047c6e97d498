//! Experiment orchestration for the handle-grasp setting.
//!
//! Every stochastic step draws from a fixed fork of the master seed (see
//! [`streams`]), so each subcommand reproduces the same campaign and the same
//! downstream results regardless of which other steps ran.

mod experiment;
pub mod output;
mod sweep;

use std::collections::BTreeSet;

use rayon::prelude::*;

pub use experiment::{
    evaluate_model, retrained_model, run_correction_experiment, EvalReport, KappaReport,
    TrialRecord,
};
pub use sweep::{run_sensitivity_sweep, SweepParam, SweepRawRow, SweepReport, SweepRow, SweepSpec};

use crate::config::Config;
use crate::correction::CorrectionConfig;
use crate::diagnosis::{diagnose_stable, score_diagnosis, Diagnosis, DiagnosisConfig, Score};
use crate::error::{Error, Result};
use crate::execution_model::{learn_preconditions, ExecutionModel};
use crate::relations::RelationVocabulary;
use crate::rng::RngHandle;
use crate::simulator::{causes_to_relations, HandleScene};
use crate::space::{ActionParameterization, Experience, ParameterSpace};
use crate::success_model::{GpHyperparams, SuccessModel};

/// Fork indices of the master stream.
pub mod streams {
    pub const CAMPAIGN: u64 = 0;
    pub const DIAGNOSIS: u64 = 1;
    pub const CORRECTION: u64 = 2;
    pub const SWEEP: u64 = 3;
    pub const EVALUATION: u64 = 4;
    pub const DEMONSTRATIONS: u64 = 5;
}

/// 10%-style anchor: `fraction` times the mean full bbox extent per axis.
pub fn anchor_from_extents(extents: &[[f64; 3]], fraction: f64) -> Result<Vec<f64>> {
    if extents.is_empty() {
        return Err(Error::Empty("campaign"));
    }
    let n = extents.len() as f64;
    let anchor: Vec<f64> = (0..3)
        .map(|axis| fraction * extents.iter().map(|e| e[axis]).sum::<f64>() / n)
        .collect();
    if let Some(axis) = anchor.iter().position(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "zero bbox extent on axis {axis}"
        )));
    }
    Ok(anchor)
}

/// Anchor standard deviations for a campaign executed against `scene`; every
/// execution observes the scene's bounding box.
pub fn compute_anchor_sigma(
    campaign: &[Experience],
    scene: &HandleScene,
    fraction: f64,
) -> Result<Vec<f64>> {
    let extents = vec![scene.bbox_full_extents(); campaign.len()];
    anchor_from_extents(&extents, fraction)
}

/// A failed execution with its ground-truth relations.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureCase {
    pub id: usize,
    pub params: ActionParameterization,
    pub truth: BTreeSet<String>,
}

/// Failed experiences of a campaign, keyed by their campaign index.
pub fn failure_cases(campaign: &[Experience]) -> Result<Vec<FailureCase>> {
    campaign
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_success())
        .map(|(id, e)| {
            let causes = e.cause_labels.clone().unwrap_or_default();
            Ok(FailureCase {
                id,
                params: e.params.clone(),
                truth: causes_to_relations(causes.iter().map(String::as_str))?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct DiagnosisRecord {
    pub case: FailureCase,
    pub diagnosis: Diagnosis,
    pub score: Score,
}

/// Diagnoses every case on `rng.fork(case.id)`.
pub fn diagnose_failures(
    model: &ExecutionModel,
    mode: u32,
    cases: &[FailureCase],
    cfg: &DiagnosisConfig,
    rng: &RngHandle,
) -> Result<Vec<DiagnosisRecord>> {
    cases
        .par_iter()
        .map(|case| {
            let diagnosis = diagnose_stable(
                model,
                mode,
                &case.params,
                cfg,
                &mut rng.fork(case.id as u64),
            )?;
            let score = score_diagnosis(&diagnosis.candidates, &case.truth);
            Ok(DiagnosisRecord {
                case: case.clone(),
                diagnosis,
                score,
            })
        })
        .collect()
}

/// Validated configuration plus the objects derived from it.
#[derive(Debug, Clone)]
pub struct Setup {
    pub config: Config,
    pub space: ParameterSpace,
    pub vocab: RelationVocabulary,
}

impl Setup {
    /// Validates the scene and vocabulary, including threshold alignment
    /// between simulator causes and relations.
    pub fn new(config: Config) -> Result<Self> {
        config.scene.validate()?;
        let space = config.space();
        if space.dim() != 3 {
            return Err(Error::InvalidConfig(
                "the handle grasp uses exactly 3 parameters".into(),
            ));
        }
        let vocab = config.vocabulary(&space)?;
        config.scene.check_alignment(&vocab)?;
        Ok(Self {
            config,
            space,
            vocab,
        })
    }

    pub fn scene(&self) -> &HandleScene {
        &self.config.scene
    }

    pub fn mode(&self) -> u32 {
        self.config.model.mode
    }

    pub fn master_rng(&self, seed: u64) -> RngHandle {
        RngHandle::new(seed)
    }

    pub fn hyper(&self) -> GpHyperparams {
        let m = &self.config.model;
        GpHyperparams {
            length_scales: m
                .length_scales
                .clone()
                .unwrap_or_else(|| self.scene().bbox_half_extents.to_vec()),
            signal_variance: m.signal_variance,
            noise_variance: m.noise_variance,
        }
    }

    pub fn campaign(&self, master: &RngHandle) -> Result<Vec<Experience>> {
        self.scene().random_campaign(
            &self.space,
            self.config.campaign.count,
            &mut master.fork(streams::CAMPAIGN),
        )
    }

    pub fn anchor_sigma(&self, campaign: &[Experience]) -> Result<Vec<f64>> {
        compute_anchor_sigma(
            campaign,
            self.scene(),
            self.config.diagnosis.anchor_fraction,
        )
    }

    pub fn diagnosis_config(&self, campaign: &[Experience]) -> Result<DiagnosisConfig> {
        let d = &self.config.diagnosis;
        let initial_std = match &d.initial_std {
            Some(s) => s.clone(),
            None => self.anchor_sigma(campaign)?,
        };
        let cfg = DiagnosisConfig {
            samples_per_region: d.samples_per_region,
            initial_std,
            expansion_ratio: d.expansion_ratio,
            max_expansions: d.max_expansions,
            runs: d.runs,
            acceptance: d.acceptance,
        };
        cfg.validate(self.space.dim())?;
        Ok(cfg)
    }

    pub fn correction_config(
        &self,
        campaign: &[Experience],
        shape: f64,
    ) -> Result<CorrectionConfig> {
        let cfg = CorrectionConfig {
            candidates: self.config.correction.candidates,
            shape,
            diagnosis: self.diagnosis_config(campaign)?,
        };
        cfg.validate(self.space.dim())?;
        Ok(cfg)
    }

    /// Sweep over `parameter` using the configured grid, around the baseline
    /// diagnosis settings.
    pub fn sweep_spec(
        &self,
        parameter: SweepParam,
        campaign: &[Experience],
        full_resolution: bool,
    ) -> Result<SweepSpec> {
        let mut grids = self.config.sweep.clone();
        if full_resolution {
            grids = grids.full_resolution();
        }
        let grid = match parameter {
            SweepParam::AnchorRatio => &grids.anchor_ratio,
            SweepParam::ExpansionRatio => &grids.expansion_ratio,
            SweepParam::SamplesPerRegion => &grids.samples_per_region,
        };
        let spec = SweepSpec {
            parameter,
            values: grid.values(),
            repetitions: grids.repetitions,
            baseline: self.diagnosis_config(campaign)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Successful demonstrations, or the campaign's successes when no
    /// demonstrations are configured.
    pub fn precondition_examples(
        &self,
        campaign: &[Experience],
        master: &RngHandle,
    ) -> Result<Vec<Experience>> {
        let count = self.config.model.demonstrations;
        let pool = if count == 0 {
            campaign.to_vec()
        } else {
            self.scene().demonstrations(
                &self.space,
                count,
                &mut master.fork(streams::DEMONSTRATIONS),
            )?
        };
        Ok(pool.into_iter().filter(Experience::is_success).collect())
    }

    /// Preconditions learned from [`Setup::precondition_examples`]; success
    /// model fitted on the whole campaign.
    pub fn reference_model(
        &self,
        campaign: &[Experience],
        master: &RngHandle,
    ) -> Result<ExecutionModel> {
        let successes = self.precondition_examples(campaign, master)?;
        let preconditions = learn_preconditions(&self.vocab, &successes, self.config.model.beta)?;
        let success = SuccessModel::fit(campaign, self.hyper())?;
        ExecutionModel::new(
            self.space.clone(),
            self.vocab.clone(),
            preconditions,
            success,
        )
    }
}
