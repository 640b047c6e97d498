//! Experience correction: move a failed parameterisation away from its
//! falsifying counterpart and keep the precondition-satisfying candidate
//! with the highest predicted success.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnosis::{diagnose_stable, Diagnosis, DiagnosisConfig};
use crate::error::{Error, Result};
use crate::execution_model::ExecutionModel;
use crate::rng::RngHandle;
use crate::space::{ActionParameterization, Experience, Provenance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionConfig {
    /// Candidate corrections per failure (s_max).
    pub candidates: usize,
    /// Gamma shape kappa, at least 1.
    pub shape: f64,
    pub diagnosis: DiagnosisConfig,
}

impl CorrectionConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.candidates == 0 {
            return Err(Error::InvalidConfig(
                "correction: candidates must be at least 1".into(),
            ));
        }
        if !(self.shape.is_finite() && self.shape >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "correction: shape {} below 1",
                self.shape
            )));
        }
        self.diagnosis.validate(dim)
    }
}

/// Signed correction opposing `delta`: `-sgn(delta) * g` with
/// `g ~ Gamma(shape, |delta|)`.
pub fn sample_gamma_correction(delta: f64, shape: f64, rng: &mut RngHandle) -> Result<f64> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::ZeroDelta);
    }
    if !(shape.is_finite() && shape >= 1.0) {
        return Err(Error::InvalidConfig(format!("gamma shape {shape} below 1")));
    }
    Ok(-delta.signum() * rng.gamma(shape, delta.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub params: ActionParameterization,
    /// Predicted success, present only for candidates that satisfy the mode.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionResult {
    pub corrected: Option<ActionParameterization>,
    /// Predicted success of `corrected`; 0 when absent.
    pub predicted: f64,
    pub candidates_valid: usize,
    pub diagnosis: Diagnosis,
    /// Every generated candidate in sampling order.
    pub candidates: Vec<Candidate>,
}

pub fn correct_experience(
    model: &ExecutionModel,
    mode: u32,
    x: &ActionParameterization,
    cfg: &CorrectionConfig,
    rng: &mut RngHandle,
) -> Result<CorrectionResult> {
    model.space.check_dim(x)?;
    cfg.validate(x.len())?;
    let diagnosis = diagnose_stable(model, mode, x, &cfg.diagnosis, &mut rng.fork(0))?;
    let mut sampler = rng.fork(1);
    rng.next_u64();

    let mut updates = vec![vec![0.0; x.len()]; cfg.candidates];
    let mut touched = BTreeSet::new();
    for name in &diagnosis.candidates {
        let p = model.vocab.parameter_of(model.vocab.index_of(name)?);
        let delta = diagnosis.falsifying[p] - x[p];
        if delta == 0.0 || !touched.insert(p) {
            continue;
        }
        for q in updates.iter_mut() {
            q[p] = sample_gamma_correction(delta, cfg.shape, &mut sampler)?;
        }
    }
    if touched.is_empty() {
        return Ok(CorrectionResult {
            corrected: None,
            predicted: 0.0,
            candidates_valid: 0,
            diagnosis,
            candidates: Vec::new(),
        });
    }

    let bounds = model.space.params();
    let mut candidates = Vec::with_capacity(cfg.candidates);
    let mut best: Option<(usize, f64)> = None;
    for (j, q) in updates.iter().enumerate() {
        let mut v = x.values().to_vec();
        for &p in &touched {
            v[p] = (v[p] + q[p]).clamp(bounds[p].lower, bounds[p].upper);
        }
        let params = ActionParameterization::new(v)?;
        let score = if model.satisfies(mode, &params)? {
            Some(model.success.predict(&params)?)
        } else {
            None
        };
        if let Some(s) = score {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((j, s));
            }
        }
        candidates.push(Candidate { params, score });
    }
    let candidates_valid = candidates.iter().filter(|c| c.score.is_some()).count();
    let (corrected, predicted) = match best {
        Some((j, s)) => (Some(candidates[j].params.clone()), s),
        None => (None, 0.0),
    };
    Ok(CorrectionResult {
        corrected,
        predicted,
        candidates_valid,
        diagnosis,
        candidates,
    })
}

#[derive(Debug, Clone)]
pub struct CorrectionRecord {
    /// Position of the failure in the input list.
    pub failure_id: usize,
    pub failed: ActionParameterization,
    pub result: CorrectionResult,
}

#[derive(Debug, Clone, Default)]
pub struct CorrectedDataset {
    pub records: Vec<CorrectionRecord>,
    /// Synthetic experiences, label 1.
    pub corrected: Vec<Experience>,
    /// Source failures of `corrected`, label 0, index-aligned with it.
    pub sources: Vec<Experience>,
    pub skipped: usize,
}

/// Corrects every failure on its own stream `rng.fork(i)`.
pub fn build_corrected_dataset(
    model: &ExecutionModel,
    mode: u32,
    failures: &[Experience],
    cfg: &CorrectionConfig,
    rng: &mut RngHandle,
) -> Result<CorrectedDataset> {
    if let Some(e) = failures.iter().find(|e| e.label != 0.0) {
        return Err(Error::InvalidLabel(e.label));
    }
    let base = rng.clone();
    rng.next_u64();
    let results = failures
        .par_iter()
        .enumerate()
        .map(|(i, f)| correct_experience(model, mode, &f.params, cfg, &mut base.fork(i as u64)))
        .collect::<Result<Vec<_>>>()?;

    let mut out = CorrectedDataset::default();
    for (i, (f, result)) in failures.iter().zip(results).enumerate() {
        match &result.corrected {
            Some(c) => {
                out.corrected.push(Experience::new(
                    c.clone(),
                    1.0,
                    Provenance::SyntheticCorrected,
                )?);
                out.sources
                    .push(Experience::observed(f.params.clone(), false));
            }
            None => out.skipped += 1,
        }
        out.records.push(CorrectionRecord {
            failure_id: i,
            failed: f.params.clone(),
            result,
        });
    }
    Ok(out)
}
