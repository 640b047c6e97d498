//! Perturbation search for precondition violations around a failed
//! parameterisation.
//!
//! One run samples `samples_per_region` parameterisations from an axis-aligned
//! Gaussian centred on the failure. Relations that hold under a sample but are
//! not required by the mode become diagnosis candidates; the sample's value of
//! the parameter each candidate depends on is recorded. Contradicting
//! candidates (same disjoint group) are dropped after every violation. If a
//! whole batch yields no candidate, every standard deviation grows by the
//! expansion ratio and the batch is repeated, up to `max_expansions` times.
//!
//! [`diagnose_stable`] repeats the run on independent streams and keeps
//! relations whose appearance frequency strictly exceeds the acceptance
//! threshold.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::execution_model::ExecutionModel;
use crate::rng::RngHandle;
use crate::space::ActionParameterization;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisConfig {
    /// Samples drawn per search region (k_max).
    pub samples_per_region: usize,
    /// Initial per-parameter standard deviations, meters.
    pub initial_std: Vec<f64>,
    /// Region expansion ratio r.
    pub expansion_ratio: f64,
    /// Maximum number of region expansions per run.
    pub max_expansions: usize,
    /// Stability runs n.
    pub runs: usize,
    /// Acceptance threshold alpha on the appearance frequency.
    pub acceptance: f64,
}

impl DiagnosisConfig {
    /// Baseline settings around the given initial standard deviations.
    pub fn baseline(initial_std: Vec<f64>) -> Self {
        Self {
            samples_per_region: 200,
            initial_std,
            expansion_ratio: 0.05,
            max_expansions: 50,
            runs: 50,
            acceptance: 0.8,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(format!("diagnosis: {m}")));
        if self.samples_per_region == 0 {
            return bad("samples_per_region must be at least 1".into());
        }
        if self.initial_std.len() != dim {
            return bad(format!(
                "{} initial standard deviations for {dim} parameters",
                self.initial_std.len()
            ));
        }
        if !self.initial_std.iter().all(|s| s.is_finite() && *s > 0.0) {
            return bad("initial standard deviations must be positive".into());
        }
        if !(self.expansion_ratio.is_finite() && self.expansion_ratio > 0.0) {
            return bad("expansion ratio must be positive".into());
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if !(self.acceptance > 0.0 && self.acceptance <= 1.0) {
            return bad("acceptance must lie in (0, 1]".into());
        }
        Ok(())
    }
}

/// Result of a single diagnosis run.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Found(RunDiagnosis),
    /// No violation was found within the expansion budget.
    Exhausted {
        expansions: usize,
        final_std: Vec<f64>,
    },
}

impl RunOutcome {
    pub fn found(&self) -> Option<&RunDiagnosis> {
        match self {
            RunOutcome::Found(d) => Some(d),
            RunOutcome::Exhausted { .. } => None,
        }
    }

    pub fn expansions(&self) -> usize {
        match self {
            RunOutcome::Found(d) => d.expansions,
            RunOutcome::Exhausted { expansions, .. } => *expansions,
        }
    }

    pub fn final_std(&self) -> &[f64] {
        match self {
            RunOutcome::Found(d) => &d.final_std,
            RunOutcome::Exhausted { final_std, .. } => final_std,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunDiagnosis {
    /// Candidate relation indices into the vocabulary.
    pub candidates: BTreeSet<usize>,
    /// Violating value per affected parameter index.
    pub violations: BTreeMap<usize, f64>,
    pub falsifying: ActionParameterization,
    pub expansions: usize,
    /// Standard deviations of the batch that produced the candidates.
    pub final_std: Vec<f64>,
}

/// Aggregated diagnosis over the stability runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnosis {
    pub candidates: BTreeSet<String>,
    pub falsifying: ActionParameterization,
    /// Appearance frequency of every relation seen in any run.
    pub frequencies: BTreeMap<String, f64>,
    /// Largest number of expansions any run needed.
    pub expansions_used: usize,
    /// Runs that ended without a violation.
    pub exhausted_runs: usize,
}

impl Diagnosis {
    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// One diagnosis run.
pub fn diagnose_once(
    model: &ExecutionModel,
    mode: u32,
    x: &ActionParameterization,
    cfg: &DiagnosisConfig,
    rng: &mut RngHandle,
) -> Result<RunOutcome> {
    let vocab = &model.vocab;
    vocab.check_dim(x)?;
    cfg.validate(x.len())?;
    let required = model.preconditions.required_mask(vocab, mode)?;

    let mut std = cfg.initial_std.clone();
    let mut sample = vec![0.0; x.len()];
    let mut expansions = 0;
    loop {
        let mut candidates = BTreeSet::new();
        let mut violations = BTreeMap::new();
        for _ in 0..cfg.samples_per_region {
            for ((s, &mean), &sd) in sample.iter_mut().zip(x.values()).zip(&std) {
                *s = rng.normal(mean, sd);
            }
            let mut violated = false;
            for (i, r) in vocab.relations().iter().enumerate() {
                if r.predicate.holds(sample[r.parameter]) && !required[i] {
                    candidates.insert(i);
                    violations.insert(r.parameter, sample[r.parameter]);
                    violated = true;
                }
            }
            if violated {
                vocab.remove_conflicts_idx(&mut candidates, &mut violations);
            }
        }
        if !candidates.is_empty() {
            let mut falsifying = x.values().to_vec();
            for (&p, &v) in &violations {
                falsifying[p] = v;
            }
            return Ok(RunOutcome::Found(RunDiagnosis {
                candidates,
                violations,
                falsifying: ActionParameterization::new(falsifying)?,
                expansions,
                final_std: std,
            }));
        }
        if expansions >= cfg.max_expansions {
            return Ok(RunOutcome::Exhausted {
                expansions,
                final_std: std,
            });
        }
        for s in std.iter_mut() {
            *s += cfg.expansion_ratio * *s;
        }
        expansions += 1;
    }
}

/// `cfg.runs` independent runs, each on `rng.fork(run)`, aggregated.
///
/// A relation is kept iff it appears in strictly more than an `acceptance`
/// fraction of the runs. The falsifying parameterisation holds, for every
/// parameter of a kept relation, the mean violating value over the runs in
/// which a kept relation on that parameter appeared; other coordinates equal
/// `x`.
pub fn diagnose_stable(
    model: &ExecutionModel,
    mode: u32,
    x: &ActionParameterization,
    cfg: &DiagnosisConfig,
    rng: &mut RngHandle,
) -> Result<Diagnosis> {
    model.vocab.check_dim(x)?;
    cfg.validate(x.len())?;
    model.preconditions.required(mode)?;
    let base = rng.clone();
    let outcomes = (0..cfg.runs)
        .into_par_iter()
        .map(|run| diagnose_once(model, mode, x, cfg, &mut base.fork(run as u64)))
        .collect::<Result<Vec<_>>>()?;
    // keep the caller's stream moving so consecutive calls differ
    rng.next_u64();
    Ok(aggregate_runs(model, x, cfg, &outcomes))
}

pub(crate) fn aggregate_runs(
    model: &ExecutionModel,
    x: &ActionParameterization,
    cfg: &DiagnosisConfig,
    outcomes: &[RunOutcome],
) -> Diagnosis {
    let vocab = &model.vocab;
    let n = outcomes.len() as f64;
    let mut counts = vec![0usize; vocab.len()];
    for d in outcomes.iter().filter_map(RunOutcome::found) {
        for &c in &d.candidates {
            counts[c] += 1;
        }
    }
    let mut kept: BTreeSet<usize> = (0..vocab.len())
        .filter(|&i| counts[i] as f64 / n > cfg.acceptance)
        .collect();
    // Only reachable for acceptance < 0.5.
    let mut unused = BTreeMap::new();
    vocab.remove_conflicts_idx(&mut kept, &mut unused);

    let params: BTreeSet<usize> = kept.iter().map(|&i| vocab.parameter_of(i)).collect();
    let mut falsifying = x.values().to_vec();
    for &p in &params {
        let values: Vec<f64> = outcomes
            .iter()
            .filter_map(RunOutcome::found)
            .filter(|d| {
                d.candidates
                    .iter()
                    .any(|c| kept.contains(c) && vocab.parameter_of(*c) == p)
            })
            .map(|d| d.violations[&p])
            .collect();
        falsifying[p] = values.iter().sum::<f64>() / values.len() as f64;
    }

    Diagnosis {
        candidates: vocab.names_of(kept.iter().copied()),
        falsifying: ActionParameterization::new(falsifying).expect("means of finite values"),
        frequencies: (0..vocab.len())
            .filter(|&i| counts[i] > 0)
            .map(|i| (vocab.name(i).to_owned(), counts[i] as f64 / n))
            .collect(),
        expansions_used: outcomes
            .iter()
            .map(RunOutcome::expansions)
            .max()
            .unwrap_or(0),
        exhausted_runs: outcomes.iter().filter(|o| o.found().is_none()).count(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Score {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl std::ops::AddAssign for Score {
    fn add_assign(&mut self, o: Self) {
        self.true_positives += o.true_positives;
        self.false_positives += o.false_positives;
        self.false_negatives += o.false_negatives;
    }
}

pub fn score_diagnosis(predicted: &BTreeSet<String>, truth: &BTreeSet<String>) -> Score {
    let tp = predicted.intersection(truth).count();
    Score {
        true_positives: tp,
        false_positives: predicted.len() - tp,
        false_negatives: truth.len() - tp,
    }
}
