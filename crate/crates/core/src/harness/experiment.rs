use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{streams, Setup};
use crate::correction::{build_corrected_dataset, CorrectedDataset};
use crate::error::{Error, Result};
use crate::execution_model::ExecutionModel;
use crate::rng::RngHandle;
use crate::simulator::{Cause, HandleScene};
use crate::space::{ActionParameterization, Experience};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    /// `None` when the sampler found no admissible parameterisation.
    pub params: Option<ActionParameterization>,
    pub success: bool,
    pub causes: BTreeSet<Cause>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub trials: Vec<TrialRecord>,
}

impl EvalReport {
    pub fn successes(&self) -> usize {
        self.trials.iter().filter(|t| t.success).count()
    }

    pub fn no_sample(&self) -> usize {
        self.trials.iter().filter(|t| t.params.is_none()).count()
    }

    pub fn success_rate(&self) -> f64 {
        self.successes() as f64 / self.trials.len() as f64
    }
}

/// Executes `trials` grasps drawn from `model`; trial `t` uses `rng.fork(t)`.
pub fn evaluate_model(
    model: &ExecutionModel,
    scene: &HandleScene,
    mode: u32,
    trials: usize,
    max_iter: usize,
    rng: &RngHandle,
) -> Result<EvalReport> {
    if trials == 0 {
        return Err(Error::Empty("trials"));
    }
    let trials = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut stream = rng.fork(t as u64);
            Ok(match model.sample_execution(mode, max_iter, &mut stream)? {
                Some(x) => {
                    let outcome = scene.execute(&x, &mut stream);
                    TrialRecord {
                        trial: t,
                        params: Some(x),
                        success: outcome.success,
                        causes: outcome.causes,
                    }
                }
                None => TrialRecord {
                    trial: t,
                    params: None,
                    success: false,
                    causes: BTreeSet::new(),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport { trials })
}

#[derive(Debug, Clone)]
pub struct KappaReport {
    pub kappa: f64,
    pub dataset: CorrectedDataset,
    /// Absent when no failure could be corrected.
    pub eval: Option<EvalReport>,
}

impl KappaReport {
    pub fn corrected(&self) -> usize {
        self.dataset.corrected.len()
    }

    pub fn successes(&self) -> Option<usize> {
        self.eval.as_ref().map(EvalReport::successes)
    }
}

/// Correct the campaign's failures with each shape, retrain a success model on
/// failed + corrected experiences only, and evaluate it in the simulator.
///
/// The reference model (see [`Setup::reference_model`]) diagnoses and scores
/// the corrections; the campaign's successes are not part of the retrained
/// model. All shapes share the evaluation stream.
pub fn run_correction_experiment(
    setup: &Setup,
    campaign: &[Experience],
    kappas: &[f64],
    trials: usize,
    master: &RngHandle,
) -> Result<Vec<KappaReport>> {
    if trials == 0 {
        return Err(Error::Empty("trials"));
    }
    let reference = setup.reference_model(campaign, master)?;
    let failures: Vec<Experience> = campaign
        .iter()
        .filter(|e| !e.is_success())
        .cloned()
        .collect();
    let correction_rng = master.fork(streams::CORRECTION);
    let eval_rng = master.fork(streams::EVALUATION);
    let mut reports = Vec::with_capacity(kappas.len());
    for (ki, &kappa) in kappas.iter().enumerate() {
        let cfg = setup.correction_config(campaign, kappa)?;
        let dataset = build_corrected_dataset(
            &reference,
            setup.mode(),
            &failures,
            &cfg,
            &mut correction_rng.fork(ki as u64),
        )?;
        let eval = if dataset.corrected.is_empty() {
            None
        } else {
            let model = retrained_model(&reference, &dataset)?;
            Some(evaluate_model(
                &model,
                setup.scene(),
                setup.mode(),
                trials,
                setup.config.correction.max_sampling_iterations,
                &eval_rng,
            )?)
        };
        reports.push(KappaReport {
            kappa,
            dataset,
            eval,
        });
    }
    Ok(reports)
}

/// `reference` with its success model replaced by one trained on the
/// dataset's failed (0) and corrected (1) experiences.
pub fn retrained_model(
    reference: &ExecutionModel,
    dataset: &CorrectedDataset,
) -> Result<ExecutionModel> {
    let failed: Vec<_> = dataset.sources.iter().map(|e| e.params.clone()).collect();
    let corrected: Vec<_> = dataset.corrected.iter().map(|e| e.params.clone()).collect();
    reference.with_success_model(
        reference
            .success
            .refit_with_synthetic(&failed, &corrected)?,
    )
}
