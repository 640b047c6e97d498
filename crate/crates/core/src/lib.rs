//! Sampling-based diagnosis and correction of failed parameterised actions.
//!
//! An [`ExecutionModel`] pairs relational preconditions over a spatial
//! predicate vocabulary with a Gaussian-process success model.
//! [`diagnose_stable`] searches around a failed parameterisation for
//! relations that falsify the preconditions; [`correct_experience`] uses the
//! diagnosis to propose a corrected parameterisation that can be added to the
//! training data as a synthetic success. The [`simulator`] and [`harness`]
//! modules provide a handle-grasp world and the experiment drivers.

pub mod config;
pub mod correction;
pub mod diagnosis;
pub mod error;
pub mod execution_model;
pub mod harness;
pub mod relations;
pub mod rng;
pub mod simulator;
pub mod space;
pub mod success_model;

pub use correction::{
    build_corrected_dataset, correct_experience, sample_gamma_correction, CorrectedDataset,
    CorrectionConfig, CorrectionResult,
};
pub use diagnosis::{
    diagnose_once, diagnose_stable, score_diagnosis, Diagnosis, DiagnosisConfig, RunOutcome, Score,
};
pub use error::{Error, Result};
pub use execution_model::{learn_preconditions, ExecutionModel, PreconditionModel};
pub use relations::{Predicate, RelationDef, RelationVocabulary, RelationalState};
pub use rng::RngHandle;
pub use simulator::{causes_to_relations, Cause, GraspOutcome, HandleScene};
pub use space::{ActionParameterization, Experience, ParamDef, ParameterSpace, Provenance};
pub use success_model::{GpHyperparams, SuccessModel};
