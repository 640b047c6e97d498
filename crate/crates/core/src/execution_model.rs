//! The composite execution model: relational preconditions plus the
//! success model, and rejection-sampling execution.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relations::{RelationSpec, RelationVocabulary};
use crate::rng::RngHandle;
use crate::space::{ActionParameterization, Experience, ParameterSpace};
use crate::success_model::SuccessModel;

/// Required relations per qualitative mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreconditionModel {
    modes: BTreeMap<u32, BTreeSet<String>>,
}

impl PreconditionModel {
    /// Single mode `1`, unvalidated.
    pub fn single(required: BTreeSet<String>) -> Self {
        Self {
            modes: BTreeMap::from([(1, required)]),
        }
    }

    pub fn new(vocab: &RelationVocabulary, modes: BTreeMap<u32, BTreeSet<String>>) -> Result<Self> {
        let model = Self { modes };
        model.validate(vocab)?;
        Ok(model)
    }

    pub fn validate(&self, vocab: &RelationVocabulary) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::InvalidPreconditions("no qualitative mode".into()));
        }
        for (q, required) in &self.modes {
            let mut groups = BTreeSet::new();
            for name in required {
                let i = vocab.index_of(name)?;
                if let Some(g) = vocab.group_of(i) {
                    if !groups.insert(g) {
                        return Err(Error::InvalidPreconditions(format!(
                            "mode {q} requires two relations of group {}",
                            vocab.group_name(g)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn modes(&self) -> &BTreeMap<u32, BTreeSet<String>> {
        &self.modes
    }

    pub fn required(&self, mode: u32) -> Result<&BTreeSet<String>> {
        self.modes.get(&mode).ok_or(Error::UnknownMode(mode))
    }

    pub(crate) fn required_mask(&self, vocab: &RelationVocabulary, mode: u32) -> Result<Vec<bool>> {
        let mut mask = vec![false; vocab.len()];
        for name in self.required(mode)? {
            mask[vocab.index_of(name)?] = true;
        }
        Ok(mask)
    }
}

/// Single-mode precondition model: relations holding in at least a `beta`
/// fraction of the successful experiences. `beta` must lie in (0.5, 1] so
/// that no two relations of one disjoint group can both qualify.
pub fn learn_preconditions(
    vocab: &RelationVocabulary,
    successes: &[Experience],
    beta: f64,
) -> Result<PreconditionModel> {
    if successes.is_empty() {
        return Err(Error::Empty("successful experiences"));
    }
    if !(beta > 0.5 && beta <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "beta {beta} outside (0.5, 1]"
        )));
    }
    if let Some(e) = successes.iter().find(|e| !e.is_success()) {
        return Err(Error::InvalidLabel(e.label));
    }
    let mut counts = vec![0usize; vocab.len()];
    for e in successes {
        for i in vocab.extract(&e.params)?.true_indices() {
            counts[i] += 1;
        }
    }
    let n = successes.len() as f64;
    let required = vocab.names_of((0..vocab.len()).filter(|&i| counts[i] as f64 / n >= beta));
    PreconditionModel::new(vocab, BTreeMap::from([(1, required)]))
}

#[derive(Debug, Clone)]
pub struct ExecutionModel {
    pub space: ParameterSpace,
    pub vocab: RelationVocabulary,
    pub preconditions: PreconditionModel,
    pub success: SuccessModel,
}

impl ExecutionModel {
    pub fn new(
        space: ParameterSpace,
        vocab: RelationVocabulary,
        preconditions: PreconditionModel,
        success: SuccessModel,
    ) -> Result<Self> {
        if vocab.dim() != space.dim() || success.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                actual: if vocab.dim() != space.dim() {
                    vocab.dim()
                } else {
                    success.dim()
                },
            });
        }
        preconditions.validate(&vocab)?;
        Ok(Self {
            space,
            vocab,
            preconditions,
            success,
        })
    }

    /// Same relational model, different success model.
    pub fn with_success_model(&self, success: SuccessModel) -> Result<Self> {
        Self::new(
            self.space.clone(),
            self.vocab.clone(),
            self.preconditions.clone(),
            success,
        )
    }

    pub fn satisfies(&self, mode: u32, x: &ActionParameterization) -> Result<bool> {
        self.vocab.satisfies(&self.preconditions, mode, x)
    }

    /// Rejection sampling: uniform proposals over the parameter bounds,
    /// thinned by predicted success relative to the best prediction seen so
    /// far, then filtered by the mode's relational constraints.
    pub fn sample_execution(
        &self,
        mode: u32,
        max_iter: usize,
        rng: &mut RngHandle,
    ) -> Result<Option<ActionParameterization>> {
        let required = self.preconditions.required_mask(&self.vocab, mode)?;
        let mut best_seen = 0.0f64;
        let mut candidate = vec![0.0; self.space.dim()];
        for _ in 0..max_iter {
            for (c, p) in candidate.iter_mut().zip(self.space.params()) {
                *c = rng.uniform(p.lower, p.upper);
            }
            let s = self.success.predict_values(&candidate);
            best_seen = best_seen.max(s);
            let u = rng.unit();
            if best_seen <= 0.0 || u >= s / best_seen {
                continue;
            }
            if self.vocab.satisfies_mask(&required, &candidate) {
                return Ok(Some(ActionParameterization::new(candidate)?));
            }
        }
        Ok(None)
    }

    pub fn to_file(&self) -> ExecutionModelFile {
        ExecutionModelFile {
            space: self.space.clone(),
            relations: self.vocab.to_file().relations,
            modes: self
                .preconditions
                .modes()
                .iter()
                .map(|(&id, r)| ModeEntry {
                    id,
                    relations: r.iter().cloned().collect(),
                })
                .collect(),
            success_model: self.success.dump(),
        }
    }

    pub fn from_file(file: ExecutionModelFile) -> Result<Self> {
        let vocab = RelationVocabulary::from_specs(&file.space, &file.relations)?;
        let modes = file
            .modes
            .into_iter()
            .map(|m| (m.id, m.relations.into_iter().collect()))
            .collect();
        let preconditions = PreconditionModel::new(&vocab, modes)?;
        let success = SuccessModel::load(&file.success_model)?;
        Self::new(file.space, vocab, preconditions, success)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("execution model serialises")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ExecutionModelFile =
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }
}

/// On-disk execution model: space, relations, per-mode requirements and the
/// success model dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExecutionModelFile {
    pub space: ParameterSpace,
    #[serde(rename = "relation")]
    pub relations: Vec<RelationSpec>,
    #[serde(rename = "mode")]
    pub modes: Vec<ModeEntry>,
    pub success_model: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeEntry {
    pub id: u32,
    pub relations: Vec<String>,
}
