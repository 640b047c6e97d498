//! Parameter spaces, parameterisations and experiences.

use std::collections::{BTreeSet, HashSet};
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One bounded action parameter, in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl ParamDef {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
        }
    }
}

/// Ordered set of named, bounded parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSpace {
    params: Vec<ParamDef>,
}

impl ParameterSpace {
    pub fn new(params: Vec<ParamDef>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut seen = HashSet::new();
        for p in &params {
            if !seen.insert(p.name.as_str()) {
                return Err(Error::DuplicateParameter(p.name.clone()));
            }
            if !(p.lower.is_finite() && p.upper.is_finite() && p.lower < p.upper) {
                return Err(Error::InvalidBounds {
                    name: p.name.clone(),
                    lower: p.lower,
                    upper: p.upper,
                });
            }
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &[ParamDef] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn check_dim(&self, x: &ActionParameterization) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn clamp(&self, x: &ActionParameterization) -> Result<ActionParameterization> {
        self.check_dim(x)?;
        let values = x
            .values()
            .iter()
            .zip(&self.params)
            .map(|(v, p)| v.clamp(p.lower, p.upper))
            .collect();
        Ok(ActionParameterization(values))
    }

    pub fn contains(&self, x: &ActionParameterization) -> bool {
        x.len() == self.dim()
            && x.values()
                .iter()
                .zip(&self.params)
                .all(|(v, p)| *v >= p.lower && *v <= p.upper)
    }
}

impl<'de> Deserialize<'de> for ParameterSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            params: Vec<ParamDef>,
        }
        let raw = Raw::deserialize(d)?;
        ParameterSpace::new(raw.params).map_err(serde::de::Error::custom)
    }
}

/// A point in a [`ParameterSpace`]. All entries are finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionParameterization(Vec<f64>);

impl ActionParameterization {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Copy with coordinate `i` replaced. Panics if `value` is not finite.
    pub fn with(&self, i: usize, value: f64) -> Self {
        assert!(value.is_finite(), "non-finite coordinate");
        let mut v = self.0.clone();
        v[i] = value;
        Self(v)
    }
}

impl Index<usize> for ActionParameterization {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl<'de> Deserialize<'de> for ActionParameterization {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        ActionParameterization::new(values).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Observed,
    SyntheticCorrected,
}

/// A labelled execution. `label` is the success likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub params: ActionParameterization,
    pub label: f64,
    pub provenance: Provenance,
    pub cause_labels: Option<BTreeSet<String>>,
}

impl Experience {
    pub fn new(params: ActionParameterization, label: f64, provenance: Provenance) -> Result<Self> {
        if !(0.0..=1.0).contains(&label) {
            return Err(Error::InvalidLabel(label));
        }
        if provenance == Provenance::Observed && label != 0.0 && label != 1.0 {
            return Err(Error::InvalidLabel(label));
        }
        Ok(Self {
            params,
            label,
            provenance,
            cause_labels: None,
        })
    }

    pub fn observed(params: ActionParameterization, success: bool) -> Self {
        Self {
            params,
            label: if success { 1.0 } else { 0.0 },
            provenance: Provenance::Observed,
            cause_labels: None,
        }
    }

    pub fn with_causes(mut self, causes: BTreeSet<String>) -> Self {
        self.cause_labels = Some(causes);
        self
    }

    pub fn is_success(&self) -> bool {
        self.label >= 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grasp_space() -> ParameterSpace {
        ParameterSpace::new(vec![
            ParamDef::new("x", -0.2, 0.2),
            ParamDef::new("y", -0.2, 0.2),
            ParamDef::new("z", -0.2, 0.2),
        ])
        .unwrap()
    }

    #[test]
    fn builds_three_parameter_space() {
        let s = grasp_space();
        assert_eq!(s.dim(), 3);
        assert_eq!(s.index_of("z"), Some(2));
    }

    #[test]
    fn rejects_degenerate_bounds() {
        let err = ParameterSpace::new(vec![ParamDef::new("x", 0.1, 0.1)]).unwrap_err();
        assert!(err.to_string().contains("inverted/empty bounds"), "{err}");
        assert!(err.to_string().contains('x'));
    }

    #[test]
    fn rejects_duplicate_names() {
        let err = ParameterSpace::new(vec![
            ParamDef::new("x", 0.0, 1.0),
            ParamDef::new("x", 0.0, 1.0),
        ])
        .unwrap_err();
        assert_eq!(err.to_string(), "duplicate parameter name x");
    }

    #[test]
    fn rejects_empty_space() {
        assert!(matches!(
            ParameterSpace::new(vec![]),
            Err(Error::EmptySpace)
        ));
    }

    #[test]
    fn clamp_cases() {
        let s = grasp_space();
        let inside = ActionParameterization::new(vec![0.1, -0.1, 0.0]).unwrap();
        assert_eq!(s.clamp(&inside).unwrap(), inside);
        let out = ActionParameterization::new(vec![0.5, -1.0, 0.0]).unwrap();
        assert_eq!(s.clamp(&out).unwrap().values(), &[0.2, -0.2, 0.0]);
        let short = ActionParameterization::new(vec![0.0]).unwrap();
        assert!(matches!(
            s.clamp(&short),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            ActionParameterization::new(vec![0.0, f64::NAN]),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn observed_labels_are_binary() {
        let x = ActionParameterization::new(vec![0.0]).unwrap();
        assert!(Experience::new(x.clone(), 0.5, Provenance::Observed).is_err());
        assert!(Experience::new(x.clone(), 0.5, Provenance::SyntheticCorrected).is_ok());
        assert!(Experience::new(x, 1.5, Provenance::SyntheticCorrected).is_err());
    }

    proptest! {
        #[test]
        fn clamp_is_idempotent(v in proptest::collection::vec(-5.0f64..5.0, 3)) {
            let s = grasp_space();
            let x = ActionParameterization::new(v).unwrap();
            let once = s.clamp(&x).unwrap();
            prop_assert!(s.contains(&once));
            prop_assert_eq!(s.clamp(&once).unwrap(), once);
        }
    }
}
