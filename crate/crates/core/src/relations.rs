//! Spatial predicate vocabulary.
//!
//! Every relation is a predicate over exactly one action parameter; the
//! parameter it reads is its image under the relation→parameter mapping.
//! Relations may be annotated with a disjoint group, in which case at most
//! one member of the group can hold for any parameterisation.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::execution_model::PreconditionModel;
use crate::space::{ActionParameterization, ParameterSpace};

/// Predicate on a single coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Predicate {
    /// `v < threshold`
    Below(f64),
    /// `v > threshold`
    Above(f64),
    /// `lower <= v <= upper`
    Inside(f64, f64),
}

impl Predicate {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Predicate::Below(t) => v < t,
            Predicate::Above(t) => v > t,
            Predicate::Inside(lo, hi) => lo <= v && v <= hi,
        }
    }

    // (lower, lower_closed, upper, upper_closed)
    fn interval(&self) -> (f64, bool, f64, bool) {
        match *self {
            Predicate::Below(t) => (f64::NEG_INFINITY, false, t, false),
            Predicate::Above(t) => (t, false, f64::INFINITY, false),
            Predicate::Inside(lo, hi) => (lo, true, hi, true),
        }
    }

    fn overlaps(&self, other: &Predicate) -> bool {
        let (alo, alc, ahi, ahc) = self.interval();
        let (blo, blc, bhi, bhc) = other.interval();
        let (lo, lo_closed) = if alo > blo {
            (alo, alc)
        } else if blo > alo {
            (blo, blc)
        } else {
            (alo, alc && blc)
        };
        let (hi, hi_closed) = if ahi < bhi {
            (ahi, ahc)
        } else if bhi < ahi {
            (bhi, bhc)
        } else {
            (ahi, ahc && bhc)
        };
        lo < hi || (lo == hi && lo_closed && hi_closed)
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Predicate::Below(_) => "below",
            Predicate::Above(_) => "above",
            Predicate::Inside(..) => "inside",
        }
    }

    fn thresholds(&self) -> Vec<f64> {
        match *self {
            Predicate::Below(t) | Predicate::Above(t) => vec![t],
            Predicate::Inside(lo, hi) => vec![lo, hi],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationDef {
    pub name: String,
    /// Index of the parameter this relation depends on.
    pub parameter: usize,
    pub predicate: Predicate,
    pub disjoint_group: Option<String>,
}

impl RelationDef {
    pub fn new(
        name: impl Into<String>,
        parameter: usize,
        predicate: Predicate,
        group: Option<&str>,
    ) -> Self {
        Self {
            name: name.into(),
            parameter,
            predicate,
            disjoint_group: group.map(str::to_owned),
        }
    }
}

/// File form of a relation: parameters are referenced by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub name: String,
    pub parameter: String,
    /// Must equal `parameter` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    /// `below`, `above` or `inside`.
    pub kind: String,
    pub thresholds: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VocabularyFile {
    #[serde(rename = "relation")]
    pub relations: Vec<RelationSpec>,
}

impl VocabularyFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("vocabulary serialises")
    }
}

/// Problems with a candidate vocabulary; empty means valid.
pub fn validate_vocabulary(space: &ParameterSpace, relations: &[RelationDef]) -> Vec<String> {
    let mut problems = Vec::new();
    let mut names = HashSet::new();
    for r in relations {
        if !names.insert(r.name.as_str()) {
            problems.push(format!("duplicate relation name {}", r.name));
        }
        if r.parameter >= space.dim() {
            problems.push(format!(
                "relation {} references parameter index {} outside the space",
                r.name, r.parameter
            ));
        }
        if let Predicate::Inside(lo, hi) = r.predicate {
            if lo
                .partial_cmp(&hi)
                .is_none_or(|o| o == std::cmp::Ordering::Greater)
            {
                problems.push(format!("relation {} has an empty interval", r.name));
            }
        }
        let finite = match r.predicate {
            Predicate::Below(t) | Predicate::Above(t) => t.is_finite(),
            Predicate::Inside(lo, hi) => lo.is_finite() && hi.is_finite(),
        };
        if !finite {
            problems.push(format!("relation {} has a non-finite threshold", r.name));
        }
    }
    for (i, p) in space.params().iter().enumerate() {
        if !relations.iter().any(|r| r.parameter == i) {
            problems.push(format!("parameter {} has no relation", p.name));
        }
    }
    let mut groups: BTreeMap<&str, Vec<&RelationDef>> = BTreeMap::new();
    for r in relations {
        if let Some(g) = &r.disjoint_group {
            groups.entry(g.as_str()).or_default().push(r);
        }
    }
    for (g, members) in &groups {
        let params: BTreeSet<usize> = members.iter().map(|r| r.parameter).collect();
        if params.len() > 1 {
            problems.push(format!("group {g} spans multiple parameters"));
            continue;
        }
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                if a.predicate.overlaps(&b.predicate) {
                    problems.push(format!(
                        "group {g} has overlapping relations {} and {}",
                        a.name, b.name
                    ));
                }
            }
        }
    }
    problems
}

/// A validated, immutable relation vocabulary over a parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationVocabulary {
    relations: Vec<RelationDef>,
    param_names: Vec<String>,
    index: HashMap<String, usize>,
    group_of: Vec<Option<usize>>,
    groups: Vec<String>,
}

impl RelationVocabulary {
    pub fn new(space: &ParameterSpace, relations: Vec<RelationDef>) -> Result<Self> {
        let problems = validate_vocabulary(space, &relations);
        if !problems.is_empty() {
            return Err(Error::InvalidVocabulary(problems));
        }
        let index = relations
            .iter()
            .enumerate()
            .map(|(i, r)| (r.name.clone(), i))
            .collect();
        let mut groups: Vec<String> = Vec::new();
        let group_of = relations
            .iter()
            .map(|r| {
                r.disjoint_group
                    .as_ref()
                    .map(|g| match groups.iter().position(|x| x == g) {
                        Some(i) => i,
                        None => {
                            groups.push(g.clone());
                            groups.len() - 1
                        }
                    })
            })
            .collect();
        Ok(Self {
            relations,
            param_names: space.params().iter().map(|p| p.name.clone()).collect(),
            index,
            group_of,
            groups,
        })
    }

    pub fn from_specs(space: &ParameterSpace, specs: &[RelationSpec]) -> Result<Self> {
        let mut defs = Vec::with_capacity(specs.len());
        let mut problems = Vec::new();
        for s in specs {
            let Some(parameter) = space.index_of(&s.parameter) else {
                problems.push(format!(
                    "relation {} references unknown parameter {}",
                    s.name, s.parameter
                ));
                continue;
            };
            if let Some(axis) = &s.axis {
                if axis != &s.parameter {
                    problems.push(format!(
                        "relation {} reads axis {} but maps to parameter {}",
                        s.name, axis, s.parameter
                    ));
                }
            }
            let predicate = match (s.kind.as_str(), s.thresholds.as_slice()) {
                ("below", [t]) => Predicate::Below(*t),
                ("above", [t]) => Predicate::Above(*t),
                ("inside", [lo, hi]) => Predicate::Inside(*lo, *hi),
                (kind, t) => {
                    problems.push(format!(
                        "relation {}: kind {kind} with {} threshold(s)",
                        s.name,
                        t.len()
                    ));
                    continue;
                }
            };
            defs.push(RelationDef {
                name: s.name.clone(),
                parameter,
                predicate,
                disjoint_group: s.group.clone(),
            });
        }
        if !problems.is_empty() {
            return Err(Error::InvalidVocabulary(problems));
        }
        Self::new(space, defs)
    }

    pub fn from_toml(space: &ParameterSpace, text: &str) -> Result<Self> {
        Self::from_specs(space, &VocabularyFile::from_toml(text)?.relations)
    }

    pub fn to_file(&self) -> VocabularyFile {
        VocabularyFile {
            relations: self
                .relations
                .iter()
                .map(|r| RelationSpec {
                    name: r.name.clone(),
                    parameter: self.param_names[r.parameter].clone(),
                    axis: None,
                    kind: r.predicate.kind_name().to_owned(),
                    thresholds: r.predicate.thresholds(),
                    group: r.disjoint_group.clone(),
                })
                .collect(),
        }
    }

    pub fn relations(&self) -> &[RelationDef] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.param_names.len()
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownRelation(name.to_owned()))
    }

    pub fn get(&self, name: &str) -> Result<&RelationDef> {
        Ok(&self.relations[self.index_of(name)?])
    }

    pub fn name(&self, i: usize) -> &str {
        &self.relations[i].name
    }

    /// Parameter index affecting relation `i`.
    pub fn parameter_of(&self, i: usize) -> usize {
        self.relations[i].parameter
    }

    pub fn group_of(&self, i: usize) -> Option<usize> {
        self.group_of[i]
    }

    pub fn group_name(&self, g: usize) -> &str {
        &self.groups[g]
    }

    pub(crate) fn check_dim(&self, x: &ActionParameterization) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Truth vector without dimension checks; `values` must match the space.
    pub(crate) fn truth_of(&self, values: &[f64]) -> Vec<bool> {
        self.relations
            .iter()
            .map(|r| r.predicate.holds(values[r.parameter]))
            .collect()
    }

    pub fn extract(&self, x: &ActionParameterization) -> Result<RelationalState> {
        self.check_dim(x)?;
        Ok(RelationalState {
            truth: self.truth_of(x.values()),
        })
    }

    pub fn names_of(&self, indices: impl IntoIterator<Item = usize>) -> BTreeSet<String> {
        indices
            .into_iter()
            .map(|i| self.relations[i].name.clone())
            .collect()
    }

    pub fn indices_of<'a>(
        &self,
        names: impl IntoIterator<Item = &'a String>,
    ) -> Result<BTreeSet<usize>> {
        names.into_iter().map(|n| self.index_of(n)).collect()
    }

    /// Index-level conflict removal: every relation sharing a disjoint group
    /// with another member of `candidates` is dropped, and violation entries
    /// for parameters no longer referenced by a remaining candidate are
    /// dropped with them.
    pub(crate) fn remove_conflicts_idx(
        &self,
        candidates: &mut BTreeSet<usize>,
        violations: &mut BTreeMap<usize, f64>,
    ) {
        let mut per_group: HashMap<usize, usize> = HashMap::new();
        for &c in candidates.iter() {
            if let Some(g) = self.group_of[c] {
                *per_group.entry(g).or_default() += 1;
            }
        }
        if per_group.values().all(|&n| n < 2) {
            return;
        }
        let removed: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&c| self.group_of[c].is_some_and(|g| per_group[&g] > 1))
            .collect();
        for c in &removed {
            candidates.remove(c);
        }
        for c in removed {
            let p = self.relations[c].parameter;
            if !candidates.iter().any(|&d| self.relations[d].parameter == p) {
                violations.remove(&p);
            }
        }
    }

    /// Removes contradicting relations from a diagnosis candidate set together
    /// with the violation entries that only they justified.
    pub fn remove_conflicts(
        &self,
        candidates: &BTreeSet<String>,
        violations: &BTreeMap<usize, f64>,
    ) -> Result<(BTreeSet<String>, BTreeMap<usize, f64>)> {
        let mut idx = self.indices_of(candidates)?;
        let mut x = violations.clone();
        self.remove_conflicts_idx(&mut idx, &mut x);
        Ok((self.names_of(idx), x))
    }

    /// True iff the relations holding at `x` are exactly the mode's required set.
    pub fn satisfies(
        &self,
        model: &PreconditionModel,
        mode: u32,
        x: &ActionParameterization,
    ) -> Result<bool> {
        let required = model.required_mask(self, mode)?;
        self.check_dim(x)?;
        Ok(self.satisfies_mask(&required, x.values()))
    }

    pub(crate) fn satisfies_mask(&self, required: &[bool], values: &[f64]) -> bool {
        self.relations
            .iter()
            .zip(required)
            .all(|(r, &req)| r.predicate.holds(values[r.parameter]) == req)
    }
}

/// Truth assignment over a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationalState {
    truth: Vec<bool>,
}

impl RelationalState {
    /// Builds a state from an explicit truth vector, rejecting disjointness
    /// violations.
    pub fn new(vocab: &RelationVocabulary, truth: Vec<bool>) -> Result<Self> {
        if truth.len() != vocab.len() {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                actual: truth.len(),
            });
        }
        let mut seen = HashSet::new();
        for (i, &t) in truth.iter().enumerate() {
            if let (true, Some(g)) = (t, vocab.group_of(i)) {
                if !seen.insert(g) {
                    return Err(Error::DisjointViolation(vocab.group_name(g).to_owned()));
                }
            }
        }
        Ok(Self { truth })
    }

    pub fn truth(&self) -> &[bool] {
        &self.truth
    }

    pub fn holds(&self, i: usize) -> bool {
        self.truth[i]
    }

    pub fn true_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.truth
            .iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .map(|(i, _)| i)
    }

    pub fn true_names(&self, vocab: &RelationVocabulary) -> BTreeSet<String> {
        vocab.names_of(self.true_indices())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ParamDef;
    use proptest::prelude::*;

    fn space() -> ParameterSpace {
        ParameterSpace::new(vec![
            ParamDef::new("x", -0.2, 0.2),
            ParamDef::new("y", -0.2, 0.2),
            ParamDef::new("z", -0.2, 0.2),
        ])
        .unwrap()
    }

    /// Centered 3-way groups at ± half-extent plus a reach relation in front
    /// of the bbox face.
    fn centered_vocab(half: [f64; 3], reach: f64) -> RelationVocabulary {
        let mut defs = Vec::new();
        let names = [
            ("behind_x", "aligned_x", "in_front_of_x"),
            ("rightOf_y", "aligned_y", "leftOf_y"),
            ("below_z", "aligned_z", "above_z"),
        ];
        for (axis, (neg, mid, pos)) in names.iter().enumerate() {
            let g = format!("g{axis}");
            let h = half[axis];
            defs.push(RelationDef::new(*neg, axis, Predicate::Below(-h), Some(&g)));
            defs.push(RelationDef::new(
                *mid,
                axis,
                Predicate::Inside(-h, h),
                Some(&g),
            ));
            defs.push(RelationDef::new(*pos, axis, Predicate::Above(h), Some(&g)));
        }
        defs.push(RelationDef::new(
            "far_in_front_of_x",
            0,
            Predicate::Above(half[0] + reach),
            None,
        ));
        RelationVocabulary::new(&space(), defs).unwrap()
    }

    fn x(v: [f64; 3]) -> ActionParameterization {
        ActionParameterization::new(v.to_vec()).unwrap()
    }

    fn truth(vocab: &RelationVocabulary, v: [f64; 3]) -> BTreeSet<String> {
        vocab.extract(&x(v)).unwrap().true_names(vocab)
    }

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn lateral_offset_beyond_half_width() {
        let v = centered_vocab([0.01, 0.02, 0.02], 0.05);
        let t = truth(&v, [0.0, 0.05, 0.0]);
        assert!(t.contains("leftOf_y"));
        assert!(!t.contains("rightOf_y"));
        assert!(!t.contains("aligned_y"));
    }

    #[test]
    fn bbox_center_is_aligned_everywhere() {
        let v = centered_vocab([0.01, 0.02, 0.02], 0.05);
        assert_eq!(
            truth(&v, [0.0, 0.0, 0.0]),
            set(&["aligned_x", "aligned_y", "aligned_z"])
        );
    }

    #[test]
    fn far_in_front_past_reach() {
        // face at 0.01, reach threshold at 0.06; 0.12 lies beyond it
        let v = centered_vocab([0.01, 0.02, 0.02], 0.05);
        let t = truth(&v, [0.12, 0.0, 0.0]);
        assert!(t.contains("far_in_front_of_x"));
        assert!(t.contains("in_front_of_x"));
        assert!(!truth(&v, [0.05, 0.0, 0.0]).contains("far_in_front_of_x"));
    }

    #[test]
    fn extract_rejects_wrong_dimension() {
        let v = centered_vocab([0.01, 0.02, 0.02], 0.05);
        let bad = ActionParameterization::new(vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            v.extract(&bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn conflicting_pair_is_removed_with_its_parameter() {
        let v = centered_vocab([0.01, 0.02, 0.02], 0.05);
        let violations = BTreeMap::from([(2, 0.05)]);
        let (d, x) = v
            .remove_conflicts(&set(&["above_z", "below_z"]), &violations)
            .unwrap();
        assert!(d.is_empty());
        assert!(x.is_empty());
    }

    #[test]
    fn no_conflict_is_unchanged() {
        let v = centered_vocab([0.01, 0.02, 0.02], 0.05);
        let violations = BTreeMap::from([(1, 0.05)]);
        let (d, x) = v
            .remove_conflicts(&set(&["leftOf_y"]), &violations)
            .unwrap();
        assert_eq!(d, set(&["leftOf_y"]));
        assert_eq!(x, violations);
    }

    #[test]
    fn only_the_conflicting_group_is_removed() {
        let v = centered_vocab([0.01, 0.02, 0.02], 0.05);
        let violations = BTreeMap::from([(1, -0.05), (2, 0.05)]);
        let (d, x) = v
            .remove_conflicts(&set(&["above_z", "leftOf_y", "rightOf_y"]), &violations)
            .unwrap();
        assert_eq!(d, set(&["above_z"]));
        assert_eq!(x, BTreeMap::from([(2, 0.05)]));
    }

    #[test]
    fn parameter_kept_while_another_relation_still_references_it() {
        // far_in_front_of_x is ungrouped and survives the x-group conflict
        let v = centered_vocab([0.01, 0.02, 0.02], 0.05);
        let violations = BTreeMap::from([(0, 0.2)]);
        let (d, x) = v
            .remove_conflicts(
                &set(&["behind_x", "in_front_of_x", "far_in_front_of_x"]),
                &violations,
            )
            .unwrap();
        assert_eq!(d, set(&["far_in_front_of_x"]));
        assert_eq!(x, violations);
    }

    #[test]
    fn remove_conflicts_unknown_name() {
        let v = centered_vocab([0.01, 0.02, 0.02], 0.05);
        assert!(matches!(
            v.remove_conflicts(&set(&["nope"]), &BTreeMap::new()),
            Err(Error::UnknownRelation(_))
        ));
    }

    #[test]
    fn validation_reports_missing_parameter() {
        let defs = vec![
            RelationDef::new("a", 0, Predicate::Above(0.0), None),
            RelationDef::new("b", 1, Predicate::Above(0.0), None),
        ];
        assert_eq!(
            validate_vocabulary(&space(), &defs),
            vec!["parameter z has no relation".to_string()]
        );
    }

    #[test]
    fn validation_reports_group_spanning_parameters() {
        let defs = vec![
            RelationDef::new("a", 0, Predicate::Above(0.0), None),
            RelationDef::new("b", 1, Predicate::Above(0.0), Some("g")),
            RelationDef::new("c", 2, Predicate::Below(0.0), Some("g")),
        ];
        assert_eq!(
            validate_vocabulary(&space(), &defs),
            vec!["group g spans multiple parameters".to_string()]
        );
    }

    #[test]
    fn validation_reports_overlap_and_duplicates() {
        let defs = vec![
            RelationDef::new("a", 0, Predicate::Above(0.0), Some("g")),
            RelationDef::new("a", 0, Predicate::Inside(-1.0, 0.0), Some("g")),
            RelationDef::new("b", 1, Predicate::Above(0.0), None),
            RelationDef::new("c", 2, Predicate::Above(0.0), None),
        ];
        let problems = validate_vocabulary(&space(), &defs);
        assert!(problems.contains(&"duplicate relation name a".to_string()));
        // (0, inf) and [-1, 0] touch at 0 but 0 is excluded from the first
        assert!(!problems.iter().any(|p| p.contains("overlapping")));
        let defs = vec![
            RelationDef::new("a", 0, Predicate::Above(0.0), Some("g")),
            RelationDef::new("a2", 0, Predicate::Inside(-1.0, 0.5), Some("g")),
            RelationDef::new("b", 1, Predicate::Above(0.0), None),
            RelationDef::new("c", 2, Predicate::Above(0.0), None),
        ];
        assert_eq!(
            validate_vocabulary(&space(), &defs),
            vec!["group g has overlapping relations a and a2".to_string()]
        );
    }

    #[test]
    fn centered_vocab_is_valid() {
        let v = centered_vocab([0.01, 0.09, 0.02], 0.05);
        assert!(validate_vocabulary(&space(), v.relations()).is_empty());
    }

    #[test]
    fn state_construction_rejects_group_violation() {
        let v = centered_vocab([0.01, 0.02, 0.02], 0.05);
        let mut t = vec![false; v.len()];
        t[v.index_of("above_z").unwrap()] = true;
        t[v.index_of("below_z").unwrap()] = true;
        assert!(matches!(
            RelationalState::new(&v, t),
            Err(Error::DisjointViolation(_))
        ));
    }

    #[test]
    fn satisfies_cases() {
        let v = centered_vocab([0.01, 0.02, 0.02], 0.05);
        let r = PreconditionModel::single(set(&["aligned_x", "aligned_y", "aligned_z"]));
        assert!(v.satisfies(&r, 1, &x([0.0, 0.0, 0.0])).unwrap());
        assert!(!v.satisfies(&r, 1, &x([0.0, 0.03, 0.0])).unwrap());
        let r2 = PreconditionModel::single(set(&["in_front_of_x", "aligned_y", "aligned_z"]));
        assert!(v.satisfies(&r2, 1, &x([0.03, 0.0, 0.0])).unwrap());
        // far_in_front_of_x holds but is not required
        assert!(!v.satisfies(&r2, 1, &x([0.12, 0.0, 0.0])).unwrap());
        assert!(matches!(
            v.satisfies(&r2, 7, &x([0.0, 0.0, 0.0])),
            Err(Error::UnknownMode(7))
        ));
    }

    #[test]
    fn toml_round_trip() {
        let v = centered_vocab([0.01, 0.09, 0.02], 0.05);
        let text = v.to_file().to_toml();
        assert_eq!(RelationVocabulary::from_toml(&space(), &text).unwrap(), v);
    }

    #[test]
    fn spec_rejects_axis_mismatch_and_bad_arity() {
        let specs = vec![RelationSpec {
            name: "a".into(),
            parameter: "x".into(),
            axis: Some("y".into()),
            kind: "inside".into(),
            thresholds: vec![0.1],
            group: None,
        }];
        let Err(Error::InvalidVocabulary(p)) = RelationVocabulary::from_specs(&space(), &specs)
        else {
            panic!("expected invalid vocabulary");
        };
        assert_eq!(p.len(), 2);
    }

    fn random_candidates() -> impl Strategy<Value = BTreeSet<usize>> {
        proptest::collection::btree_set(0usize..10, 0..10)
    }

    proptest! {
        #[test]
        fn extraction_respects_disjoint_groups(v in proptest::array::uniform3(-0.3f64..0.3)) {
            let vocab = centered_vocab([0.01, 0.09, 0.02], 0.05);
            let state = vocab.extract(&x(v)).unwrap();
            prop_assert!(RelationalState::new(&vocab, state.truth().to_vec()).is_ok());
            prop_assert_eq!(vocab.extract(&x(v)).unwrap(), state);
        }

        #[test]
        fn conflict_removal_is_sound_and_idempotent(c in random_candidates(), vals in proptest::array::uniform3(-0.3f64..0.3)) {
            let vocab = centered_vocab([0.01, 0.09, 0.02], 0.05);
            let names = vocab.names_of(c.iter().copied());
            let violations: BTreeMap<usize, f64> =
                c.iter().map(|&i| (vocab.parameter_of(i), vals[vocab.parameter_of(i)])).collect();
            let (d, xv) = vocab.remove_conflicts(&names, &violations).unwrap();
            let idx = vocab.indices_of(&d).unwrap();
            let groups: Vec<usize> = idx.iter().filter_map(|&i| vocab.group_of(i)).collect();
            let unique: BTreeSet<usize> = groups.iter().copied().collect();
            prop_assert_eq!(groups.len(), unique.len());
            for p in xv.keys() {
                prop_assert!(idx.iter().any(|&i| vocab.parameter_of(i) == *p));
            }
            let again = vocab.remove_conflicts(&d, &xv).unwrap();
            prop_assert_eq!(again, (d, xv));
        }
    }
}
