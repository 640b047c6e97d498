//! Deterministic handle-grasp world.
//!
//! Parameters are the end-effector offset from the handle bounding-box
//! center: `x` along the approach axis (positive toward the robot), `y`
//! lateral (positive is robot-left), `z` vertical. The bbox front face sits
//! at `x = half_extents[0]`. A grasp succeeds iff the front offset lies in
//! the reach band and the lateral/vertical offsets are within tolerance.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relations::{Predicate, RelationDef, RelationVocabulary};
use crate::rng::RngHandle;
use crate::space::{ActionParameterization, Experience, ParamDef, ParameterSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cause {
    TooFar,
    CollisionWithDrawer,
    TooLeft,
    TooRight,
    TooHigh,
    TooLow,
}

impl Cause {
    pub const ALL: [Cause; 6] = [
        Cause::TooFar,
        Cause::CollisionWithDrawer,
        Cause::TooLeft,
        Cause::TooRight,
        Cause::TooHigh,
        Cause::TooLow,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Cause::TooFar => "too_far",
            Cause::CollisionWithDrawer => "collision_with_drawer",
            Cause::TooLeft => "too_left",
            Cause::TooRight => "too_right",
            Cause::TooHigh => "too_high",
            Cause::TooLow => "too_low",
        }
    }

    /// Vocabulary relation describing this cause.
    pub fn relation(self) -> &'static str {
        match self {
            Cause::TooFar => "far_in_front_of_x",
            Cause::CollisionWithDrawer => "near_front_of_x",
            Cause::TooLeft => "leftOf_y",
            Cause::TooRight => "rightOf_y",
            Cause::TooHigh => "above_z",
            Cause::TooLow => "below_z",
        }
    }
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Cause {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Cause::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCause(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraspOutcome {
    pub success: bool,
    pub causes: BTreeSet<Cause>,
}

impl GraspOutcome {
    pub fn cause_names(&self) -> BTreeSet<String> {
        self.causes.iter().map(|c| c.as_str().to_owned()).collect()
    }
}

/// Ground-truth relations for a set of cause identifiers.
pub fn causes_to_relations<'a>(
    causes: impl IntoIterator<Item = &'a str>,
) -> Result<BTreeSet<String>> {
    causes
        .into_iter()
        .map(|c| Ok(c.parse::<Cause>()?.relation().to_owned()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandleScene {
    /// Handle bounding-box half extents (x, y, z).
    pub bbox_half_extents: [f64; 3],
    /// Largest lateral and vertical offsets (y, z) that still grasp.
    pub grasp_tolerance: [f64; 2],
    /// Graspable front offsets, measured from the bbox face. Offsets below
    /// the lower end collide with the drawer.
    pub reach_band: [f64; 2],
    /// Front offsets, from the bbox face, covered by the random campaign.
    #[serde(default = "default_campaign_front")]
    pub campaign_front_range: [f64; 2],
    /// Standard deviation of the handle pose estimate error per axis.
    #[serde(default = "default_pose_noise")]
    pub pose_noise: [f64; 3],
}

fn default_campaign_front() -> [f64; 2] {
    [0.05, 0.15]
}

fn default_pose_noise() -> [f64; 3] {
    [0.001, 0.009, 0.002]
}

impl Default for HandleScene {
    fn default() -> Self {
        Self {
            bbox_half_extents: [0.01, 0.09, 0.02],
            grasp_tolerance: [0.04, 0.015],
            reach_band: [0.055, 0.08],
            campaign_front_range: default_campaign_front(),
            pose_noise: default_pose_noise(),
        }
    }
}

impl HandleScene {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("scene: {msg}")));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !self.bbox_half_extents.iter().all(|&v| pos(v)) {
            return bad("bbox half extents must be positive");
        }
        if !self.grasp_tolerance.iter().all(|&v| pos(v)) {
            return bad("grasp tolerance must be positive");
        }
        let [lo, hi] = self.reach_band;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return bad("reach band must satisfy 0 <= min < max");
        }
        let [clo, chi] = self.campaign_front_range;
        if !(clo.is_finite() && chi.is_finite() && clo < chi) {
            return bad("campaign front range must be increasing");
        }
        if !self.pose_noise.iter().all(|&v| v.is_finite() && v >= 0.0) {
            return bad("pose noise must be non-negative");
        }
        Ok(())
    }

    pub fn front_face(&self) -> f64 {
        self.bbox_half_extents[0]
    }

    pub fn bbox_full_extents(&self) -> [f64; 3] {
        self.bbox_half_extents.map(|h| 2.0 * h)
    }

    /// Ground-truth outcome of a grasp at `x` relative to the true handle pose.
    pub fn simulate_grasp(&self, x: &ActionParameterization) -> GraspOutcome {
        let mut causes = BTreeSet::new();
        let front = x[0] - self.front_face();
        if front > self.reach_band[1] {
            causes.insert(Cause::TooFar);
        }
        if front < self.reach_band[0] {
            causes.insert(Cause::CollisionWithDrawer);
        }
        let [ty, tz] = self.grasp_tolerance;
        if x[1] > ty {
            causes.insert(Cause::TooLeft);
        }
        if x[1] < -ty {
            causes.insert(Cause::TooRight);
        }
        if x[2] > tz {
            causes.insert(Cause::TooHigh);
        }
        if x[2] < -tz {
            causes.insert(Cause::TooLow);
        }
        GraspOutcome {
            success: causes.is_empty(),
            causes,
        }
    }

    /// Executes a grasp commanded at `x` relative to the *estimated* handle
    /// pose. With non-zero pose noise the estimate is off by a Gaussian error,
    /// so the outcome is that of the shifted parameterisation.
    pub fn execute(&self, x: &ActionParameterization, rng: &mut RngHandle) -> GraspOutcome {
        if self.pose_noise.iter().all(|&s| s == 0.0) {
            return self.simulate_grasp(x);
        }
        let actual: Vec<f64> = x
            .values()
            .iter()
            .zip(&self.pose_noise)
            .map(|(&v, &s)| if s > 0.0 { rng.normal(v, s) } else { v })
            .collect();
        self.simulate_grasp(&ActionParameterization::new(actual).expect("finite"))
    }

    /// Random execution campaign: lateral and vertical offsets uniform within
    /// the bbox, front offsets uniform in the campaign range.
    pub fn random_campaign(
        &self,
        space: &ParameterSpace,
        count: usize,
        rng: &mut RngHandle,
    ) -> Result<Vec<Experience>> {
        self.sample_executions(space, count, true, rng)
    }

    /// Same distribution as [`HandleScene::random_campaign`], executed against
    /// the true handle pose (no estimation error).
    pub fn demonstrations(
        &self,
        space: &ParameterSpace,
        count: usize,
        rng: &mut RngHandle,
    ) -> Result<Vec<Experience>> {
        self.sample_executions(space, count, false, rng)
    }

    fn sample_executions(
        &self,
        space: &ParameterSpace,
        count: usize,
        noisy: bool,
        rng: &mut RngHandle,
    ) -> Result<Vec<Experience>> {
        self.validate()?;
        if count == 0 {
            return Err(Error::Empty("campaign count"));
        }
        if space.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                actual: space.dim(),
            });
        }
        let [_, hy, hz] = self.bbox_half_extents;
        let face = self.front_face();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let x = rng.uniform(
                face + self.campaign_front_range[0],
                face + self.campaign_front_range[1],
            );
            let y = rng.uniform(-hy, hy);
            let z = rng.uniform(-hz, hz);
            let params = ActionParameterization::new(vec![x, y, z])?;
            let outcome = if noisy {
                self.execute(&params, rng)
            } else {
                self.simulate_grasp(&params)
            };
            out.push(
                Experience::observed(params, outcome.success).with_causes(outcome.cause_names()),
            );
        }
        Ok(out)
    }

    /// Default parameter bounds enclosing the handle and the campaign region.
    pub fn default_space(&self) -> ParameterSpace {
        let [hx, hy, hz] = self.bbox_half_extents;
        ParameterSpace::new(vec![
            ParamDef::new("x", 0.0, hx + self.campaign_front_range[1] + 0.05),
            ParamDef::new("y", -(hy + 0.03), hy + 0.03),
            ParamDef::new("z", -(hz + 0.02), hz + 0.02),
        ])
        .expect("validated scene yields a valid space")
    }

    /// Relations whose thresholds coincide with this scene's success region:
    /// one exhaustive disjoint group per axis.
    pub fn grasp_relations(&self) -> Vec<RelationDef> {
        let face = self.front_face();
        let [lo, hi] = self.reach_band;
        let [ty, tz] = self.grasp_tolerance;
        let g = Some;
        vec![
            RelationDef::new(
                "near_front_of_x",
                0,
                Predicate::Below(face + lo),
                g("reach_x"),
            ),
            RelationDef::new(
                "in_front_of_x",
                0,
                Predicate::Inside(face + lo, face + hi),
                g("reach_x"),
            ),
            RelationDef::new(
                "far_in_front_of_x",
                0,
                Predicate::Above(face + hi),
                g("reach_x"),
            ),
            RelationDef::new("rightOf_y", 1, Predicate::Below(-ty), g("lateral_y")),
            RelationDef::new("aligned_y", 1, Predicate::Inside(-ty, ty), g("lateral_y")),
            RelationDef::new("leftOf_y", 1, Predicate::Above(ty), g("lateral_y")),
            RelationDef::new("below_z", 2, Predicate::Below(-tz), g("vertical_z")),
            RelationDef::new("aligned_z", 2, Predicate::Inside(-tz, tz), g("vertical_z")),
            RelationDef::new("above_z", 2, Predicate::Above(tz), g("vertical_z")),
        ]
    }

    pub fn grasp_vocabulary(&self, space: &ParameterSpace) -> Result<RelationVocabulary> {
        RelationVocabulary::new(space, self.grasp_relations())
    }

    /// Checks that every cause relation in `vocab` uses this scene's
    /// thresholds, so ground-truth labels and extracted relations agree.
    pub fn check_alignment(&self, vocab: &RelationVocabulary) -> Result<()> {
        let expected = self.grasp_relations();
        let mut problems = Vec::new();
        for cause in Cause::ALL {
            let want = expected
                .iter()
                .find(|r| r.name == cause.relation())
                .expect("cause relation");
            match vocab.get(cause.relation()) {
                Ok(have)
                    if have.parameter == want.parameter && have.predicate == want.predicate => {}
                Ok(_) => problems.push(format!(
                    "relation {} disagrees with the scene thresholds",
                    want.name
                )),
                Err(_) => problems.push(format!("relation {} missing", want.name)),
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidVocabulary(problems))
        }
    }
}
