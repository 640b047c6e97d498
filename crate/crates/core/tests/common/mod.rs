#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use faildiag_core::{
    learn_preconditions, ActionParameterization, ExecutionModel, Experience, GpHyperparams,
    HandleScene, ParamDef, ParameterSpace, PreconditionModel, Predicate, RelationDef,
    RelationVocabulary, SuccessModel,
};

pub fn p(v: &[f64]) -> ActionParameterization {
    ActionParameterization::new(v.to_vec()).unwrap()
}

pub fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn cube_space(half: f64) -> ParameterSpace {
    ParameterSpace::new(vec![
        ParamDef::new("x", -half, half),
        ParamDef::new("y", -half, half),
        ParamDef::new("z", -half, half),
    ])
    .unwrap()
}

/// Bbox centred at the origin with half extents (0.01, 0.02, 0.02); reach
/// ends 0.05 in front of the x face.
pub fn centered_vocab(space: &ParameterSpace) -> RelationVocabulary {
    let half = [0.01, 0.02, 0.02];
    let names = [
        ("behind_x", "aligned_x", "in_front_of_x"),
        ("rightOf_y", "aligned_y", "leftOf_y"),
        ("below_z", "aligned_z", "above_z"),
    ];
    let mut defs = Vec::new();
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
        Predicate::Above(0.06),
        None,
    ));
    RelationVocabulary::new(space, defs).unwrap()
}

pub fn centered_model() -> ExecutionModel {
    let space = cube_space(0.2);
    let vocab = centered_vocab(&space);
    let pre = PreconditionModel::new(
        &vocab,
        BTreeMap::from([(1, set(&["aligned_x", "aligned_y", "aligned_z"]))]),
    )
    .unwrap();
    let success = SuccessModel::fit_points(
        vec![
            p(&[0.0, 0.0, 0.0]),
            p(&[0.1, 0.0, 0.0]),
            p(&[0.0, 0.1, 0.0]),
        ],
        vec![1.0, 0.0, 0.0],
        GpHyperparams::from_half_extents(&[0.05, 0.05, 0.05]),
    )
    .unwrap();
    ExecutionModel::new(space, vocab, pre, success).unwrap()
}

/// Reference model for the default grasp scene: preconditions from noise-free
/// demonstrations, success model from a noisy campaign.
pub fn grasp_model(seed: u64) -> (HandleScene, ExecutionModel, Vec<Experience>) {
    let scene = HandleScene::default();
    let space = scene.default_space();
    let vocab = scene.grasp_vocabulary(&space).unwrap();
    let mut rng = faildiag_core::RngHandle::new(seed);
    let demos: Vec<Experience> = scene
        .demonstrations(&space, 400, &mut rng.fork(0))
        .unwrap()
        .into_iter()
        .filter(Experience::is_success)
        .collect();
    let pre = learn_preconditions(&vocab, &demos, 0.95).unwrap();
    let campaign = scene.random_campaign(&space, 100, &mut rng).unwrap();
    let hyper = GpHyperparams::from_half_extents(&scene.bbox_half_extents);
    let success = SuccessModel::fit(&campaign, hyper).unwrap();
    let model = ExecutionModel::new(space, vocab, pre, success).unwrap();
    (scene, model, campaign)
}

/// Centre of the default scene's success region.
pub fn grasp_center(scene: &HandleScene) -> f64 {
    scene.front_face() + 0.5 * (scene.reach_band[0] + scene.reach_band[1])
}

pub fn anchor(scene: &HandleScene) -> Vec<f64> {
    scene.bbox_half_extents.iter().map(|h| 0.2 * h).collect()
}
