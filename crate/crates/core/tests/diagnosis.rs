mod common;

use common::*;
use faildiag_core::{
    diagnose_once, diagnose_stable, score_diagnosis, DiagnosisConfig, RngHandle, RunOutcome, Score,
};
use proptest::prelude::*;

fn cfg(std: Vec<f64>) -> DiagnosisConfig {
    DiagnosisConfig::baseline(std)
}

#[test]
fn too_far_failure_is_diagnosed_along_x() {
    let model = centered_model();
    let x = p(&[0.12, 0.0, 0.0]);
    let d = diagnose_stable(
        &model,
        1,
        &x,
        &cfg(vec![0.002, 0.004, 0.004]),
        &mut RngHandle::new(1),
    )
    .unwrap();
    assert!(
        d.candidates.contains("far_in_front_of_x"),
        "{:?}",
        d.candidates
    );
    assert!(d.falsifying[0] > 0.06);
    assert_eq!(d.falsifying[1], 0.0);
    assert_eq!(d.falsifying[2], 0.0);
}

#[test]
fn unreachable_violation_reports_exhaustion() {
    let (scene, model, _) = grasp_model(1);
    let x = p(&[grasp_center(&scene), 0.0, 0.0]);
    let mut c = cfg(vec![1e-5; 3]);
    c.max_expansions = 1;
    let out = diagnose_once(&model, 1, &x, &c, &mut RngHandle::new(9)).unwrap();
    match out {
        RunOutcome::Exhausted {
            expansions,
            final_std,
        } => {
            assert_eq!(expansions, 1);
            assert!((final_std[0] - 1e-5 * 1.05).abs() < 1e-18);
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }
    c.runs = 5;
    let d = diagnose_stable(&model, 1, &x, &c, &mut RngHandle::new(9)).unwrap();
    assert!(d.is_empty());
    assert_eq!(d.exhausted_runs, 5);
    assert_eq!(d.falsifying, x);
}

#[test]
fn lateral_offset_only_moves_y() {
    let (scene, model, _) = grasp_model(1);
    let x = p(&[grasp_center(&scene), 0.07, 0.0]);
    let d = diagnose_stable(&model, 1, &x, &cfg(anchor(&scene)), &mut RngHandle::new(2)).unwrap();
    assert_eq!(d.candidates, set(&["leftOf_y"]));
    assert_eq!(d.falsifying[0], x[0]);
    assert_eq!(d.falsifying[2], x[2]);
    assert!(d.falsifying[1] > scene.grasp_tolerance[0]);

    let x = p(&[grasp_center(&scene), -0.07, 0.0]);
    let d = diagnose_stable(&model, 1, &x, &cfg(anchor(&scene)), &mut RngHandle::new(2)).unwrap();
    assert_eq!(d.candidates, set(&["rightOf_y"]));
}

#[test]
fn single_run_keeps_everything_it_found() {
    let (scene, model, _) = grasp_model(1);
    let x = p(&[grasp_center(&scene) + 0.03, 0.05, -0.03]);
    let mut c = cfg(anchor(&scene));
    c.runs = 1;
    let rng = RngHandle::new(77);
    let stable = diagnose_stable(&model, 1, &x, &c, &mut rng.clone()).unwrap();
    let once = diagnose_once(&model, 1, &x, &c, &mut rng.fork(0)).unwrap();
    let run = once.found().expect("violations present");
    assert_eq!(
        stable.candidates,
        model.vocab.names_of(run.candidates.iter().copied())
    );
    assert_eq!(stable.falsifying, run.falsifying);
}

#[test]
fn diagnosis_is_deterministic() {
    let (scene, model, _) = grasp_model(3);
    let x = p(&[grasp_center(&scene) + 0.02, -0.05, 0.02]);
    let c = cfg(anchor(&scene));
    let a = diagnose_stable(&model, 1, &x, &c, &mut RngHandle::new(8)).unwrap();
    let b = diagnose_stable(&model, 1, &x, &c, &mut RngHandle::new(8)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn invalid_config_is_rejected() {
    let (scene, model, _) = grasp_model(1);
    let x = p(&[grasp_center(&scene), 0.0, 0.0]);
    let mut c = cfg(vec![0.01, 0.01]);
    assert!(diagnose_once(&model, 1, &x, &c, &mut RngHandle::new(0)).is_err());
    c.initial_std = vec![0.01, 0.0, 0.01];
    assert!(diagnose_once(&model, 1, &x, &c, &mut RngHandle::new(0)).is_err());
    c.initial_std = vec![0.01; 3];
    c.samples_per_region = 0;
    assert!(diagnose_once(&model, 1, &x, &c, &mut RngHandle::new(0)).is_err());
}

#[test]
fn score_examples() {
    let s = |tp, fp, fn_| Score {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    };
    let far = set(&["far_in_front_of_x"]);
    assert_eq!(score_diagnosis(&far, &far), s(1, 0, 0));
    assert_eq!(
        score_diagnosis(&set(&["above_z", "far_in_front_of_x"]), &far),
        s(1, 1, 0)
    );
    assert_eq!(score_diagnosis(&set(&[]), &set(&["below_z"])), s(0, 0, 1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_run_invariants(
        seed in any::<u64>(),
        fx in 0.0f64..1.0, fy in 0.0f64..1.0, fz in 0.0f64..1.0,
        k in 1usize..40,
        r in 0.01f64..1.0,
    ) {
        let (scene, model, _) = grasp_model(5);
        let b = model.space.params();
        let x = p(&[
            b[0].lower + fx * (b[0].upper - b[0].lower),
            b[1].lower + fy * (b[1].upper - b[1].lower),
            b[2].lower + fz * (b[2].upper - b[2].lower),
        ]);
        let mut c = cfg(anchor(&scene));
        c.samples_per_region = k;
        c.expansion_ratio = r;
        let out = diagnose_once(&model, 1, &x, &c, &mut RngHandle::new(seed)).unwrap();
        let i = out.expansions();
        for (s, s0) in out.final_std().iter().zip(&c.initial_std) {
            let expected = s0 * (1.0 + r).powi(i as i32);
            prop_assert!(((s - expected) / expected).abs() < 1e-12);
        }
        let required = model.preconditions.required(1).unwrap();
        if let Some(run) = out.found() {
            let truth = model.vocab.extract(&run.falsifying).unwrap();
            let mut groups = std::collections::BTreeSet::new();
            for &cand in &run.candidates {
                prop_assert!(!required.contains(model.vocab.name(cand)));
                prop_assert!(truth.holds(cand));
                if let Some(g) = model.vocab.group_of(cand) {
                    prop_assert!(groups.insert(g), "two candidates share a disjoint group");
                }
            }
            let touched: std::collections::BTreeSet<usize> =
                run.candidates.iter().map(|&c| model.vocab.parameter_of(c)).collect();
            prop_assert_eq!(touched.iter().copied().collect::<Vec<_>>(), run.violations.keys().copied().collect::<Vec<_>>());
            for j in 0..x.len() {
                if !touched.contains(&j) {
                    prop_assert_eq!(run.falsifying[j], x[j]);
                }
            }
        } else {
            prop_assert_eq!(i, c.max_expansions);
        }
    }

    #[test]
    fn stable_diagnosis_invariants(seed in any::<u64>(), fy in -1.0f64..1.0, fz in -1.0f64..1.0, dx in -0.06f64..0.1) {
        let (scene, model, _) = grasp_model(5);
        let x = p(&[grasp_center(&scene) + dx, fy * 0.11, fz * 0.04]);
        let mut c = cfg(anchor(&scene));
        c.runs = 10;
        c.samples_per_region = 30;
        let d = diagnose_stable(&model, 1, &x, &c, &mut RngHandle::new(seed)).unwrap();
        let required = model.preconditions.required(1).unwrap();
        let truth = model.vocab.extract(&d.falsifying).unwrap().true_names(&model.vocab);
        for name in &d.candidates {
            prop_assert!(!required.contains(name));
            prop_assert!(truth.contains(name));
            prop_assert!(d.frequencies[name] > c.acceptance);
        }
        let params: Vec<usize> = d
            .candidates
            .iter()
            .map(|n| model.vocab.parameter_of(model.vocab.index_of(n).unwrap()))
            .collect();
        let unique: std::collections::BTreeSet<_> = params.iter().collect();
        prop_assert_eq!(unique.len(), params.len());
        for j in 0..3 {
            if !params.contains(&j) {
                prop_assert_eq!(d.falsifying[j], x[j]);
            }
        }
    }
}
