#[path = "common/oracle.rs"]
mod oracle;

use faildiag_core::{ActionParameterization, GpHyperparams, SuccessModel};

fn fit(case: &oracle::GpCase) -> SuccessModel {
    let hyper = GpHyperparams {
        length_scales: case.length_scales.clone(),
        signal_variance: case.signal_variance,
        noise_variance: case.noise_variance,
    };
    let inputs = case
        .inputs
        .iter()
        .map(|v| ActionParameterization::new(v.clone()).unwrap())
        .collect();
    SuccessModel::fit_points(inputs, case.targets.clone(), hyper).unwrap()
}

#[test]
fn posterior_mean_matches_direct_solve() {
    let mut worst = 0.0f64;
    for case in oracle::corpus() {
        let model = fit(&case);
        for q in &case.queries {
            let got = model
                .posterior_mean(&ActionParameterization::new(q.clone()).unwrap())
                .unwrap();
            worst = worst.max((got - oracle::posterior_mean(&case, q)).abs());
        }
    }
    assert!(worst < 1e-8, "max deviation {worst}");
}

#[test]
fn elimination_solves_a_known_system() {
    let x = oracle::solve(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]);
    assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
}
