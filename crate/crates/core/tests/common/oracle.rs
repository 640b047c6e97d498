//! Independent reference computations: a direct small-matrix GP solve and a
//! smoothed-histogram mode estimate.

#![allow(dead_code)]

use faildiag_core::RngHandle;

pub struct GpCase {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub length_scales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
    pub queries: Vec<Vec<f64>>,
}

fn se(a: &[f64], b: &[f64], ls: &[f64], sf2: f64) -> f64 {
    let mut d2 = 0.0;
    for i in 0..a.len() {
        let d = (a[i] - b[i]) / ls[i];
        d2 += d * d;
    }
    sf2 * (-0.5 * d2).exp()
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

pub fn posterior_mean(case: &GpCase, q: &[f64]) -> f64 {
    let n = case.inputs.len();
    let gram = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let k = se(
                        &case.inputs[i],
                        &case.inputs[j],
                        &case.length_scales,
                        case.signal_variance,
                    );
                    if i == j {
                        k + case.noise_variance
                    } else {
                        k
                    }
                })
                .collect()
        })
        .collect();
    let alpha = solve(gram, case.targets.clone());
    (0..n)
        .map(|i| {
            alpha[i]
                * se(
                    &case.inputs[i],
                    q,
                    &case.length_scales,
                    case.signal_variance,
                )
        })
        .sum()
}

/// Seeded corpus of 1..=5 point training sets in 3 dimensions, including
/// duplicated inputs and conflicting labels.
pub fn corpus() -> Vec<GpCase> {
    let mut rng = RngHandle::new(0x6f7261636c65);
    let mut out = Vec::new();
    for case in 0..300 {
        let n = 1 + case % 5;
        let mut inputs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.uniform(-0.1, 0.1)).collect())
            .collect();
        if n > 1 && case % 7 == 0 {
            inputs[n - 1] = inputs[0].clone();
        }
        let targets = (0..n)
            .map(|_| if rng.unit() < 0.5 { 0.0 } else { 1.0 })
            .collect();
        let length_scales = (0..3).map(|_| rng.uniform(0.005, 0.1)).collect();
        let signal_variance = [1.0, 0.5, 2.0][case % 3];
        let noise_variance = [0.01, 0.001, 0.1][(case / 3) % 3];
        let mut queries: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..3).map(|_| rng.uniform(-0.12, 0.12)).collect())
            .collect();
        queries.extend(inputs.iter().cloned());
        out.push(GpCase {
            inputs,
            targets,
            length_scales,
            signal_variance,
            noise_variance,
            queries,
        });
    }
    out
}

/// Mode of a sample: fine histogram smoothed with a Gaussian kernel.
pub fn smoothed_mode(values: &[f64], bin: f64, bandwidth: f64) -> f64 {
    let max = values.iter().cloned().fold(0.0, f64::max);
    let bins = (max / bin).ceil() as usize + 1;
    let mut counts = vec![0.0; bins];
    for v in values {
        counts[(v / bin) as usize] += 1.0;
    }
    let reach = (4.0 * bandwidth / bin).ceil() as isize;
    let mut best = (0, f64::MIN);
    for i in 0..bins as isize {
        let mut density = 0.0;
        for j in (i - reach).max(0)..(i + reach + 1).min(bins as isize) {
            let d = (j - i) as f64 * bin / bandwidth;
            density += counts[j as usize] * (-0.5 * d * d).exp();
        }
        if density > best.1 {
            best = (i as usize, density);
        }
    }
    (best.0 as f64 + 0.5) * bin
}
