//! Gaussian-process success model.
//!
//! Zero prior mean, squared-exponential kernel with per-axis length scales,
//! targets used raw. Predictions are the posterior mean clamped to [0, 1],
//! so parameterisations far from any experience revert to 0.

use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{ActionParameterization, Experience};

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpHyperparams {
    pub length_scales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl GpHyperparams {
    /// Length scales set to the given per-axis half-extents, unit signal
    /// variance and noise variance 0.01.
    pub fn from_half_extents(half_extents: &[f64]) -> Self {
        Self {
            length_scales: half_extents.to_vec(),
            signal_variance: 1.0,
            noise_variance: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.length_scales.is_empty() || !self.length_scales.iter().all(|&l| positive(l)) {
            return Err(Error::InvalidConfig(
                "length scales must be positive".into(),
            ));
        }
        if !positive(self.signal_variance) || !positive(self.noise_variance) {
            return Err(Error::InvalidConfig(
                "signal and noise variance must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Squared-exponential covariance.
    pub fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a
            .iter()
            .zip(b)
            .zip(&self.length_scales)
            .map(|((x, y), l)| {
                let d = (x - y) / l;
                d * d
            })
            .sum();
        self.signal_variance * (-0.5 * r2).exp()
    }
}

#[derive(Debug, Clone)]
pub struct SuccessModel {
    inputs: Vec<ActionParameterization>,
    targets: Vec<f64>,
    hyper: GpHyperparams,
    alpha: DVector<f64>,
    jitter: f64,
}

impl SuccessModel {
    pub fn fit(experiences: &[Experience], hyper: GpHyperparams) -> Result<Self> {
        let inputs = experiences.iter().map(|e| e.params.clone()).collect();
        let targets = experiences.iter().map(|e| e.label).collect();
        Self::fit_points(inputs, targets, hyper)
    }

    pub fn fit_points(
        inputs: Vec<ActionParameterization>,
        targets: Vec<f64>,
        hyper: GpHyperparams,
    ) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::Empty("success model training set"));
        }
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.len(),
                actual: targets.len(),
            });
        }
        hyper.validate()?;
        let dim = hyper.length_scales.len();
        if let Some(bad) = inputs.iter().find(|x| x.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        if let Some(&t) = targets.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::InvalidLabel(t));
        }

        let n = inputs.len();
        let gram = DMatrix::from_fn(n, n, |i, j| {
            let k = hyper.kernel(inputs[i].values(), inputs[j].values());
            if i == j {
                k + hyper.noise_variance
            } else {
                k
            }
        });
        let (chol, jitter) = factorize(gram)?;
        let alpha = chol.solve(&DVector::from_column_slice(&targets));
        Ok(Self {
            inputs,
            targets,
            hyper,
            alpha,
            jitter,
        })
    }

    /// New model trained only on `failed` (label 0) and `corrected` (label 1),
    /// keeping this model's hyperparameters.
    pub fn refit_with_synthetic(
        &self,
        failed: &[ActionParameterization],
        corrected: &[ActionParameterization],
    ) -> Result<Self> {
        if corrected.is_empty() {
            return Err(Error::Empty("corrected experiences"));
        }
        let inputs: Vec<_> = failed.iter().chain(corrected).cloned().collect();
        let targets = std::iter::repeat_n(0.0, failed.len())
            .chain(std::iter::repeat_n(1.0, corrected.len()))
            .collect();
        Self::fit_points(inputs, targets, self.hyper.clone())
    }

    pub fn hyper(&self) -> &GpHyperparams {
        &self.hyper
    }

    pub fn inputs(&self) -> &[ActionParameterization] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.hyper.length_scales.len()
    }

    /// Diagonal jitter that was needed on top of the noise variance.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub(crate) fn mean_of(&self, values: &[f64]) -> f64 {
        self.inputs
            .iter()
            .zip(self.alpha.iter())
            .map(|(xi, a)| a * self.hyper.kernel(xi.values(), values))
            .sum()
    }

    /// Unclamped posterior mean.
    pub fn posterior_mean(&self, x: &ActionParameterization) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.mean_of(x.values()))
    }

    /// Predicted success likelihood in [0, 1].
    pub fn predict(&self, x: &ActionParameterization) -> Result<f64> {
        Ok(self.posterior_mean(x)?.clamp(0.0, 1.0))
    }

    pub(crate) fn predict_values(&self, values: &[f64]) -> f64 {
        self.mean_of(values).clamp(0.0, 1.0)
    }

    fn check_dim(&self, x: &ActionParameterization) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Plain-text dump: a header of `key value...` lines followed by one
    /// whitespace-separated row per training point (coordinates, then target).
    pub fn dump(&self) -> String {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        writeln!(out, "# faildiag success model v1").unwrap();
        writeln!(out, "dim {}", self.dim()).unwrap();
        writeln!(out, "points {}", self.len()).unwrap();
        writeln!(out, "length_scales {}", join(&self.hyper.length_scales)).unwrap();
        writeln!(out, "signal_variance {}", self.hyper.signal_variance).unwrap();
        writeln!(out, "noise_variance {}", self.hyper.noise_variance).unwrap();
        for (x, t) in self.inputs.iter().zip(&self.targets) {
            writeln!(out, "{} {}", join(x.values()), t).unwrap();
        }
        out
    }

    /// Parses [`SuccessModel::dump`] output and refits.
    pub fn load(text: &str) -> Result<Self> {
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
        };
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut header = |key: &str| -> Result<Vec<String>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing {key}")))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(Error::Parse(format!("expected {key}, found {line:?}")));
            }
            Ok(parts.map(str::to_owned).collect())
        };
        let single = |v: Vec<String>, key: &str| -> Result<String> {
            match v.as_slice() {
                [s] => Ok(s.clone()),
                _ => Err(Error::Parse(format!("{key} takes one value"))),
            }
        };
        let dim: usize = single(header("dim")?, "dim")?
            .parse()
            .map_err(|_| Error::Parse("bad dim".into()))?;
        let points: usize = single(header("points")?, "points")?
            .parse()
            .map_err(|_| Error::Parse("bad point count".into()))?;
        let length_scales = header("length_scales")?
            .iter()
            .map(|s| parse(s))
            .collect::<Result<Vec<_>>>()?;
        let signal_variance = parse(&single(header("signal_variance")?, "signal_variance")?)?;
        let noise_variance = parse(&single(header("noise_variance")?, "noise_variance")?)?;
        if length_scales.len() != dim {
            return Err(Error::Parse("length_scales does not match dim".into()));
        }
        let mut inputs = Vec::with_capacity(points);
        let mut targets = Vec::with_capacity(points);
        for line in lines {
            let row = line
                .split_whitespace()
                .map(parse)
                .collect::<Result<Vec<_>>>()?;
            if row.len() != dim + 1 {
                return Err(Error::Parse(format!(
                    "row has {} columns, expected {}",
                    row.len(),
                    dim + 1
                )));
            }
            targets.push(row[dim]);
            inputs.push(ActionParameterization::new(row[..dim].to_vec())?);
        }
        if inputs.len() != points {
            return Err(Error::Parse(format!(
                "expected {points} points, found {}",
                inputs.len()
            )));
        }
        Self::fit_points(
            inputs,
            targets,
            GpHyperparams {
                length_scales,
                signal_variance,
                noise_variance,
            },
        )
    }
}

fn factorize(gram: DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let mut jitter = JITTER_START;
    loop {
        let mut m = gram.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(m) {
            return Ok((c, jitter));
        }
        if jitter >= JITTER_MAX {
            return Err(Error::ModelFit {
                max_jitter: JITTER_MAX,
            });
        }
        jitter *= 10.0;
    }
}
