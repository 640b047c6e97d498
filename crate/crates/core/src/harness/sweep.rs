use std::time::Instant;

use super::{diagnose_failures, FailureCase};
use crate::diagnosis::{DiagnosisConfig, Score};
use crate::error::{Error, Result};
use crate::execution_model::ExecutionModel;
use crate::rng::RngHandle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Multiplier on the anchor standard deviations.
    AnchorRatio,
    ExpansionRatio,
    SamplesPerRegion,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::AnchorRatio => "anchor_ratio",
            SweepParam::ExpansionRatio => "expansion_ratio",
            SweepParam::SamplesPerRegion => "samples_per_region",
        }
    }

    /// `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &DiagnosisConfig, value: f64) -> DiagnosisConfig {
        let mut out = cfg.clone();
        match self {
            SweepParam::AnchorRatio => out.initial_std.iter_mut().for_each(|s| *s *= value),
            SweepParam::ExpansionRatio => out.expansion_ratio = value,
            SweepParam::SamplesPerRegion => out.samples_per_region = value as usize,
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
    pub repetitions: usize,
    pub baseline: DiagnosisConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidConfig("sweep: no values".into()));
        }
        if self
            .values
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::InvalidConfig(
                "sweep: values must be strictly increasing".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig(
                "sweep: repetitions must be at least 1".into(),
            ));
        }
        if self.parameter == SweepParam::SamplesPerRegion
            && self.values.iter().any(|v| v.fract() != 0.0 || *v < 1.0)
        {
            return Err(Error::InvalidConfig(
                "sweep: sample counts must be positive integers".into(),
            ));
        }
        Ok(())
    }
}

/// Totals over all failures for one (value, repetition).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRawRow {
    pub value: f64,
    pub repetition: usize,
    pub score: Score,
    pub runtime_per_failure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub mean_correct: f64,
    pub std_correct: f64,
    pub mean_false_pos: f64,
    pub std_false_pos: f64,
    pub mean_runtime_per_failure: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub parameter: SweepParam,
    pub rows: Vec<SweepRow>,
    pub raw: Vec<SweepRawRow>,
    /// Ground-truth relations over all failures.
    pub truth_total: usize,
}

/// Mean and sample standard deviation (0 for a single value).
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Diagnoses every failure for every swept value and repetition. Value `i`,
/// repetition `k` uses `rng.fork(i).fork(k)`.
pub fn run_sensitivity_sweep(
    spec: &SweepSpec,
    failures: &[FailureCase],
    model: &ExecutionModel,
    mode: u32,
    rng: &RngHandle,
) -> Result<SweepReport> {
    spec.validate()?;
    if failures.is_empty() {
        return Err(Error::Empty("failures"));
    }
    let mut rows = Vec::with_capacity(spec.values.len());
    let mut raw = Vec::with_capacity(spec.values.len() * spec.repetitions);
    for (vi, &value) in spec.values.iter().enumerate() {
        let cfg = spec.parameter.apply(&spec.baseline, value);
        cfg.validate(model.space.dim())?;
        let value_rng = rng.fork(vi as u64);
        let first = raw.len();
        for rep in 0..spec.repetitions {
            let start = Instant::now();
            let records =
                diagnose_failures(model, mode, failures, &cfg, &value_rng.fork(rep as u64))?;
            let elapsed = start.elapsed().as_secs_f64();
            let mut score = Score::default();
            for r in &records {
                score += r.score;
            }
            raw.push(SweepRawRow {
                value,
                repetition: rep,
                score,
                runtime_per_failure: elapsed / failures.len() as f64,
            });
        }
        let reps = &raw[first..];
        let correct: Vec<f64> = reps.iter().map(|r| r.score.true_positives as f64).collect();
        let fps: Vec<f64> = reps
            .iter()
            .map(|r| r.score.false_positives as f64)
            .collect();
        let (mean_correct, std_correct) = mean_std(&correct);
        let (mean_false_pos, std_false_pos) = mean_std(&fps);
        rows.push(SweepRow {
            value,
            mean_correct,
            std_correct,
            mean_false_pos,
            std_false_pos,
            mean_runtime_per_failure: reps.iter().map(|r| r.runtime_per_failure).sum::<f64>()
                / reps.len() as f64,
        });
    }
    Ok(SweepReport {
        parameter: spec.parameter,
        rows,
        raw,
        truth_total: failures.iter().map(|f| f.truth.len()).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_matches_hand_values() {
        let (m, s) = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn apply_overrides_one_field() {
        let base = DiagnosisConfig::baseline(vec![0.002, 0.018, 0.004]);
        let a = SweepParam::AnchorRatio.apply(&base, 2.0);
        assert_eq!(a.initial_std, vec![0.004, 0.036, 0.008]);
        assert_eq!(a.samples_per_region, base.samples_per_region);
        assert_eq!(
            SweepParam::SamplesPerRegion
                .apply(&base, 5.0)
                .samples_per_region,
            5
        );
        assert_eq!(
            SweepParam::ExpansionRatio.apply(&base, 0.5).expansion_ratio,
            0.5
        );
    }

    #[test]
    fn spec_validation() {
        let base = DiagnosisConfig::baseline(vec![0.002, 0.018, 0.004]);
        let mut spec = SweepSpec {
            parameter: SweepParam::SamplesPerRegion,
            values: vec![1.0, 5.5],
            repetitions: 1,
            baseline: base,
        };
        assert!(spec.validate().is_err());
        spec.values = vec![5.0, 1.0];
        assert!(spec.validate().is_err());
        spec.values = vec![1.0, 5.0];
        assert!(spec.validate().is_ok());
        spec.repetitions = 0;
        assert!(spec.validate().is_err());
    }
}
