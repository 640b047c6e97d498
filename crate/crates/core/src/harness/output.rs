//! CSV emission. Every table has a header row; list-valued cells are
//! `;`-separated and floats use the shortest round-trip representation, so
//! identical inputs give byte-identical files.

use std::collections::BTreeSet;

use csv::{ReaderBuilder, Writer};

use super::experiment::{EvalReport, KappaReport};
use super::sweep::SweepReport;
use super::DiagnosisRecord;
use crate::correction::CorrectedDataset;
use crate::error::{Error, Result};
use crate::space::{ActionParameterization, Experience, ParameterSpace};

fn join<I: IntoIterator<Item = S>, S: AsRef<str>>(items: I) -> String {
    items
        .into_iter()
        .map(|s| s.as_ref().to_owned())
        .collect::<Vec<_>>()
        .join(";")
}

fn finish(w: Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn coords(x: &ActionParameterization) -> impl Iterator<Item = String> + '_ {
    x.values().iter().map(f64::to_string)
}

fn prefixed(space: &ParameterSpace, prefix: &str) -> Vec<String> {
    space
        .params()
        .iter()
        .map(|p| format!("{prefix}{}", p.name))
        .collect()
}

/// `id, <params>, success, causes`
pub fn campaign_csv(space: &ParameterSpace, campaign: &[Experience]) -> Result<String> {
    let mut w = Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string()];
    header.extend(prefixed(space, ""));
    header.extend(["success".into(), "causes".into()]);
    w.write_record(&header)?;
    for (id, e) in campaign.iter().enumerate() {
        let mut row = vec![id.to_string()];
        row.extend(coords(&e.params));
        row.push(u8::from(e.is_success()).to_string());
        row.push(join(e.cause_labels.iter().flatten()));
        w.write_record(&row)?;
    }
    finish(w)
}

/// Inverse of [`campaign_csv`]; rows are returned in file order.
pub fn read_campaign_csv(space: &ParameterSpace, text: &str) -> Result<Vec<Experience>> {
    let mut r = ReaderBuilder::new().from_reader(text.as_bytes());
    let dim = space.dim();
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != dim + 3 {
            return Err(Error::Parse(format!(
                "campaign row {line}: {} columns, expected {}",
                rec.len(),
                dim + 3
            )));
        }
        let values = (1..=dim)
            .map(|i| {
                rec[i]
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("campaign row {line}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let success = match &rec[dim + 1] {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Parse(format!(
                    "campaign row {line}: success {other:?}"
                )))
            }
        };
        let causes: BTreeSet<String> = rec[dim + 2]
            .split(';')
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect();
        out.push(
            Experience::observed(ActionParameterization::new(values)?, success).with_causes(causes),
        );
    }
    Ok(out)
}

/// `failure_id, candidates, frequencies, xf_<params>, expansions, truth,
/// true_positives, false_positives, false_negatives`
pub fn diagnoses_csv(space: &ParameterSpace, records: &[DiagnosisRecord]) -> Result<String> {
    let mut w = Writer::from_writer(Vec::new());
    let mut header = vec![
        "failure_id".to_string(),
        "candidates".into(),
        "frequencies".into(),
    ];
    header.extend(prefixed(space, "xf_"));
    header.extend(
        [
            "expansions",
            "truth",
            "true_positives",
            "false_positives",
            "false_negatives",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for r in records {
        let d = &r.diagnosis;
        let mut row = vec![
            r.case.id.to_string(),
            join(&d.candidates),
            join(d.frequencies.iter().map(|(k, v)| format!("{k}={v}"))),
        ];
        row.extend(coords(&d.falsifying));
        row.push(d.expansions_used.to_string());
        row.push(join(&r.case.truth));
        row.extend(
            [
                r.score.true_positives,
                r.score.false_positives,
                r.score.false_negatives,
            ]
            .map(|v| v.to_string()),
        );
        w.write_record(&row)?;
    }
    finish(w)
}

/// `failure_id, failed_<params>, corrected_<params>, predicted, valid_candidates, diagnosed`;
/// corrected coordinates are blank when no valid correction was found.
pub fn corrections_csv(
    space: &ParameterSpace,
    dataset: &CorrectedDataset,
    ids: Option<&[usize]>,
) -> Result<String> {
    let mut w = Writer::from_writer(Vec::new());
    let mut header = vec!["failure_id".to_string()];
    header.extend(prefixed(space, "failed_"));
    header.extend(prefixed(space, "corrected_"));
    header.extend(["predicted", "valid_candidates", "diagnosed"].map(String::from));
    w.write_record(&header)?;
    for r in &dataset.records {
        let id = ids.map_or(r.failure_id, |ids| ids[r.failure_id]);
        let mut row = vec![id.to_string()];
        row.extend(coords(&r.failed));
        match &r.result.corrected {
            Some(c) => row.extend(coords(c)),
            None => row.extend(std::iter::repeat_n(String::new(), space.dim())),
        }
        row.push(r.result.predicted.to_string());
        row.push(r.result.candidates_valid.to_string());
        row.push(join(&r.result.diagnosis.candidates));
        w.write_record(&row)?;
    }
    finish(w)
}

/// Reads the failed/corrected pairs back from [`corrections_csv`] output,
/// skipping rows without a correction.
pub fn read_corrections_csv(
    space: &ParameterSpace,
    text: &str,
) -> Result<Vec<(ActionParameterization, ActionParameterization)>> {
    let mut r = ReaderBuilder::new().from_reader(text.as_bytes());
    let dim = space.dim();
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 * dim + 4 {
            return Err(Error::Parse(format!(
                "corrections row {line}: {} columns",
                rec.len()
            )));
        }
        if rec[1 + dim].is_empty() {
            continue;
        }
        let parse = |range: std::ops::Range<usize>| -> Result<ActionParameterization> {
            let v = range
                .map(|i| {
                    rec[i]
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("corrections row {line}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            ActionParameterization::new(v)
        };
        out.push((parse(1..1 + dim)?, parse(1 + dim..1 + 2 * dim)?));
    }
    Ok(out)
}

/// Aggregated sweep rows; the wall-clock column is opt-in because it is not
/// reproducible.
pub fn sweep_csv(report: &SweepReport, include_runtime: bool) -> Result<String> {
    let mut w = Writer::from_writer(Vec::new());
    let mut header = vec![
        report.parameter.name().to_string(),
        "mean_correct".into(),
        "std_correct".into(),
        "mean_false_pos".into(),
        "std_false_pos".into(),
    ];
    if include_runtime {
        header.push("mean_runtime_per_failure".into());
    }
    w.write_record(&header)?;
    for r in &report.rows {
        let mut row: Vec<String> = [
            r.value,
            r.mean_correct,
            r.std_correct,
            r.mean_false_pos,
            r.std_false_pos,
        ]
        .iter()
        .map(f64::to_string)
        .collect();
        if include_runtime {
            row.push(r.mean_runtime_per_failure.to_string());
        }
        w.write_record(&row)?;
    }
    finish(w)
}

/// Per-repetition totals behind [`sweep_csv`].
pub fn sweep_raw_csv(report: &SweepReport) -> Result<String> {
    let mut w = Writer::from_writer(Vec::new());
    w.write_record([
        report.parameter.name(),
        "repetition",
        "correct",
        "false_pos",
        "false_neg",
    ])?;
    for r in &report.raw {
        w.write_record([
            r.value.to_string(),
            r.repetition.to_string(),
            r.score.true_positives.to_string(),
            r.score.false_positives.to_string(),
            r.score.false_negatives.to_string(),
        ])?;
    }
    finish(w)
}

/// Plot series: correct and false-positive curves with one-sigma bands and
/// the ground-truth total.
pub fn plot_csv(report: &SweepReport) -> Result<String> {
    let mut w = Writer::from_writer(Vec::new());
    w.write_record([
        report.parameter.name(),
        "correct_mean",
        "correct_lower",
        "correct_upper",
        "false_positive_mean",
        "false_positive_lower",
        "false_positive_upper",
        "ground_truth_total",
    ])?;
    for r in &report.rows {
        w.write_record([
            r.value.to_string(),
            r.mean_correct.to_string(),
            (r.mean_correct - r.std_correct).to_string(),
            (r.mean_correct + r.std_correct).to_string(),
            r.mean_false_pos.to_string(),
            (r.mean_false_pos - r.std_false_pos).to_string(),
            (r.mean_false_pos + r.std_false_pos).to_string(),
            report.truth_total.to_string(),
        ])?;
    }
    finish(w)
}

/// `trial, <params>, success, causes`; coordinates blank when no sample was found.
pub fn eval_csv(space: &ParameterSpace, report: &EvalReport) -> Result<String> {
    let mut w = Writer::from_writer(Vec::new());
    let mut header = vec!["trial".to_string()];
    header.extend(prefixed(space, ""));
    header.extend(["success".into(), "causes".into()]);
    w.write_record(&header)?;
    for t in &report.trials {
        let mut row = vec![t.trial.to_string()];
        match &t.params {
            Some(x) => row.extend(coords(x)),
            None => row.extend(std::iter::repeat_n(String::new(), space.dim())),
        }
        row.push(u8::from(t.success).to_string());
        row.push(join(t.causes.iter().map(|c| c.as_str())));
        w.write_record(&row)?;
    }
    finish(w)
}

/// One row per shape: `kappa, corrected, skipped, trials, successes, no_sample`;
/// the last three are blank for shapes with no corrected experience.
pub fn experiment_csv(reports: &[KappaReport]) -> Result<String> {
    let mut w = Writer::from_writer(Vec::new());
    w.write_record([
        "kappa",
        "corrected",
        "skipped",
        "trials",
        "successes",
        "no_sample",
    ])?;
    for r in reports {
        let (trials, successes, no_sample) = match &r.eval {
            Some(e) => (
                e.trials.len().to_string(),
                e.successes().to_string(),
                e.no_sample().to_string(),
            ),
            None => Default::default(),
        };
        w.write_record([
            r.kappa.to_string(),
            r.corrected().to_string(),
            r.dataset.skipped.to_string(),
            trials,
            successes,
            no_sample,
        ])?;
    }
    finish(w)
}
