//! File-level evaluation: prediction/ground-truth JSONL in, JSON report and
//! tab-separated tables out.

use std::path::Path;

use serde::{Deserialize, Serialize};

use iaml_core::geometry::Point;
use iaml_core::metrics::{click_accuracy, evaluate_records, EvalRecord};

use crate::dataset_io::{self, AnnotationRecord, DatasetError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Elements,
    Click,
}

impl EvalMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "elements" => Some(EvalMode::Elements),
            "click" => Some(EvalMode::Click),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EvalMode::Elements => "elements",
            EvalMode::Click => "click",
        }
    }
}

/// One prediction line. Elements mode uses the annotation schema; click mode
/// uses `click_point` (or falls back to the center of the first predicted
/// element).
#[derive(Clone, Debug, Deserialize)]
struct PredictionLine {
    record_id: String,
    #[serde(default)]
    click_point: Option<[f64; 2]>,
    #[serde(default)]
    elements: Option<Vec<crate::dataset_io::ElementEntry>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdRow {
    pub threshold: f64,
    pub matched: u64,
    pub n_pred: u64,
    pub n_gt: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

/// The serialized evaluation report.
#[derive(Clone, Debug, Serialize)]
pub struct EvalReportJson {
    pub mode: &'static str,
    pub gt_digest: String,
    pub pred_digest: String,
    pub n_records: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub thresholds: Vec<ThresholdRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub click_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_clicks: Option<u64>,
    pub missing_records: Vec<String>,
    pub unknown_records: Vec<String>,
}

pub struct EvalOutput {
    pub report: EvalReportJson,
    /// Stable tab-separated table for standard output.
    pub table: String,
    /// Optional per-(record, threshold) CSV body.
    pub per_record_csv: String,
}

fn validation(msg: impl Into<String>) -> DatasetError {
    DatasetError::Validation(msg.into())
}

fn to_eval_records(records: &[AnnotationRecord]) -> Result<Vec<EvalRecord>, DatasetError> {
    records
        .iter()
        .map(|r| {
            Ok(EvalRecord {
                record_id: r.record_id.clone(),
                elements: r.to_elements()?,
            })
        })
        .collect()
}

/// Evaluate a prediction file against a ground-truth file.
///
/// Ground-truth ids with no prediction are an error unless `allow_missing`,
/// in which case they score zero predictions and are flagged; prediction ids
/// absent from the ground truth are treated the same way (excluded and
/// flagged).
pub fn evaluate_files(
    pred_path: &Path,
    gt_path: &Path,
    thresholds: &[f64],
    mode: EvalMode,
    allow_missing: bool,
    geometry_only: bool,
) -> Result<EvalOutput, DatasetError> {
    match mode {
        EvalMode::Elements => {
            evaluate_elements_files(pred_path, gt_path, thresholds, allow_missing, geometry_only)
        }
        EvalMode::Click => evaluate_click_files(pred_path, gt_path, allow_missing),
    }
}

fn evaluate_elements_files(
    pred_path: &Path,
    gt_path: &Path,
    thresholds: &[f64],
    allow_missing: bool,
    geometry_only: bool,
) -> Result<EvalOutput, DatasetError> {
    let gt_records = dataset_io::load_records(gt_path)?;
    let pred_records = dataset_io::load_records(pred_path)?;
    let gts = to_eval_records(&gt_records)?;
    let preds = to_eval_records(&pred_records)?;

    let report = evaluate_records(&preds, &gts, thresholds, !geometry_only);
    if !allow_missing && (!report.missing_records.is_empty() || !report.unknown_records.is_empty())
    {
        return Err(validation(format!(
            "record ids do not align: {} ground-truth record(s) without predictions, {} prediction record(s) without ground truth (use --allow-missing to score anyway)",
            report.missing_records.len(),
            report.unknown_records.len()
        )));
    }

    let mut table = String::from("threshold\tprecision\trecall\tf1\n");
    let rows: Vec<ThresholdRow> = report
        .thresholds
        .iter()
        .map(|t| {
            table.push_str(&format!(
                "{:.2}\t{:.4}\t{:.4}\t{:.4}\n",
                t.threshold, t.precision, t.recall, t.f1
            ));
            ThresholdRow {
                threshold: t.threshold,
                matched: t.matched,
                n_pred: t.n_pred,
                n_gt: t.n_gt,
                precision: t.precision,
                recall: t.recall,
                f1: t.f1,
                macro_precision: t.macro_precision,
                macro_recall: t.macro_recall,
                macro_f1: t.macro_f1,
            }
        })
        .collect();

    let mut per_record_csv = String::from("record_id,threshold,matched,n_pred,n_gt\n");
    for r in &report.per_record {
        per_record_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.record_id, r.threshold, r.matched, r.n_pred, r.n_gt
        ));
    }

    Ok(EvalOutput {
        report: EvalReportJson {
            mode: EvalMode::Elements.name(),
            gt_digest: dataset_io::file_digest(gt_path)?,
            pred_digest: dataset_io::file_digest(pred_path)?,
            n_records: report.n_records,
            thresholds: rows,
            click_accuracy: None,
            n_clicks: None,
            missing_records: report.missing_records,
            unknown_records: report.unknown_records,
        },
        table,
        per_record_csv,
    })
}

fn evaluate_click_files(
    pred_path: &Path,
    gt_path: &Path,
    allow_missing: bool,
) -> Result<EvalOutput, DatasetError> {
    let gt_records = dataset_io::load_records(gt_path)?;
    let preds = load_predictions(pred_path)?;
    let pred_by_id: std::collections::BTreeMap<&str, &PredictionLine> =
        preds.iter().map(|p| (p.record_id.as_str(), p)).collect();
    let gt_ids: std::collections::BTreeSet<&str> =
        gt_records.iter().map(|r| r.record_id.as_str()).collect();

    let mut missing = Vec::new();
    let mut clicks = Vec::new();
    for gt in &gt_records {
        let elements = gt.to_elements()?;
        if elements.len() != 1 {
            return Err(validation(format!(
                "record {}: click mode needs exactly one ground-truth element, found {}",
                gt.record_id,
                elements.len()
            )));
        }
        let target = elements[0].bbox;
        match pred_by_id.get(gt.record_id.as_str()) {
            Some(p) => {
                let point = prediction_point(p)?;
                clicks.push((point, target));
            }
            None => missing.push(gt.record_id.clone()),
        }
    }
    let mut unknown: Vec<String> = preds
        .iter()
        .filter(|p| !gt_ids.contains(p.record_id.as_str()))
        .map(|p| p.record_id.clone())
        .collect();
    unknown.sort();

    if !allow_missing && (!missing.is_empty() || !unknown.is_empty()) {
        return Err(validation(format!(
            "record ids do not align: {} missing, {} unknown (use --allow-missing to score anyway)",
            missing.len(),
            unknown.len()
        )));
    }

    // Missing predictions count as misses.
    let hits = click_accuracy(&clicks) * clicks.len() as f64;
    let total = (clicks.len() + missing.len()) as f64;
    let accuracy = if total == 0.0 { 0.0 } else { hits / total };

    let table = format!(
        "metric\tvalue\nclick_accuracy\t{:.4}\nn_clicks\t{}\n",
        accuracy, total as u64
    );
    Ok(EvalOutput {
        report: EvalReportJson {
            mode: EvalMode::Click.name(),
            gt_digest: dataset_io::file_digest(gt_path)?,
            pred_digest: dataset_io::file_digest(pred_path)?,
            n_records: gt_records.len() as u64,
            thresholds: Vec::new(),
            click_accuracy: Some(accuracy),
            n_clicks: Some(total as u64),
            missing_records: missing,
            unknown_records: unknown,
        },
        table,
        per_record_csv: String::new(),
    })
}

fn prediction_point(p: &PredictionLine) -> Result<Point, DatasetError> {
    if let Some([x, y]) = p.click_point {
        return Point::new(x, y).map_err(|e| {
            validation(format!("record {}: click point ({x}, {y}): {e}", p.record_id))
        });
    }
    if let Some(elements) = &p.elements {
        if let Some(first) = elements.first() {
            let [x0, y0, x1, y1] = first.bbox;
            let b = iaml_core::geometry::BBox::new(x0, y0, x1, y1).map_err(|e| {
                validation(format!("record {}: predicted bbox: {e}", p.record_id))
            })?;
            return Ok(b.center());
        }
    }
    Err(validation(format!(
        "record {}: click mode needs click_point or a predicted element",
        p.record_id
    )))
}

fn load_predictions(path: &Path) -> Result<Vec<PredictionLine>, DatasetError> {
    use std::io::BufRead;
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut out: Vec<PredictionLine> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: PredictionLine = serde_json::from_str(&line).map_err(|e| {
            validation(format!("{}:{}: malformed JSON: {e}", path.display(), line_no + 1))
        })?;
        if p.click_point.is_some() && p.elements.is_some() {
            return Err(validation(format!(
                "{}:{}: record {}: exactly one of click_point/elements may be present",
                path.display(),
                line_no + 1,
                p.record_id
            )));
        }
        if !seen.insert(p.record_id.clone()) {
            return Err(validation(format!(
                "{}:{}: duplicate record_id {}",
                path.display(),
                line_no + 1,
                p.record_id
            )));
        }
        out.push(p);
    }
    Ok(out)
}
