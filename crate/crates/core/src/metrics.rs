//! Evaluation harness: IoU-threshold precision/recall/F1 for multi-element
//! predictions and click accuracy for single-element grounding.
//!
//! Matching is greedy one-to-one by descending IoU among pairs whose IoU
//! meets the threshold (ties count as matches: `IoU >= threshold`) and whose
//! element types agree. Greedy is the detection-community default and is
//! deterministic; it can fall short of the maximum matching on crossing
//! fixtures, which the test suite quantifies against a brute-force oracle.

use alloc::string::String;
use alloc::vec::Vec;

use crate::element::UIElement;
use crate::geometry::{BBox, Point};

/// Precision/recall/F1 triple with the 0-denominator conventions:
/// precision 0 when there are no predictions, recall 0 when there is no
/// ground truth, F1 0 when precision + recall is 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(matched: u64, n_pred: u64, n_gt: u64) -> Self {
        let precision = if n_pred == 0 {
            0.0
        } else {
            matched as f64 / n_pred as f64
        };
        let recall = if n_gt == 0 {
            0.0
        } else {
            matched as f64 / n_gt as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

/// Greedy one-to-one matching between predicted and ground-truth elements.
///
/// Candidate pairs need `IoU >= threshold` and equal `element_type`; they are
/// consumed in descending IoU order with ties broken by lower prediction
/// index, then lower ground-truth index. Returns `(pred_idx, gt_idx)` pairs.
pub fn match_elements(
    preds: &[UIElement],
    gts: &[UIElement],
    threshold: f64,
) -> Vec<(usize, usize)> {
    match_elements_with(preds, gts, threshold, true)
}

/// [`match_elements`] with the type-equality requirement made explicit;
/// `require_type = false` matches on geometry alone.
pub fn match_elements_with(
    preds: &[UIElement],
    gts: &[UIElement],
    threshold: f64,
    require_type: bool,
) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (pi, p) in preds.iter().enumerate() {
        for (gi, g) in gts.iter().enumerate() {
            if require_type && p.element_type != g.element_type {
                continue;
            }
            let iou = p.bbox.iou(&g.bbox);
            if iou >= threshold {
                candidates.push((iou, pi, gi));
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    let mut pred_used = alloc::vec![false; preds.len()];
    let mut gt_used = alloc::vec![false; gts.len()];
    let mut matches = Vec::new();
    for (_, pi, gi) in candidates {
        if pred_used[pi] || gt_used[gi] {
            continue;
        }
        pred_used[pi] = true;
        gt_used[gi] = true;
        matches.push((pi, gi));
    }
    matches
}

/// Precision/recall/F1 of one prediction set against one ground-truth set.
pub fn prf(preds: &[UIElement], gts: &[UIElement], threshold: f64) -> Prf {
    let matched = match_elements(preds, gts, threshold).len() as u64;
    Prf::from_counts(matched, preds.len() as u64, gts.len() as u64)
}

/// Fraction of click points landing inside (closed boundaries) their
/// ground-truth box. Zero for an empty list.
pub fn click_accuracy(clicks: &[(Point, BBox)]) -> f64 {
    if clicks.is_empty() {
        return 0.0;
    }
    let hits = clicks.iter().filter(|(p, b)| b.contains(*p)).count();
    hits as f64 / clicks.len() as f64
}

/// One record's elements keyed for evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    pub record_id: String,
    pub elements: Vec<UIElement>,
}

/// Pooled and per-record counts at one threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdStats {
    pub threshold: f64,
    pub matched: u64,
    pub n_pred: u64,
    pub n_gt: u64,
    /// Micro averages: counts pooled across records before division.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Macro averages: per-record P/R/F averaged over ground-truth records.
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

/// Per-(record, threshold) counts for inspection output.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordStats {
    pub record_id: String,
    pub threshold: f64,
    pub matched: u64,
    pub n_pred: u64,
    pub n_gt: u64,
}

/// Evaluation summary over a prediction/ground-truth record pairing.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub thresholds: Vec<ThresholdStats>,
    /// Ground-truth record ids with no prediction record; they count as zero
    /// predictions.
    pub missing_records: Vec<String>,
    /// Prediction record ids that match no ground-truth record; they are
    /// excluded from scoring.
    pub unknown_records: Vec<String>,
    pub per_record: Vec<RecordStats>,
    pub n_records: u64,
}

/// Micro- and macro-averaged P/R/F across records per threshold. Predictions
/// are looked up by `record_id`; ground-truth records without one are scored
/// with zero predictions and flagged.
pub fn evaluate_records(
    preds: &[EvalRecord],
    gts: &[EvalRecord],
    thresholds: &[f64],
    require_type: bool,
) -> EvalReport {
    let empty: Vec<UIElement> = Vec::new();
    let pred_by_id: alloc::collections::BTreeMap<&str, &Vec<UIElement>> = preds
        .iter()
        .map(|r| (r.record_id.as_str(), &r.elements))
        .collect();

    let mut missing_records = Vec::new();
    let mut per_record = Vec::new();
    let mut stats = Vec::with_capacity(thresholds.len());

    let gt_ids: alloc::collections::BTreeSet<&str> =
        gts.iter().map(|r| r.record_id.as_str()).collect();
    let mut unknown_records: Vec<String> = preds
        .iter()
        .filter(|r| !gt_ids.contains(r.record_id.as_str()))
        .map(|r| r.record_id.clone())
        .collect();
    unknown_records.sort();

    for gt in gts {
        if !pred_by_id.contains_key(gt.record_id.as_str()) {
            missing_records.push(gt.record_id.clone());
        }
    }

    for &threshold in thresholds {
        let mut matched = 0u64;
        let mut n_pred = 0u64;
        let mut n_gt = 0u64;
        let mut macro_p = 0.0;
        let mut macro_r = 0.0;
        let mut macro_f = 0.0;
        for gt in gts {
            let pred_elems = pred_by_id
                .get(gt.record_id.as_str())
                .copied()
                .unwrap_or(&empty);
            let m = match_elements_with(pred_elems, &gt.elements, threshold, require_type).len()
                as u64;
            matched += m;
            n_pred += pred_elems.len() as u64;
            n_gt += gt.elements.len() as u64;
            let rec = Prf::from_counts(m, pred_elems.len() as u64, gt.elements.len() as u64);
            macro_p += rec.precision;
            macro_r += rec.recall;
            macro_f += rec.f1;
            per_record.push(RecordStats {
                record_id: gt.record_id.clone(),
                threshold,
                matched: m,
                n_pred: pred_elems.len() as u64,
                n_gt: gt.elements.len() as u64,
            });
        }
        let micro = Prf::from_counts(matched, n_pred, n_gt);
        let n = gts.len().max(1) as f64;
        stats.push(ThresholdStats {
            threshold,
            matched,
            n_pred,
            n_gt,
            precision: micro.precision,
            recall: micro.recall,
            f1: micro.f1,
            macro_precision: macro_p / n,
            macro_recall: macro_r / n,
            macro_f1: macro_f / n,
        });
    }

    EvalReport {
        thresholds: stats,
        missing_records,
        unknown_records,
        per_record,
        n_records: gts.len() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::RngStream;
    use alloc::string::ToString;
    use alloc::vec;
    use rand::Rng;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    fn el(t: &str, b: BBox) -> UIElement {
        UIElement::new(t, b, "")
    }

    /// Exhaustive maximum one-to-one matching among pairs meeting the
    /// threshold (and type equality). Exponential; fixture-sized inputs only.
    fn max_matching_oracle(preds: &[UIElement], gts: &[UIElement], threshold: f64) -> usize {
        fn go(eligible: &[Vec<bool>], pi: usize, gt_used: &mut Vec<bool>) -> usize {
            if pi == eligible.len() {
                return 0;
            }
            // Skip this prediction.
            let mut best = go(eligible, pi + 1, gt_used);
            for gi in 0..gt_used.len() {
                if eligible[pi][gi] && !gt_used[gi] {
                    gt_used[gi] = true;
                    best = best.max(1 + go(eligible, pi + 1, gt_used));
                    gt_used[gi] = false;
                }
            }
            best
        }
        let eligible: Vec<Vec<bool>> = preds
            .iter()
            .map(|p| {
                gts.iter()
                    .map(|g| p.element_type == g.element_type && p.bbox.iou(&g.bbox) >= threshold)
                    .collect()
            })
            .collect();
        go(&eligible, 0, &mut vec![false; gts.len()])
    }

    #[test]
    fn identical_sets_match_perfectly() {
        let gts = vec![
            el("button", bx(0.1, 0.1, 0.3, 0.2)),
            el("icon", bx(0.5, 0.5, 0.6, 0.6)),
            el("text", bx(0.2, 0.7, 0.9, 0.8)),
        ];
        for threshold in [0.0, 0.1, 0.5, 0.99, 1.0] {
            let m = match_elements(&gts, &gts, threshold);
            assert_eq!(m.len(), 3);
            let p = prf(&gts, &gts, threshold);
            assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn one_match_one_miss_gives_half() {
        let gts = vec![
            el("button", bx(0.1, 0.1, 0.3, 0.2)),
            el("button", bx(0.6, 0.6, 0.8, 0.8)),
        ];
        let preds = vec![
            el("button", bx(0.1, 0.1, 0.3, 0.2)),
            el("button", bx(0.35, 0.35, 0.5, 0.5)),
        ];
        let m = match_elements(&preds, &gts, 0.5);
        assert_eq!(m, vec![(0, 0)]);
        let p = prf(&preds, &gts, 0.5);
        assert_eq!((p.precision, p.recall, p.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn empty_predictions_score_zero() {
        let gts = vec![el("button", bx(0.1, 0.1, 0.3, 0.2))];
        let p = prf(&[], &gts, 0.5);
        assert_eq!((p.precision, p.recall, p.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn greedy_can_trail_the_maximum_matching() {
        // p1 overlaps g1 almost exactly and g2 well enough; p2 only reaches
        // g1. Greedy burns g1 on p1 and strands p2; the maximum matching
        // pairs (p1,g2),(p2,g1).
        let threshold = 0.3;
        let g1 = el("button", bx(0.0, 0.0, 0.92, 1.0));
        let g2 = el("button", bx(0.62, 0.0, 1.0, 1.0));
        let p1 = el("button", bx(0.0, 0.0, 1.0, 1.0));
        let p2 = el("button", bx(0.0, 0.0, 0.5, 1.0));
        let preds = vec![p1.clone(), p2.clone()];
        let gts = vec![g1.clone(), g2.clone()];
        // Sanity on the constructed IoU ordering.
        assert!(p1.bbox.iou(&g1.bbox) > p2.bbox.iou(&g1.bbox));
        assert!(p2.bbox.iou(&g1.bbox) >= threshold);
        assert!(p1.bbox.iou(&g2.bbox) >= threshold);
        assert!(p2.bbox.iou(&g2.bbox) < threshold);

        let greedy = match_elements(&preds, &gts, threshold);
        assert_eq!(greedy, vec![(0, 0)], "greedy takes the top pair only");
        let oracle = max_matching_oracle(&preds, &gts, threshold);
        assert_eq!(oracle, 2, "maximum matching covers both");
    }

    #[test]
    fn type_mismatch_blocks_matching_unless_geometry_only() {
        let gts = vec![el("button", bx(0.1, 0.1, 0.3, 0.3))];
        let preds = vec![el("icon", bx(0.1, 0.1, 0.3, 0.3))];
        assert!(match_elements(&preds, &gts, 0.5).is_empty());
        assert_eq!(match_elements_with(&preds, &gts, 0.5, false).len(), 1);
    }

    #[test]
    fn ties_break_by_lower_indices() {
        // Two identical predictions compete for two identical gts: the
        // tie-break hands pred 0 to gt 0.
        let b = bx(0.2, 0.2, 0.4, 0.4);
        let gts = vec![el("button", b), el("button", b)];
        let preds = vec![el("button", b), el("button", b)];
        let m = match_elements(&preds, &gts, 0.5);
        assert_eq!(m, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn click_accuracy_counts_containment() {
        let b1 = bx(0.1, 0.1, 0.3, 0.3);
        let b2 = bx(0.5, 0.5, 0.9, 0.9);
        assert_eq!(click_accuracy(&[(b1.center(), b1), (b2.center(), b2)]), 1.0);
        let out = Point { x: 0.95, y: 0.05 };
        assert_eq!(click_accuracy(&[(out, b1), (out, b2)]), 0.0);
        let clicks = [
            (b1.center(), b1),
            (b2.center(), b2),
            (b1.center(), b2),
            (b2.center(), b2),
        ];
        assert_eq!(click_accuracy(&clicks), 0.75);
        assert_eq!(click_accuracy(&[]), 0.0);
    }

    #[test]
    fn swapping_preds_and_gts_swaps_precision_and_recall() {
        let mut rng = RngStream::from_seed_value(4);
        for _ in 0..50 {
            let gen_set = |rng: &mut RngStream, n: usize| -> Vec<UIElement> {
                (0..n)
                    .map(|_| {
                        let w = rng.inner().gen_range(0.05..0.3);
                        let h = rng.inner().gen_range(0.05..0.3);
                        let x0 = rng.inner().gen_range(0.0..1.0 - w);
                        let y0 = rng.inner().gen_range(0.0..1.0 - h);
                        el("button", bx(x0, y0, x0 + w, y0 + h))
                    })
                    .collect()
            };
            let n_a = rng.below(6) + 1;
            let a = gen_set(&mut rng, n_a);
            let n_b = rng.below(6) + 1;
            let b = gen_set(&mut rng, n_b);
            let fwd = prf(&a, &b, 0.3);
            let rev = prf(&b, &a, 0.3);
            assert_eq!(fwd.precision, rev.recall);
            assert_eq!(fwd.recall, rev.precision);
            assert!((fwd.f1 - rev.f1).abs() < 1e-12);
            assert_eq!(
                match_elements(&a, &b, 0.3).len(),
                match_elements(&b, &a, 0.3).len()
            );
        }
    }

    #[test]
    fn matched_count_nonincreasing_in_threshold() {
        let mut rng = RngStream::from_seed_value(6);
        let thresholds = [0.1, 0.3, 0.5, 0.7];
        for _ in 0..200 {
            let gen_set = |rng: &mut RngStream, n: usize| -> Vec<UIElement> {
                (0..n)
                    .map(|_| {
                        let w = rng.inner().gen_range(0.05..0.4);
                        let h = rng.inner().gen_range(0.05..0.4);
                        let x0 = rng.inner().gen_range(0.0..1.0 - w);
                        let y0 = rng.inner().gen_range(0.0..1.0 - h);
                        el("button", bx(x0, y0, x0 + w, y0 + h))
                    })
                    .collect()
            };
            let n_p = rng.below(8);
            let preds = gen_set(&mut rng, n_p);
            let n_g = rng.below(8) + 1;
            let gts = gen_set(&mut rng, n_g);
            let mut prev = usize::MAX;
            for t in thresholds {
                let m = match_elements(&preds, &gts, t).len();
                assert!(m <= prev, "matched count rose with threshold");
                prev = m;
            }
        }
    }

    #[test]
    fn permutation_invariant_with_distinct_ious() {
        let gts = vec![
            el("button", bx(0.10, 0.10, 0.30, 0.30)),
            el("button", bx(0.50, 0.50, 0.75, 0.75)),
            el("button", bx(0.20, 0.60, 0.45, 0.85)),
        ];
        let preds = vec![
            el("button", bx(0.11, 0.10, 0.30, 0.30)),
            el("button", bx(0.52, 0.50, 0.75, 0.77)),
            el("button", bx(0.20, 0.63, 0.45, 0.85)),
        ];
        let base = match_elements(&preds, &gts, 0.3).len();
        let orders = [[0usize, 1, 2], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        for order in orders {
            let shuffled: Vec<UIElement> = order.iter().map(|&i| preds[i].clone()).collect();
            assert_eq!(match_elements(&shuffled, &gts, 0.3).len(), base);
        }
    }

    #[test]
    fn evaluate_flags_missing_and_unknown_records() {
        let gts = vec![
            EvalRecord {
                record_id: "r1".to_string(),
                elements: vec![el("button", bx(0.1, 0.1, 0.3, 0.3))],
            },
            EvalRecord {
                record_id: "r2".to_string(),
                elements: vec![el("button", bx(0.5, 0.5, 0.8, 0.8))],
            },
        ];
        let preds = vec![
            EvalRecord {
                record_id: "r1".to_string(),
                elements: vec![el("button", bx(0.1, 0.1, 0.3, 0.3))],
            },
            EvalRecord {
                record_id: "zz".to_string(),
                elements: vec![el("button", bx(0.5, 0.5, 0.8, 0.8))],
            },
        ];
        let report = evaluate_records(&preds, &gts, &[0.5], true);
        assert_eq!(report.missing_records, vec!["r2".to_string()]);
        assert_eq!(report.unknown_records, vec!["zz".to_string()]);
        let t = &report.thresholds[0];
        assert_eq!((t.matched, t.n_pred, t.n_gt), (1, 1, 2));
        assert_eq!(t.precision, 1.0);
        assert_eq!(t.recall, 0.5);
    }

    #[test]
    fn micro_equals_macro_for_equal_element_counts() {
        let mut rng = RngStream::from_seed_value(12);
        let per_record = 3usize;
        let mut gts = Vec::new();
        let mut preds = Vec::new();
        for r in 0..20 {
            let mut gt_elems = Vec::new();
            let mut pred_elems = Vec::new();
            for _ in 0..per_record {
                let w = rng.inner().gen_range(0.08..0.3);
                let h = rng.inner().gen_range(0.08..0.3);
                let x0 = rng.inner().gen_range(0.0..1.0 - w);
                let y0 = rng.inner().gen_range(0.0..1.0 - h);
                gt_elems.push(el("button", bx(x0, y0, x0 + w, y0 + h)));
                // Jittered prediction: sometimes close, sometimes off.
                let dx = rng.inner().gen_range(-0.1..0.1);
                let x0p = (x0 + dx).clamp(0.0, 1.0 - w);
                pred_elems.push(el("button", bx(x0p, y0, x0p + w, y0 + h)));
            }
            gts.push(EvalRecord {
                record_id: alloc::format!("r{r}"),
                elements: gt_elems,
            });
            preds.push(EvalRecord {
                record_id: alloc::format!("r{r}"),
                elements: pred_elems,
            });
        }
        let report = evaluate_records(&preds, &gts, &[0.1, 0.5], true);
        for t in &report.thresholds {
            assert!((t.precision - t.macro_precision).abs() < 1e-12);
            assert!((t.recall - t.macro_recall).abs() < 1e-12);
            assert!((t.f1 - t.macro_f1).abs() < 1e-12);
        }
    }

    #[test]
    fn evaluate_perfect_predictions_all_ones() {
        let gts: Vec<EvalRecord> = (0..5)
            .map(|r| EvalRecord {
                record_id: alloc::format!("r{r}"),
                elements: vec![
                    el("button", bx(0.1, 0.1, 0.3, 0.3)),
                    el("icon", bx(0.6, 0.6, 0.7, 0.7)),
                ],
            })
            .collect();
        let report = evaluate_records(&gts, &gts, &[0.1, 0.3, 0.5, 0.7], true);
        for t in &report.thresholds {
            assert_eq!((t.precision, t.recall, t.f1), (1.0, 1.0, 1.0));
        }
        assert!(report.missing_records.is_empty());
        assert!(report.unknown_records.is_empty());
    }
}
