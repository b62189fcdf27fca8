//! Scoring a recovered trace against ground truth: stroke count, traversal
//! direction and DTW trajectory distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace_model::{resample, OnlineTrace, Point, Stroke};

/// Resampling spacing applied to every stroke before comparison.
pub const EVAL_SPACING: f64 = 1.0;
/// Default match acceptance: per-point DTW up to this many average widths.
pub const DEFAULT_MATCH_THRESHOLD_SCALE: f64 = 3.0;

/// Dynamic time warping cost with Euclidean point distance, full
/// alignment and no band constraint.
pub fn dtw(a: &[Point], b: &[Point]) -> f64 {
    assert!(
        !a.is_empty() && !b.is_empty(),
        "dtw needs nonempty sequences"
    );
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![0.0; m];
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            let cost = p.dist(q);
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let up = prev[j];
                let left = if j > 0 { cur[j - 1] } else { f64::INFINITY };
                let diag = if j > 0 { prev[j - 1] } else { f64::INFINITY };
                up.min(left).min(diag)
            };
            cur[j] = cost + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

pub fn dtw_per_point(a: &[Point], b: &[Point]) -> f64 {
    dtw(a, b) / a.len().max(b.len()) as f64
}

fn reversed(points: &[Point]) -> Vec<Point> {
    points.iter().rev().copied().collect()
}

/// True when the recovered stroke runs the same way as the truth stroke,
/// i.e. aligning it forward costs no more than aligning it reversed.
pub fn direction_agreement(truth: &Stroke, recovered: &Stroke) -> bool {
    let forward = dtw(&truth.points, &recovered.points);
    let backward = dtw(&truth.points, &reversed(&recovered.points));
    forward <= backward
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub truth_id: usize,
    pub recovered_id: usize,
    pub dtw_per_point: f64,
    pub direction_correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub truth_strokes: usize,
    pub recovered_strokes: usize,
    pub matched_pairs: Vec<MatchedPair>,
    pub unmatched_truth: Vec<usize>,
    pub unmatched_recovered: Vec<usize>,
    pub mean_dtw_per_point: Option<f64>,
    pub direction_accuracy: Option<f64>,
}

impl EvalReport {
    pub fn stroke_count_exact(&self) -> bool {
        self.truth_strokes == self.recovered_strokes
    }
}

/// Orientation-free per-point DTW cost of every `(truth, recovered)` pair.
pub fn cost_matrix(truth: &[Stroke], recovered: &[Stroke]) -> Vec<Vec<f64>> {
    truth
        .iter()
        .map(|t| {
            recovered
                .iter()
                .map(|r| {
                    let fwd = dtw_per_point(&t.points, &r.points);
                    let rev = dtw_per_point(&t.points, &reversed(&r.points));
                    fwd.min(rev)
                })
                .collect()
        })
        .collect()
}

/// Greedy assignment: pairs are accepted in ascending cost while both
/// strokes are free and the cost is at most `threshold`. Returns
/// `(truth index, recovered index, cost)` triples in acceptance order.
pub fn greedy_assignment(costs: &[Vec<f64>], threshold: f64) -> Vec<(usize, usize, f64)> {
    let mut candidates: Vec<(usize, usize, f64)> = costs
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &c)| (i, j, c)))
        .filter(|&(_, _, c)| c <= threshold)
        .collect();
    candidates.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let rows = costs.len();
    let cols = costs.first().map_or(0, Vec::len);
    let (mut used_t, mut used_r) = (vec![false; rows], vec![false; cols]);
    let mut out = Vec::new();
    for (i, j, c) in candidates {
        if !used_t[i] && !used_r[j] {
            used_t[i] = true;
            used_r[j] = true;
            out.push((i, j, c));
        }
    }
    out
}

/// Matches already-resampled strokes and fills the report.
pub fn match_strokes(truth: &[Stroke], recovered: &[Stroke], threshold: f64) -> EvalReport {
    let costs = cost_matrix(truth, recovered);
    let pairs = greedy_assignment(&costs, threshold);
    let matched_pairs: Vec<MatchedPair> = pairs
        .iter()
        .map(|&(i, j, c)| MatchedPair {
            truth_id: truth[i].id,
            recovered_id: recovered[j].id,
            dtw_per_point: c,
            direction_correct: direction_agreement(&truth[i], &recovered[j]),
        })
        .collect();
    let unmatched_truth = truth
        .iter()
        .enumerate()
        .filter(|(i, _)| !pairs.iter().any(|p| p.0 == *i))
        .map(|(_, s)| s.id)
        .collect();
    let unmatched_recovered = recovered
        .iter()
        .enumerate()
        .filter(|(j, _)| !pairs.iter().any(|p| p.1 == *j))
        .map(|(_, s)| s.id)
        .collect();
    let n = matched_pairs.len();
    let (mean_dtw_per_point, direction_accuracy) = if n == 0 {
        (None, None)
    } else {
        let mean = matched_pairs.iter().map(|p| p.dtw_per_point).sum::<f64>() / n as f64;
        let correct = matched_pairs.iter().filter(|p| p.direction_correct).count();
        (Some(mean), Some(correct as f64 / n as f64))
    };
    EvalReport {
        truth_strokes: truth.len(),
        recovered_strokes: recovered.len(),
        matched_pairs,
        unmatched_truth,
        unmatched_recovered,
        mean_dtw_per_point,
        direction_accuracy,
    }
}

pub fn evaluate(truth: &OnlineTrace, recovered: &OnlineTrace) -> Result<EvalReport> {
    evaluate_with(truth, recovered, DEFAULT_MATCH_THRESHOLD_SCALE)
}

/// Resamples both traces at 1 px and scores them. Matches are accepted up
/// to `threshold_scale` times the recovered trace's average width (the
/// truth's width when the recovered trace carries none).
pub fn evaluate_with(
    truth: &OnlineTrace,
    recovered: &OnlineTrace,
    threshold_scale: f64,
) -> Result<EvalReport> {
    if truth.image_size != recovered.image_size {
        return Err(Error::invalid(
            "image_size",
            format!(
                "truth is {}x{} but recovered is {}x{}",
                truth.image_size.0,
                truth.image_size.1,
                recovered.image_size.0,
                recovered.image_size.1
            ),
        ));
    }
    let width = if recovered.avg_width > 0.0 {
        recovered.avg_width
    } else {
        truth.avg_width
    };
    let prep = |t: &OnlineTrace| -> Vec<Stroke> {
        t.strokes
            .iter()
            .map(|s| resample(s, EVAL_SPACING))
            .collect()
    };
    Ok(match_strokes(
        &prep(truth),
        &prep(recovered),
        threshold_scale * width,
    ))
}

/// One corpus item's result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub item: String,
    /// True pen width when known (synthetic items).
    pub pen_width: Option<f64>,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub items: usize,
    /// Fraction of items whose recovered stroke count equals the truth's.
    pub stroke_count_exact_fraction: f64,
    /// Direction-correct pairs over all matched pairs in the corpus.
    pub direction_accuracy: Option<f64>,
    /// Mean of the per-item direction accuracies.
    pub mean_direction_accuracy: Option<f64>,
    /// Mean of the per-item mean DTW per point.
    pub mean_dtw_per_point: Option<f64>,
    /// Fraction of items with known pen width whose mean DTW per point is at
    /// most one pen width. Items without matches count as failures.
    pub dtw_within_pen_width_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub rows: Vec<CorpusRow>,
    pub summary: CorpusSummary,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn summarize(rows: Vec<CorpusRow>) -> CorpusReport {
    let items = rows.len();
    let exact = rows
        .iter()
        .filter(|r| r.report.stroke_count_exact())
        .count();
    let pairs: Vec<&MatchedPair> = rows.iter().flat_map(|r| &r.report.matched_pairs).collect();
    let direction_accuracy = (!pairs.is_empty())
        .then(|| pairs.iter().filter(|p| p.direction_correct).count() as f64 / pairs.len() as f64);
    let with_width: Vec<&CorpusRow> = rows.iter().filter(|r| r.pen_width.is_some()).collect();
    let dtw_within_pen_width_fraction = (!with_width.is_empty()).then(|| {
        let ok = with_width
            .iter()
            .filter(|r| matches!((r.report.mean_dtw_per_point, r.pen_width), (Some(d), Some(w)) if d <= w))
            .count();
        ok as f64 / with_width.len() as f64
    });
    let summary = CorpusSummary {
        items,
        stroke_count_exact_fraction: if items == 0 {
            0.0
        } else {
            exact as f64 / items as f64
        },
        direction_accuracy,
        mean_direction_accuracy: mean(rows.iter().filter_map(|r| r.report.direction_accuracy)),
        mean_dtw_per_point: mean(rows.iter().filter_map(|r| r.report.mean_dtw_per_point)),
        dtw_within_pen_width_fraction,
    };
    CorpusReport { rows, summary }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xy: &[(f64, f64)]) -> Vec<Point> {
        xy.iter()
            .enumerate()
            .map(|(t, &(x, y))| Point::new(x, y, t as u64))
            .collect()
    }

    #[test]
    fn dtw_basics() {
        let a = pts(&[(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)]);
        assert_eq!(dtw(&a, &a), 0.0);
        assert_eq!(dtw(&pts(&[(0.0, 0.0)]), &pts(&[(3.0, 4.0)])), 5.0);
        // one point against many: every point aligns to it
        let b = pts(&[(0.0, 0.0), (0.0, 1.0), (0.0, 2.0)]);
        assert_eq!(dtw(&pts(&[(0.0, 0.0)]), &b), 3.0);
        assert_eq!(dtw_per_point(&pts(&[(0.0, 0.0)]), &b), 1.0);
    }

    #[test]
    fn reversal_detected() {
        let s = Stroke::from_xy(0, (0..10).map(|i| (i as f64, (i * i) as f64 / 10.0)));
        assert!(direction_agreement(&s, &s));
        assert!(!direction_agreement(&s, &s.reversed()));
    }

    #[test]
    fn self_evaluation_is_perfect() {
        let mut t = OnlineTrace::new("t", (50, 50), 3.0);
        t.strokes
            .push(Stroke::from_xy(0, [(1.0, 1.0), (20.0, 5.0)]));
        t.strokes.push(Stroke::from_xy(
            1,
            [(30.0, 30.0), (30.0, 45.0), (40.0, 45.0)],
        ));
        let r = evaluate(&t, &t).unwrap();
        assert_eq!(r.matched_pairs.len(), 2);
        assert_eq!(r.mean_dtw_per_point, Some(0.0));
        assert_eq!(r.direction_accuracy, Some(1.0));
        assert!(r.unmatched_truth.is_empty() && r.unmatched_recovered.is_empty());
    }

    #[test]
    fn missing_recovered_stroke_is_unmatched() {
        let mut truth = OnlineTrace::new("t", (50, 50), 3.0);
        truth
            .strokes
            .push(Stroke::from_xy(0, [(1.0, 1.0), (20.0, 1.0)]));
        truth
            .strokes
            .push(Stroke::from_xy(1, [(1.0, 30.0), (20.0, 30.0)]));
        let mut rec = OnlineTrace::new("r", (50, 50), 3.0);
        rec.strokes
            .push(Stroke::from_xy(0, [(1.0, 30.5), (20.0, 30.5)]));
        let r = evaluate(&truth, &rec).unwrap();
        assert_eq!(r.matched_pairs.len(), 1);
        assert_eq!(r.matched_pairs[0].truth_id, 1);
        assert_eq!(r.unmatched_truth, vec![0]);
    }

    #[test]
    fn empty_recovered_matches_nothing() {
        let mut truth = OnlineTrace::new("t", (50, 50), 3.0);
        truth
            .strokes
            .push(Stroke::from_xy(0, [(1.0, 1.0), (20.0, 1.0)]));
        let rec = OnlineTrace::new("r", (50, 50), 0.0);
        let r = evaluate(&truth, &rec).unwrap();
        assert_eq!(r.unmatched_truth, vec![0]);
        assert_eq!(r.direction_accuracy, None);
    }

    #[test]
    fn size_mismatch_rejected() {
        let a = OnlineTrace::new("a", (10, 10), 1.0);
        let b = OnlineTrace::new("b", (10, 11), 1.0);
        assert!(evaluate(&a, &b).is_err());
    }

    #[test]
    fn far_strokes_are_not_matched() {
        let mut truth = OnlineTrace::new("t", (100, 100), 2.0);
        truth
            .strokes
            .push(Stroke::from_xy(0, [(1.0, 1.0), (20.0, 1.0)]));
        let mut rec = OnlineTrace::new("r", (100, 100), 2.0);
        rec.strokes
            .push(Stroke::from_xy(0, [(1.0, 80.0), (20.0, 80.0)]));
        let r = evaluate(&truth, &rec).unwrap();
        assert!(r.matched_pairs.is_empty());
        assert_eq!(r.unmatched_recovered, vec![0]);
    }
}
