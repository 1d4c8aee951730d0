use super::{match_detections, GroundTruthFrame};
use crate::geometry::{GaussianBox, NUM_CLASSES};

/// A ranked detection outcome for AP computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredMatch {
    pub score: f64,
    pub true_positive: bool,
}

/// 11-point interpolated average precision.
///
/// Detections are ranked by descending score (stable on ties). At each recall
/// level `r ∈ {0, 0.1, …, 1}` the interpolated precision is the best
/// precision at any cutoff whose recall reaches `r`; AP is their mean.
/// Returns `None` when there are no ground-truth objects.
pub fn average_precision(matches: &[ScoredMatch], n_gt: usize) -> Option<f64> {
    if n_gt == 0 {
        return None;
    }
    let mut ranked = matches.to_vec();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score));

    // best[r] = max precision over cutoffs with 10·tp >= r·n_gt.
    let mut best = [0.0f64; 11];
    let mut tp = 0usize;
    for (k, m) in ranked.iter().enumerate() {
        if m.true_positive {
            tp += 1;
        }
        let precision = tp as f64 / (k + 1) as f64;
        // Highest recall step reached so far; integer test avoids 0.1 rounding.
        let reached = (0..=10).rev().find(|&r| 10 * tp >= r * n_gt).unwrap_or(0);
        for slot in best.iter_mut().take(reached + 1) {
            if precision > *slot {
                *slot = precision;
            }
        }
    }
    Some(best.iter().sum::<f64>() / 11.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassStats {
    /// `None` when the class has no ground truth (excluded from mAP).
    pub ap: Option<f64>,
    pub n_gt: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub classes: [ClassStats; NUM_CLASSES],
    /// Unweighted mean AP over classes with ground truth; 0 when none have.
    pub map: f64,
}

impl EvalReport {
    pub fn excluded_classes(&self) -> Vec<u8> {
        (0..NUM_CLASSES as u8)
            .filter(|&c| self.classes[usize::from(c)].ap.is_none())
            .collect()
    }
}

/// Matches every frame and computes per-class AP and mAP over the corpus.
pub fn evaluate<'a, I>(frames: I, iou_gate: f64) -> EvalReport
where
    I: IntoIterator<Item = (&'a GroundTruthFrame, &'a [GaussianBox])>,
{
    let mut ranked: [Vec<ScoredMatch>; NUM_CLASSES] = Default::default();
    let mut classes = [ClassStats::default(); NUM_CLASSES];
    for (gt, dets) in frames {
        for o in &gt.objects {
            classes[usize::from(o.class_id)].n_gt += 1;
        }
        for m in match_detections(dets, gt, iou_gate) {
            let c = usize::from(m.det.class_id);
            if c >= NUM_CLASSES {
                continue;
            }
            let hit = m.gt_index.is_some();
            if hit {
                classes[c].tp += 1;
            } else {
                classes[c].fp += 1;
            }
            ranked[c].push(ScoredMatch {
                score: m.det.score,
                true_positive: hit,
            });
        }
    }
    let mut sum = 0.0;
    let mut counted = 0;
    for (stats, r) in classes.iter_mut().zip(&ranked) {
        stats.fn_ = stats.n_gt - stats.tp;
        stats.ap = average_precision(r, stats.n_gt);
        if let Some(ap) = stats.ap {
            sum += ap;
            counted += 1;
        }
    }
    EvalReport {
        classes,
        map: if counted > 0 { sum / counted as f64 } else { 0.0 },
    }
}
