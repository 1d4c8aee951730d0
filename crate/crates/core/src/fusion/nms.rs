use super::{per_class, DetectionSet, FusionConfig};
use crate::geometry::{iou, CornerBox, GaussianBox};
use crate::rng::CounterRng;

/// Greedy NMS: repeatedly keep the highest-scoring box and discard every
/// remaining box whose IoU with it exceeds `iou_thresh`.
///
/// Output is in descending score order; on equal scores the box that came
/// first in the input wins. Class ids are ignored; see [`avg_fusion`] or
/// wrap in a per-class split for class-aware suppression.
pub fn standard_nms(dets: &DetectionSet, iou_thresh: f64) -> DetectionSet {
    DetectionSet {
        boxes: greedy(dets.boxes(), iou_thresh),
    }
}

/// [`standard_nms`] run separately for each class; output merged by
/// descending score.
pub fn standard_nms_per_class(dets: &DetectionSet, iou_thresh: f64) -> DetectionSet {
    DetectionSet {
        boxes: per_class([dets.boxes(), &[]], |a, _| greedy(a, iou_thresh)),
    }
}

pub(crate) fn greedy(boxes: &[GaussianBox], iou_thresh: f64) -> Vec<GaussianBox> {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| boxes[b].score.total_cmp(&boxes[a].score));
    let corners: Vec<CornerBox> = boxes.iter().map(GaussianBox::to_corners).collect();

    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if kept.iter().all(|&k| iou(&corners[k], &corners[i]) <= iou_thresh) {
            kept.push(i);
        }
    }
    kept.into_iter().map(|i| boxes[i]).collect()
}

/// The averaging baseline: pool both modalities, randomly drop half of the
/// pooled boxes (seeded), and run one greedy NMS over the rest.
///
/// `floor(n / 2)` boxes are dropped; which ones is decided by ranking each
/// pool index by a counter-based hash of `(seed, index)`.
pub fn avg_fusion(
    rgb: &DetectionSet,
    depth: &DetectionSet,
    cfg: &FusionConfig,
    seed: u64,
) -> DetectionSet {
    let pool: Vec<GaussianBox> = rgb.boxes().iter().chain(depth.boxes()).copied().collect();
    let rng = CounterRng::new(seed, 0xA7F0);
    let mut ranked: Vec<usize> = (0..pool.len()).collect();
    ranked.sort_by_key(|&i| (rng.u64_at(i as u64), i));
    let mut keep = vec![true; pool.len()];
    for &i in &ranked[..pool.len() / 2] {
        keep[i] = false;
    }
    let survivors: Vec<GaussianBox> = pool
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(b, _)| *b)
        .collect();

    let boxes = if cfg.per_class {
        per_class([&survivors, &[]], |a, _| greedy(a, cfg.single_modal_nms_iou))
    } else {
        greedy(&survivors, cfg.single_modal_nms_iou)
    };
    DetectionSet { boxes }
}
