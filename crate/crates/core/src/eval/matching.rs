use super::GroundTruthFrame;
use crate::geometry::{iou, CornerBox, GaussianBox};

/// Outcome for one detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub det: GaussianBox,
    /// Index into the frame's objects, `None` for a false positive.
    pub gt_index: Option<usize>,
    /// IoU with the claimed object, or the best same-class IoU when unmatched.
    pub iou: f64,
}

/// Greedy matching: detections in descending score order each claim the
/// highest-IoU unclaimed same-class object with IoU >= `iou_gate`.
///
/// Equal scores keep input order; equal IoUs go to the lower object index.
/// The result is in processing order.
pub fn match_detections(dets: &[GaussianBox], gt: &GroundTruthFrame, iou_gate: f64) -> Vec<Match> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));
    let mut claimed = vec![false; gt.objects.len()];

    order
        .into_iter()
        .map(|i| {
            let d = dets[i];
            let dc: CornerBox = d.to_corners();
            let mut best: Option<(usize, f64)> = None;
            let mut best_any = 0.0f64;
            for (j, o) in gt.objects.iter().enumerate() {
                if o.class_id != d.class_id {
                    continue;
                }
                let v = iou(&dc, &o.bbox);
                best_any = best_any.max(v);
                if claimed[j] || v < iou_gate {
                    continue;
                }
                if best.map_or(true, |(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            match best {
                Some((j, v)) => {
                    claimed[j] = true;
                    Match {
                        det: d,
                        gt_index: Some(j),
                        iou: v,
                    }
                }
                None => Match {
                    det: d,
                    gt_index: None,
                    iou: best_any,
                },
            }
        })
        .collect()
}
