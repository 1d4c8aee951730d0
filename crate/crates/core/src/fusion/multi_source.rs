//! Uncertainty-aware fusion NMS over two modalities.
//!
//! Both pools are merged and processed greedily. After each selection the
//! remaining scores are decayed, the selected box is compared against what is
//! left of the *other* modality's pool, and the resulting [`OverlapCase`]
//! decides which boxes are averaged into it:
//!
//! | case           | fusion members                                  |
//! |----------------|-------------------------------------------------|
//! | `Corroborated` | any remaining box with IoU >= t2                |
//! | `Ambiguous`    | any remaining box with IoU >= t1                |
//! | `Independent`  | remaining boxes of the selected modality, IoU >= t1 |
//!
//! Members are averaged per coordinate with inverse-variance weights and
//! removed from the pool. The fused variance is the inverse precision sum.

use super::{per_class, Decay, DetectionSet, FusionConfig, OverlapCase};
use crate::geometry::{iou, CornerBox, GaussianBox, Modality};

/// Decays `score` given its box's IoU with the selected box.
pub fn decay(score: f64, overlap: f64, cfg: &FusionConfig) -> f64 {
    match cfg.decay {
        Decay::Linear => {
            if overlap > cfg.t1 {
                score * (1.0 - overlap)
            } else {
                score
            }
        }
        Decay::Gaussian { sigma } => score * (-(overlap * overlap) / sigma).exp(),
    }
}

pub fn classify_overlap(iou_value: f64, cfg: &FusionConfig) -> OverlapCase {
    if iou_value >= cfg.t2 {
        OverlapCase::Corroborated
    } else if iou_value >= cfg.t1 {
        OverlapCase::Ambiguous
    } else {
        OverlapCase::Independent
    }
}

/// Inverse-variance weighted average of `members`, coordinate by coordinate,
/// in iteration order. Score, class and modality come from `anchor`.
///
/// The mean is accumulated as offsets from the anchor,
/// `a + Σ((x − a)/σ²) / Σ(1/σ²)`, so members that agree with the anchor
/// reproduce its coordinates bit for bit.
///
/// Returns `None` when `members` is empty.
pub fn fuse_inverse_variance<'a, I>(anchor: &GaussianBox, members: I) -> Option<GaussianBox>
where
    I: IntoIterator<Item = &'a GaussianBox>,
{
    let mut num = [0.0f64; 4];
    let mut den = [0.0f64; 4];
    let mut any = false;
    for m in members {
        any = true;
        for k in 0..4 {
            num[k] += (m.mean[k] - anchor.mean[k]) / m.var[k];
            den[k] += 1.0 / m.var[k];
        }
    }
    if !any {
        return None;
    }
    let mut out = *anchor;
    for k in 0..4 {
        out.mean[k] = anchor.mean[k] + num[k] / den[k];
        out.var[k] = 1.0 / den[k];
    }
    Some(out)
}

/// Refines `pool[anchor]` with every pool box whose IoU with it exceeds
/// `gate` (the anchor itself always takes part).
///
/// # Panics
///
/// If `anchor` is out of bounds.
pub fn softer_update(pool: &[GaussianBox], anchor: usize, gate: f64) -> GaussianBox {
    let a = pool[anchor];
    let ac = a.to_corners();
    let members = pool
        .iter()
        .enumerate()
        .filter(|(i, b)| *i == anchor || iou(&ac, &b.to_corners()) > gate)
        .map(|(_, b)| b);
    fuse_inverse_variance(&a, members).expect("anchor is always a member")
}

/// Fuses RGB and depth detections of one frame.
///
/// Inputs are not required to be sorted. The result is in descending score
/// order (scores are the selected boxes' decayed scores at selection time).
pub fn multi_source_nms(rgb: &DetectionSet, depth: &DetectionSet, cfg: &FusionConfig) -> DetectionSet {
    let mut pool = Pool::default();
    let boxes = if cfg.per_class {
        per_class([rgb.boxes(), depth.boxes()], |r, d| pool.run(r, d, cfg))
    } else {
        pool.run(rgb.boxes(), depth.boxes(), cfg)
    };
    DetectionSet { boxes }
}

/// Single-modality softer-NMS with the same decay, gating at `t1` and pool
/// consumption as [`multi_source_nms`].
pub fn softer_nms(dets: &DetectionSet, cfg: &FusionConfig) -> DetectionSet {
    let run = |boxes: &[GaussianBox]| {
        let corners: Vec<CornerBox> = boxes.iter().map(GaussianBox::to_corners).collect();
        let mut scores: Vec<f64> = boxes.iter().map(|b| b.score).collect();
        let mut alive: Vec<bool> = scores.iter().map(|&s| keeps(s, cfg)).collect();
        let mut out = Vec::new();
        let mut overlaps = vec![0.0; boxes.len()];
        loop {
            let mut best: Option<usize> = None;
            for i in (0..boxes.len()).filter(|&i| alive[i]) {
                if best.map_or(true, |m| scores[i] > scores[m]) {
                    best = Some(i);
                }
            }
            let Some(m) = best else { break };
            alive[m] = false;
            for j in (0..boxes.len()).filter(|&j| alive[j]) {
                overlaps[j] = iou(&corners[m], &corners[j]);
                scores[j] = decay(scores[j], overlaps[j], cfg);
            }
            let members: Vec<usize> = (0..boxes.len())
                .filter(|&j| j == m || (alive[j] && overlaps[j] >= cfg.t1))
                .collect();
            let mut fused = fuse_inverse_variance(&boxes[m], members.iter().map(|&j| &boxes[j]))
                .expect("selected box is a member");
            fused.score = scores[m];
            out.push(fused);
            for &j in &members {
                alive[j] = false;
            }
            for j in 0..boxes.len() {
                alive[j] = alive[j] && keeps(scores[j], cfg);
            }
        }
        out
    };
    let boxes = if cfg.per_class {
        per_class([dets.boxes(), &[]], |b, _| run(b))
    } else {
        run(dets.boxes())
    };
    DetectionSet { boxes }
}

#[inline]
fn keeps(score: f64, cfg: &FusionConfig) -> bool {
    score > 0.0 && score >= cfg.score_floor
}

/// Reusable scratch space so that per-class runs do not reallocate.
#[derive(Default)]
struct Pool {
    boxes: Vec<GaussianBox>,
    source: Vec<Modality>,
    corners: Vec<CornerBox>,
    areas: Vec<f64>,
    scores: Vec<f64>,
    overlap: Vec<f64>,
    // Indices of boxes still in the working pool, ascending.
    live: Vec<usize>,
    members: Vec<usize>,
}

impl Pool {
    fn run(&mut self, rgb: &[GaussianBox], depth: &[GaussianBox], cfg: &FusionConfig) -> Vec<GaussianBox> {
        self.load(rgb, depth, cfg);
        let mut out = Vec::new();

        while !self.live.is_empty() {
            // Highest working score; the earliest pool index wins ties.
            let mut pos = 0;
            for p in 1..self.live.len() {
                if self.scores[self.live[p]] > self.scores[self.live[pos]] {
                    pos = p;
                }
            }
            let m = self.live.remove(pos);
            let m_src = self.source[m];

            let mut best_other: Option<f64> = None;
            for &j in &self.live {
                let o = self.iou_with(m, j);
                self.overlap[j] = o;
                self.scores[j] = decay(self.scores[j], o, cfg);
                if self.source[j] != m_src {
                    best_other = Some(best_other.map_or(o, |b: f64| b.max(o)));
                }
            }

            let case = best_other.map_or(OverlapCase::Independent, |o| classify_overlap(o, cfg));
            let (gate, own_only) = match case {
                OverlapCase::Corroborated => (cfg.t2, false),
                OverlapCase::Ambiguous => (cfg.t1, false),
                OverlapCase::Independent => (cfg.t1, true),
            };

            // Members in ascending pool index, the selected box at its own slot.
            self.members.clear();
            let mut inserted = false;
            for &j in &self.live {
                if !inserted && j > m {
                    self.members.push(m);
                    inserted = true;
                }
                if self.overlap[j] >= gate && (!own_only || self.source[j] == m_src) {
                    self.members.push(j);
                }
            }
            if !inserted {
                self.members.push(m);
            }

            let boxes = &self.boxes;
            let mut fused = fuse_inverse_variance(&boxes[m], self.members.iter().map(|&j| &boxes[j]))
                .expect("selected box is a member");
            fused.score = self.scores[m];
            out.push(fused);

            let (members, scores) = (&self.members, &self.scores);
            self.live
                .retain(|j| members.binary_search(j).is_err() && keeps(scores[*j], cfg));
        }
        out
    }

    fn load(&mut self, rgb: &[GaussianBox], depth: &[GaussianBox], cfg: &FusionConfig) {
        self.boxes.clear();
        self.source.clear();
        self.boxes.extend_from_slice(rgb);
        self.boxes.extend_from_slice(depth);
        self.source.extend(rgb.iter().map(|_| Modality::Rgb));
        self.source.extend(depth.iter().map(|_| Modality::Depth));
        self.corners.clear();
        self.corners.extend(self.boxes.iter().map(GaussianBox::to_corners));
        self.areas.clear();
        self.areas.extend(self.corners.iter().map(CornerBox::area));
        self.scores.clear();
        self.scores.extend(self.boxes.iter().map(|b| b.score));
        self.overlap.clear();
        self.overlap.resize(self.boxes.len(), 0.0);
        self.live.clear();
        let scores = &self.scores;
        self.live.extend((0..scores.len()).filter(|&i| keeps(scores[i], cfg)));
    }

    /// Same arithmetic as [`iou`], with cached areas.
    #[inline]
    fn iou_with(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (&self.corners[a], &self.corners[b]);
        let iw = p.x_max.min(q.x_max) - p.x_min.max(q.x_min);
        let ih = p.y_max.min(q.y_max) - p.y_min.max(q.y_min);
        if iw <= 0.0 || ih <= 0.0 {
            return 0.0;
        }
        let inter = iw * ih;
        let union = self.areas[a] + self.areas[b] - inter;
        if union <= 0.0 {
            return 0.0;
        }
        (inter / union).clamp(0.0, 1.0)
    }
}
