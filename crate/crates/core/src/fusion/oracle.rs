//! A line-by-line transcription of the multi-source fusion loop with no
//! caching or scratch reuse, kept as a differential-testing reference for
//! [`multi_source_nms`](super::multi_source_nms).
//!
//! Everything is recomputed from the box means on every use: IoUs, corner
//! coordinates, pool membership. It is O(n³) per frame and only meant for
//! small inputs.

use super::{Decay, DetectionSet, FusionConfig};
use crate::geometry::{GaussianBox, Modality, NUM_CLASSES};
use crate::rng::Sequence;

/// Random differential-test input: `n_rgb` camera and `n_depth` depth boxes
/// jittered around a few shared object centres so that every overlap case
/// occurs. About a third of the frames quantize scores to force ties.
pub fn random_instance(rng: &mut Sequence, n_rgb: usize, n_depth: usize) -> (DetectionSet, DetectionSet) {
    let objects = 1 + rng.below(4 + (n_rgb + n_depth) / 4);
    let centres: Vec<[f64; 4]> = (0..objects)
        .map(|_| [rng.range(20.0, 480.0), rng.range(20.0, 110.0), rng.range(8.0, 80.0), rng.range(8.0, 50.0)])
        .collect();
    let quantize = rng.uniform() < 0.35;
    let mut make = |modality: Modality, n: usize| {
        let boxes = (0..n)
            .map(|_| {
                let c = centres[rng.below(objects)];
                let jitter = rng.range(0.0, 0.35);
                let mean = [
                    c[0] + jitter * c[2] * rng.normal(),
                    c[1] + jitter * c[3] * rng.normal(),
                    c[2] * (1.0 + 0.5 * jitter * rng.normal()).clamp(0.3, 3.0),
                    c[3] * (1.0 + 0.5 * jitter * rng.normal()).clamp(0.3, 3.0),
                ];
                let var = std::array::from_fn(|_| 10f64.powf(rng.range(-1.5, 1.5)));
                let mut score = rng.range(0.0, 1.0);
                if quantize {
                    score = (score * 8.0).ceil() / 8.0;
                }
                GaussianBox {
                    mean,
                    var,
                    score: score.clamp(0.0, 1.0),
                    class_id: rng.below(NUM_CLASSES) as u8,
                    modality,
                }
            })
            .collect();
        DetectionSet { boxes }
    };
    let rgb = make(Modality::Rgb, n_rgb);
    let depth = make(Modality::Depth, n_depth);
    (rgb, depth)
}

pub fn oracle_multi_source_nms(
    rgb: &DetectionSet,
    depth: &DetectionSet,
    cfg: &FusionConfig,
) -> DetectionSet {
    let mut all: Vec<GaussianBox> = Vec::new();
    if cfg.per_class {
        for class in 0..=u8::MAX {
            let r: Vec<GaussianBox> = rgb.boxes().iter().filter(|b| b.class_id == class).copied().collect();
            let d: Vec<GaussianBox> = depth.boxes().iter().filter(|b| b.class_id == class).copied().collect();
            if !r.is_empty() || !d.is_empty() {
                all.extend(literal(&r, &d, cfg));
            }
        }
    } else {
        all = literal(rgb.boxes(), depth.boxes(), cfg);
    }
    all.sort_by(|a, b| b.score.total_cmp(&a.score));
    DetectionSet { boxes: all }
}

fn literal(b_r: &[GaussianBox], b_p: &[GaussianBox], cfg: &FusionConfig) -> Vec<GaussianBox> {
    // B <- B_r ∪ B_p, S <- S_r ∪ S_p, C <- C_r ∪ C_p
    let b: Vec<(GaussianBox, Modality)> = b_r
        .iter()
        .map(|x| (*x, Modality::Rgb))
        .chain(b_p.iter().map(|x| (*x, Modality::Depth)))
        .collect();
    let mut s: Vec<f64> = b.iter().map(|(x, _)| x.score).collect();
    let c: Vec<[f64; 4]> = b.iter().map(|(x, _)| x.var).collect();
    // T <- B (minus boxes that could never be emitted)
    let mut t: Vec<usize> = (0..b.len())
        .filter(|&i| s[i] > 0.0 && s[i] >= cfg.score_floor)
        .collect();
    let mut d = Vec::new();

    while !t.is_empty() {
        // m <- argmax S over T
        let mut m = usize::MAX;
        for i in 0..b.len() {
            if t.contains(&i) && (m == usize::MAX || s[i] > s[m]) {
                m = i;
            }
        }
        let big_m = b[m].0;
        // T <- T - M
        t.retain(|&i| i != m);
        // S <- S f(IoU(M, T))
        for i in 0..b.len() {
            if t.contains(&i) {
                s[i] = f(s[i], naive_iou(&big_m, &b[i].0), cfg);
            }
        }

        let mine = b[m].1;
        let others: Vec<usize> = (0..b.len()).filter(|&i| t.contains(&i) && b[i].1 != mine).collect();
        let mut idx: Vec<usize> = Vec::new();
        let own_only;
        let gate;
        if others.is_empty() {
            gate = cfg.t1;
            own_only = true;
        } else {
            let mut best = 0.0f64;
            for (n, &i) in others.iter().enumerate() {
                let v = naive_iou(&big_m, &b[i].0);
                best = if n == 0 { v } else { best.max(v) };
            }
            if best >= cfg.t2 {
                gate = cfg.t2;
                own_only = false;
            } else if best >= cfg.t1 {
                gate = cfg.t1;
                own_only = false;
            } else {
                gate = cfg.t1;
                own_only = true;
            }
        }
        for i in 0..b.len() {
            if i == m {
                idx.push(i);
            } else if t.contains(&i)
                && naive_iou(&big_m, &b[i].0) >= gate
                && (!own_only || b[i].1 == mine)
            {
                idx.push(i);
            }
        }

        // M <- B[idx]/C[idx] / sum(1/C[idx]), written as offsets from M
        let mut fused = big_m;
        for k in 0..4 {
            let mut num = 0.0;
            let mut den = 0.0;
            for &i in &idx {
                num += (b[i].0.mean[k] - big_m.mean[k]) / c[i][k];
                den += 1.0 / c[i][k];
            }
            fused.mean[k] = big_m.mean[k] + num / den;
            fused.var[k] = 1.0 / den;
        }
        fused.score = s[m];
        d.push(fused);

        t.retain(|i| !idx.contains(i));
        t.retain(|&i| s[i] > 0.0 && s[i] >= cfg.score_floor);
    }
    d
}

fn f(score: f64, overlap: f64, cfg: &FusionConfig) -> f64 {
    match cfg.decay {
        Decay::Linear if overlap > cfg.t1 => score * (1.0 - overlap),
        Decay::Linear => score,
        Decay::Gaussian { sigma } => score * (-(overlap * overlap) / sigma).exp(),
    }
}

fn naive_iou(a: &GaussianBox, b: &GaussianBox) -> f64 {
    let edges = |g: &GaussianBox| {
        [
            g.mean[0] - g.mean[2] / 2.0,
            g.mean[1] - g.mean[3] / 2.0,
            g.mean[0] + g.mean[2] / 2.0,
            g.mean[1] + g.mean[3] / 2.0,
        ]
    };
    let (p, q) = (edges(a), edges(b));
    let iw = p[2].min(q[2]) - p[0].max(q[0]);
    let ih = p[3].min(q[3]) - p[1].max(q[1]);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    let union = (p[2] - p[0]) * (p[3] - p[1]) + (q[2] - q[0]) * (q[3] - q[1]) - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}
