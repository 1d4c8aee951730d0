//! Synthetic ground-truth corpus in the cropped 512×128 frame.
//!
//! Frames hold 1–8 objects with a 60/25/15 car/pedestrian/cyclist mix.
//! Objects stand on the lower part of the frame and overlap each other by at
//! most [`MAX_OBJECT_IOU`].

use super::{GroundTruthFrame, GtObject};
use crate::geometry::{iou, CornerBox, CLASS_CAR, CLASS_CYCLIST, CLASS_PEDESTRIAN};
use crate::rng::{CounterRng, Sequence};

pub const FRAME_SIZE: (f64, f64) = (512.0, 128.0);
pub const GOLDEN_FRAMES: usize = 500;
pub const GOLDEN_SEED: u64 = 20_220_616;
pub const MAX_OBJECT_IOU: f64 = 0.2;
const PLACEMENT_TRIES: usize = 32;

/// Draws a class id with the 60/25/15 mix.
pub fn sample_class(rng: &mut Sequence) -> u8 {
    let u = rng.uniform();
    if u < 0.60 {
        CLASS_CAR
    } else if u < 0.85 {
        CLASS_PEDESTRIAN
    } else {
        CLASS_CYCLIST
    }
}

/// Draws a plausible box of `class_id` inside the frame.
pub fn sample_box(rng: &mut Sequence, class_id: u8) -> CornerBox {
    let (w, h) = match class_id {
        CLASS_CAR => {
            let w = rng.range(24.0, 110.0);
            (w, (w * rng.range(0.45, 0.75)).min(60.0))
        }
        CLASS_PEDESTRIAN => {
            let h = rng.range(18.0, 56.0);
            (h * rng.range(0.3, 0.5), h)
        }
        _ => {
            let h = rng.range(18.0, 50.0);
            (h * rng.range(0.5, 0.9), h)
        }
    };
    let cx = rng.range(w / 2.0, FRAME_SIZE.0 - w / 2.0);
    let bottom = rng.range(h.max(64.0), FRAME_SIZE.1);
    let round = |v: f64| (v * 100.0).round() / 100.0;
    let (x0, x1) = (round(cx - w / 2.0), round(cx + w / 2.0));
    let (y0, y1) = (round(bottom - h), round(bottom));
    CornerBox {
        x_min: x0.max(0.0),
        y_min: y0.max(0.0),
        x_max: x1.min(FRAME_SIZE.0),
        y_max: y1.min(FRAME_SIZE.1),
    }
}

pub fn synthetic_corpus(frames: usize, seed: u64) -> Vec<GroundTruthFrame> {
    (0..frames)
        .map(|i| {
            let mut rng = Sequence::new(CounterRng::new(seed, 0xC0_4B05).substream(i as u64));
            let n = 1 + rng.below(8);
            let mut objects: Vec<GtObject> = Vec::with_capacity(n);
            for _ in 0..n {
                let class_id = sample_class(&mut rng);
                for _ in 0..PLACEMENT_TRIES {
                    let bbox = sample_box(&mut rng, class_id);
                    if objects.iter().all(|o| iou(&o.bbox, &bbox) <= MAX_OBJECT_IOU) {
                        objects.push(GtObject { class_id, bbox });
                        break;
                    }
                }
            }
            GroundTruthFrame {
                frame_id: format!("{i:06}"),
                objects,
            }
        })
        .collect()
}

pub fn golden_corpus() -> Vec<GroundTruthFrame> {
    synthetic_corpus(GOLDEN_FRAMES, GOLDEN_SEED)
}
