//! A synthetic stand-in for a trained single-modality detector.
//!
//! For every ground-truth object the simulated detector either misses it or
//! reports a Gaussian box whose coordinates are the true ones plus
//! `N(0, σ_eff²)` noise, where `σ_eff` grows with corruption severity. The
//! reported variance tracks `σ_eff²` to a configurable degree ("fidelity"),
//! and confidence falls with the size-normalized localization error. A few
//! background false positives are added per frame.
//!
//! Random draws are keyed by `(seed, modality, frame id, object index)` and
//! do not depend on the corruption, so the same object receives the same
//! standard-normal perturbation at every severity and only its scale changes.

use super::corpus::{sample_box, sample_class};
use super::GroundTruthFrame;
use crate::corruption::{CorruptionKind, CorruptionSpec};
use crate::fusion::DetectionSet;
use crate::geometry::{GaussianBox, Modality, H, W};
use crate::rng::{splitmix64, CounterRng, Sequence};

/// Smallest variance ever reported (px²).
pub const MIN_VARIANCE: f64 = 1e-6;
const MIN_SIZE: f64 = 1.0;
const MAX_MISS: f64 = 0.95;

/// Per-kind, per-level multipliers on localization noise and miss rate.
/// Index as `[kind as usize][level - 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseResponse {
    pub sigma_mult: [[f64; 5]; 3],
    pub miss_mult: [[f64; 5]; 3],
}

impl NoiseResponse {
    pub fn multipliers(&self, c: &CorruptionSpec) -> (f64, f64) {
        if c.level == 0 {
            return (1.0, 1.0);
        }
        let (k, l) = (kind_index(c.kind), usize::from(c.level) - 1);
        (self.sigma_mult[k][l], self.miss_mult[k][l])
    }

    pub fn camera() -> Self {
        NoiseResponse {
            sigma_mult: [
                [1.25, 1.55, 1.95, 2.45, 3.05],
                [1.30, 1.65, 2.05, 2.55, 3.15],
                [1.20, 1.50, 1.85, 2.30, 2.85],
            ],
            miss_mult: [
                [1.5, 2.2, 3.0, 4.0, 5.2],
                [1.6, 2.3, 3.2, 4.3, 5.6],
                [1.7, 2.5, 3.5, 4.7, 6.2],
            ],
        }
    }

    /// Depth rasters are sparser, so blur and frost hurt relatively more than
    /// additive noise.
    pub fn lidar() -> Self {
        NoiseResponse {
            sigma_mult: [
                [1.20, 1.45, 1.80, 2.25, 2.80],
                [1.35, 1.70, 2.15, 2.70, 3.35],
                [1.30, 1.65, 2.05, 2.55, 3.20],
            ],
            miss_mult: [
                [1.4, 2.0, 2.8, 3.7, 4.8],
                [1.7, 2.5, 3.5, 4.7, 6.1],
                [1.6, 2.4, 3.3, 4.5, 5.8],
            ],
        }
    }
}

fn kind_index(k: CorruptionKind) -> usize {
    match k {
        CorruptionKind::GaussianNoise => 0,
        CorruptionKind::MotionBlur => 1,
        CorruptionKind::Frost => 2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimDetectorSpec {
    pub modality: Modality,
    /// Clean localization noise per coordinate, pixels.
    pub sigma_base: f64,
    /// Confidence of a perfectly localized detection.
    pub score_max: f64,
    /// How fast confidence falls with normalized localization error.
    pub score_sharpness: f64,
    /// Multiplicative confidence jitter in `[0, 1)`: score *= 1 - jitter·u.
    pub score_jitter: f64,
    /// Clean probability of missing an object.
    pub miss_base: f64,
    /// Expected background false positives per frame.
    pub fp_rate: f64,
    /// False-positive confidences are uniform in `[0, fp_score_max)`.
    pub fp_score_max: f64,
    /// 1: reported variance is the true noise variance; 0: a constant.
    pub fidelity: f64,
    /// Variance reported by a fully uninformative detector, px².
    pub constant_var: f64,
    pub response: NoiseResponse,
    pub seed: u64,
}

impl SimDetectorSpec {
    pub fn camera_default() -> Self {
        SimDetectorSpec {
            modality: Modality::Rgb,
            sigma_base: 1.6,
            score_max: 0.95,
            score_sharpness: 6.0,
            score_jitter: 0.25,
            miss_base: 0.08,
            fp_rate: 0.6,
            fp_score_max: 0.45,
            fidelity: 0.9,
            constant_var: 4.0,
            response: NoiseResponse::camera(),
            seed: 1,
        }
    }

    /// More accurate than the camera on clean data.
    pub fn lidar_default() -> Self {
        SimDetectorSpec {
            modality: Modality::Depth,
            sigma_base: 1.2,
            score_max: 0.95,
            score_sharpness: 6.0,
            score_jitter: 0.25,
            miss_base: 0.05,
            fp_rate: 0.5,
            fp_score_max: 0.45,
            fidelity: 0.9,
            constant_var: 4.0,
            response: NoiseResponse::lidar(),
            seed: 2,
        }
    }

    /// A detector that reproduces the ground truth exactly.
    pub fn perfect(modality: Modality) -> Self {
        SimDetectorSpec {
            modality,
            sigma_base: 0.0,
            score_max: 1.0,
            score_sharpness: 0.0,
            score_jitter: 0.0,
            miss_base: 0.0,
            fp_rate: 0.0,
            fp_score_max: 0.0,
            fidelity: 1.0,
            constant_var: 1.0,
            response: NoiseResponse {
                sigma_mult: [[1.0; 5]; 3],
                miss_mult: [[1.0; 5]; 3],
            },
            seed: 0,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let unit = [
            ("score_max", self.score_max),
            ("score_jitter", self.score_jitter),
            ("miss_base", self.miss_base),
            ("fp_score_max", self.fp_score_max),
            ("fidelity", self.fidelity),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(crate::Error::InvalidValue(format!("{name} must be in [0,1], got {v}")));
            }
        }
        let nonneg = [
            ("sigma_base", self.sigma_base),
            ("score_sharpness", self.score_sharpness),
            ("fp_rate", self.fp_rate),
            ("constant_var", self.constant_var),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(crate::Error::InvalidValue(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    fn reported_variance(&self, sigma_eff: f64) -> f64 {
        (self.fidelity * sigma_eff * sigma_eff + (1.0 - self.fidelity) * self.constant_var).max(MIN_VARIANCE)
    }
}

/// Stable 64-bit key for a frame id.
pub fn frame_key(frame_id: &str) -> u64 {
    frame_id
        .bytes()
        .fold(0xCBF2_9CE4_8422_2325u64, |h, b| splitmix64(h ^ u64::from(b)))
}

/// Simulated detections of one frame under `corruption`.
pub fn simulate_detections(gt: &GroundTruthFrame, spec: &SimDetectorSpec, corruption: &CorruptionSpec) -> DetectionSet {
    let (sigma_mult, miss_mult) = spec.response.multipliers(corruption);
    let sigma_eff = spec.sigma_base * sigma_mult;
    let miss = (spec.miss_base * miss_mult).min(MAX_MISS);
    let var = spec.reported_variance(sigma_eff);

    let stream = match spec.modality {
        Modality::Rgb => 0x5247_42,
        Modality::Depth => 0x4450_54,
    };
    let frame = CounterRng::new(spec.seed, stream).substream(frame_key(&gt.frame_id));

    let mut boxes = Vec::with_capacity(gt.objects.len() + 2);
    for (j, o) in gt.objects.iter().enumerate() {
        let r = frame.substream(j as u64);
        if r.uniform_at(0) < miss {
            continue;
        }
        let truth = o.bbox.to_center();
        let mut mean = [0.0; 4];
        let mut sq = 0.0;
        for k in 0..4 {
            mean[k] = truth[k] + sigma_eff * r.normal_at(1 + k as u64);
        }
        mean[W] = mean[W].max(MIN_SIZE);
        mean[H] = mean[H].max(MIN_SIZE);
        for k in 0..4 {
            sq += (mean[k] - truth[k]).powi(2);
        }
        let err = (sq / 4.0).sqrt() / (truth[W] * truth[H]).sqrt();
        let score = spec.score_max * (-spec.score_sharpness * err).exp() * (1.0 - spec.score_jitter * r.uniform_at(10));
        boxes.push(GaussianBox {
            mean,
            var: [var; 4],
            score: score.clamp(0.0, 1.0),
            class_id: o.class_id,
            modality: spec.modality,
        });
    }

    let mut bg = Sequence::new(frame.substream(u64::MAX));
    let n_fp = spec.fp_rate.floor() as usize + usize::from(bg.uniform() < spec.fp_rate.fract());
    for _ in 0..n_fp {
        let class_id = sample_class(&mut bg);
        let c = sample_box(&mut bg, class_id);
        let score = spec.fp_score_max * bg.uniform();
        boxes.push(GaussianBox {
            mean: c.to_center(),
            var: [var; 4],
            score,
            class_id,
            modality: spec.modality,
        });
    }
    DetectionSet::from_boxes(boxes).expect("simulated boxes satisfy box invariants")
}
