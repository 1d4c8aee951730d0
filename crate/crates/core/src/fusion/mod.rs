//! Box selection: greedy NMS, score decay, inverse-variance box refinement
//! and the two-modality fusion NMS built from them.

mod multi_source;
mod nms;
pub mod oracle;

pub use multi_source::{
    classify_overlap, decay, fuse_inverse_variance, multi_source_nms, softer_nms, softer_update,
};
pub use nms::{avg_fusion, standard_nms, standard_nms_per_class};
pub use oracle::{oracle_multi_source_nms, random_instance};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::geometry::GaussianBox;
use crate::{Error, Result};

/// An ordered pool of detections from one modality.
///
/// Scores and variances are read straight from the boxes, so they can never
/// drift out of sync with them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionSet {
    boxes: Vec<GaussianBox>,
}

impl DetectionSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wraps `boxes`, validating each one.
    pub fn from_boxes(boxes: Vec<GaussianBox>) -> Result<Self> {
        for b in &boxes {
            b.validate()?;
        }
        Ok(DetectionSet { boxes })
    }

    pub fn push(&mut self, b: GaussianBox) -> Result<()> {
        b.validate()?;
        self.boxes.push(b);
        Ok(())
    }

    pub fn boxes(&self) -> &[GaussianBox] {
        &self.boxes
    }

    pub fn into_boxes(self) -> Vec<GaussianBox> {
        self.boxes
    }

    pub fn scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.boxes.iter().map(|b| b.score)
    }

    pub fn variances(&self) -> impl Iterator<Item = [f64; 4]> + '_ {
        self.boxes.iter().map(|b| b.var)
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }
}

impl From<DetectionSet> for Vec<GaussianBox> {
    fn from(d: DetectionSet) -> Self {
        d.boxes
    }
}

/// Score decay applied to boxes overlapping the selected one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// `s * (1 - iou)` once the overlap exceeds `t1`.
    Linear,
    /// `s * exp(-iou^2 / sigma)`.
    Gaussian { sigma: f64 },
}

impl Default for Decay {
    fn default() -> Self {
        Decay::Gaussian { sigma: 0.5 }
    }
}

impl fmt::Display for Decay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decay::Linear => f.write_str("linear"),
            Decay::Gaussian { sigma } => write!(f, "gaussian({sigma})"),
        }
    }
}

/// How the selected box relates to the best-overlapping box of the other
/// modality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OverlapCase {
    /// IoU >= t2: both sensors fire on the same region.
    Corroborated,
    /// t1 <= IoU < t2: the modalities disagree on the extent.
    Ambiguous,
    /// IoU < t1 (or no box in the other modality): unrelated detections.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    /// Low IoU gate.
    pub t1: f64,
    /// High IoU gate.
    pub t2: f64,
    pub decay: Decay,
    /// Greedy NMS threshold for single-modality baselines.
    pub single_modal_nms_iou: f64,
    /// Boxes whose decayed score falls below this are discarded.
    pub score_floor: f64,
    /// Run selection independently per `class_id`.
    pub per_class: bool,
}

impl FusionConfig {
    /// Gates used in the reported experiments.
    pub const EXPERIMENT_GATES: (f64, f64) = (0.45, 0.7);
    /// Smaller reference gates suggested alongside the case definitions.
    pub const REFERENCE_GATES: (f64, f64) = (0.3, 0.5);

    pub fn with_gates(t1: f64, t2: f64) -> Self {
        FusionConfig {
            t1,
            t2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.t1 && self.t1 < self.t2 && self.t2 <= 1.0) {
            return Err(Error::InvalidValue(format!(
                "gates must satisfy 0 <= t1 < t2 <= 1, got t1={} t2={}",
                self.t1, self.t2
            )));
        }
        if let Decay::Gaussian { sigma } = self.decay {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::InvalidValue(format!("decay sigma must be > 0, got {sigma}")));
            }
        }
        if !(0.0..1.0).contains(&self.score_floor) {
            return Err(Error::InvalidValue(format!(
                "score floor must be in [0,1), got {}",
                self.score_floor
            )));
        }
        if !(0.0..=1.0).contains(&self.single_modal_nms_iou) {
            return Err(Error::InvalidValue(format!(
                "nms iou must be in [0,1], got {}",
                self.single_modal_nms_iou
            )));
        }
        Ok(())
    }
}

impl Default for FusionConfig {
    fn default() -> Self {
        let (t1, t2) = Self::EXPERIMENT_GATES;
        FusionConfig {
            t1,
            t2,
            decay: Decay::default(),
            single_modal_nms_iou: 0.45,
            score_floor: 0.01,
            per_class: true,
        }
    }
}

impl FromStr for Decay {
    type Err = Error;

    /// `linear`, `gaussian` (sigma 0.5) or `gaussian:<sigma>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.split_once(':') {
            None if lower == "linear" => Ok(Decay::Linear),
            None if lower == "gaussian" => Ok(Decay::default()),
            Some(("gaussian", sigma)) => sigma
                .parse()
                .map(|sigma| Decay::Gaussian { sigma })
                .map_err(|_| Error::InvalidValue(format!("bad decay sigma `{sigma}`"))),
            _ => Err(Error::InvalidValue(format!("unknown decay `{s}`"))),
        }
    }
}

/// Runs `select` per class id (ascending) and merges the results by
/// descending score. The merge is stable, so equal scores keep class order.
pub(crate) fn per_class<F>(sets: [&[GaussianBox]; 2], mut select: F) -> Vec<GaussianBox>
where
    F: FnMut(&[GaussianBox], &[GaussianBox]) -> Vec<GaussianBox>,
{
    let mut groups: BTreeMap<u8, (Vec<GaussianBox>, Vec<GaussianBox>)> = BTreeMap::new();
    for b in sets[0] {
        groups.entry(b.class_id).or_default().0.push(*b);
    }
    for b in sets[1] {
        groups.entry(b.class_id).or_default().1.push(*b);
    }
    let mut out = Vec::new();
    for (first, second) in groups.values() {
        out.extend(select(first, second));
    }
    sort_by_score_desc(&mut out);
    out
}

pub(crate) fn sort_by_score_desc(boxes: &mut [GaussianBox]) {
    boxes.sort_by(|a, b| b.score.total_cmp(&a.score));
}
