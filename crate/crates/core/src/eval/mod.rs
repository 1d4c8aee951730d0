//! Detection evaluation and the synthetic noise-degradation experiment.

mod ap;
pub mod corpus;
mod grid;
mod matching;
pub mod sim;

pub use ap::{average_precision, evaluate, ClassStats, EvalReport, ScoredMatch};
pub use grid::{report_rows, run_degradation_grid, DegradationGrid, GridCell, GridConfig, ReportRow, Scenario};
pub use matching::{match_detections, Match};
pub use sim::{simulate_detections, NoiseResponse, SimDetectorSpec};

use crate::geometry::{CornerBox, CLASS_NAMES, NUM_CLASSES};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtObject {
    pub class_id: u8,
    pub bbox: CornerBox,
}

/// Labelled objects of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthFrame {
    pub frame_id: String,
    pub objects: Vec<GtObject>,
}

impl GroundTruthFrame {
    pub fn new(frame_id: impl Into<String>, objects: Vec<GtObject>) -> Result<Self> {
        let f = GroundTruthFrame {
            frame_id: frame_id.into(),
            objects,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        for o in &self.objects {
            if usize::from(o.class_id) >= NUM_CLASSES {
                return Err(Error::InvalidValue(format!(
                    "frame {}: class id {} out of range",
                    self.frame_id, o.class_id
                )));
            }
            o.bbox.validate()?;
        }
        Ok(())
    }
}

pub fn class_name(class_id: u8) -> &'static str {
    CLASS_NAMES.get(usize::from(class_id)).copied().unwrap_or("unknown")
}

pub fn class_id(name: &str) -> Option<u8> {
    CLASS_NAMES.iter().position(|n| *n == name).map(|i| i as u8)
}

/// Deterministic 6:2:2 train/val/test split of frame indices, shuffled by
/// a counter-based hash of `(seed, index)`.
pub fn split_622(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let rng = crate::rng::CounterRng::new(seed, 0x0622);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&i| (rng.u64_at(i as u64), i));
    let n_train = n * 6 / 10;
    let n_val = n * 2 / 10;
    let test = idx.split_off(n_train + n_val);
    let val = idx.split_off(n_train);
    (idx, val, test)
}
