//! The noise-degradation experiment: every scenario evaluated at every
//! `(corruption kind, severity)` cell.

use std::fmt;

use rayon::prelude::*;

use super::sim::{frame_key, simulate_detections, SimDetectorSpec};
use super::{class_name, evaluate, EvalReport, GroundTruthFrame};
use crate::corruption::{CorruptionKind, CorruptionSpec};
use crate::fusion::{avg_fusion, multi_source_nms, standard_nms_per_class, DetectionSet, FusionConfig};
use crate::geometry::{GaussianBox, NUM_CLASSES};
use crate::{Error, Result};

/// Which inputs are corrupted and how they are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    /// Camera only, corrupted.
    Rgb,
    /// LiDAR depth only, corrupted.
    Depth,
    /// Corrupted camera with clean depth.
    NoisyRgbDepth { selective: bool },
    /// Clean camera with corrupted depth.
    RgbNoisyDepth { selective: bool },
    /// Both corrupted.
    NoisyBoth { selective: bool },
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Rgb,
        Scenario::Depth,
        Scenario::NoisyRgbDepth { selective: true },
        Scenario::RgbNoisyDepth { selective: true },
        Scenario::NoisyBoth { selective: true },
        Scenario::NoisyRgbDepth { selective: false },
        Scenario::RgbNoisyDepth { selective: false },
        Scenario::NoisyBoth { selective: false },
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Rgb => "rgb",
            Scenario::Depth => "depth",
            Scenario::NoisyRgbDepth { selective: true } => "nr-d",
            Scenario::RgbNoisyDepth { selective: true } => "r-nd",
            Scenario::NoisyBoth { selective: true } => "nr-nd",
            Scenario::NoisyRgbDepth { selective: false } => "avg:nr-d",
            Scenario::RgbNoisyDepth { selective: false } => "avg:r-nd",
            Scenario::NoisyBoth { selective: false } => "avg:nr-nd",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub rgb: SimDetectorSpec,
    pub depth: SimDetectorSpec,
    pub fusion: FusionConfig,
    pub kinds: Vec<CorruptionKind>,
    /// Severities to evaluate, 0 included for the clean column.
    pub levels: Vec<u8>,
    /// Matching IoU for TP/FP.
    pub iou_gate: f64,
    /// Seeds the random half-drop of the averaging baseline.
    pub baseline_seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            rgb: SimDetectorSpec::camera_default(),
            depth: SimDetectorSpec::lidar_default(),
            fusion: FusionConfig::default(),
            kinds: CorruptionKind::ALL.to_vec(),
            levels: (0..=5).collect(),
            iou_gate: 0.5,
            baseline_seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub scenario: Scenario,
    pub kind: CorruptionKind,
    pub level: u8,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegradationGrid {
    pub cells: Vec<GridCell>,
}

/// One CSV row of a grid or single evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scenario: String,
    pub noise_kind: String,
    pub level: u8,
    pub class: String,
    /// NaN when the class has no ground truth.
    pub ap: f64,
    pub map: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl DegradationGrid {
    pub fn get(&self, scenario: Scenario, kind: CorruptionKind, level: u8) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.scenario == scenario && c.kind == kind && c.level == level)
    }

    pub fn map(&self, scenario: Scenario, kind: CorruptionKind, level: u8) -> Option<f64> {
        self.get(scenario, kind, level).map(|c| c.report.map)
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        self.cells
            .iter()
            .flat_map(|c| report_rows(c.scenario.name(), c.kind.as_str(), c.level, &c.report))
            .collect()
    }
}

/// Flattens a report into one row per class.
pub fn report_rows(scenario: &str, noise_kind: &str, level: u8, report: &EvalReport) -> Vec<ReportRow> {
    (0..NUM_CLASSES)
        .map(|c| {
            let s = report.classes[c];
            ReportRow {
                scenario: scenario.to_string(),
                noise_kind: noise_kind.to_string(),
                level,
                class: class_name(c as u8).to_string(),
                ap: s.ap.unwrap_or(f64::NAN),
                map: report.map,
                tp: s.tp,
                fp: s.fp,
                fn_: s.fn_,
            }
        })
        .collect()
}

struct FrameDets {
    rgb_clean: DetectionSet,
    depth_clean: DetectionSet,
    rgb_noisy: DetectionSet,
    depth_noisy: DetectionSet,
}

/// Evaluates every scenario at every `(kind, level)`. Cells are computed in
/// parallel on the current rayon pool; the result order is fixed:
/// kind, then level, then [`Scenario::ALL`] order.
pub fn run_degradation_grid(corpus: &[GroundTruthFrame], cfg: &GridConfig) -> Result<DegradationGrid> {
    if corpus.is_empty() {
        return Err(Error::InsufficientData("degradation grid needs a non-empty corpus".into()));
    }
    cfg.fusion.validate()?;
    cfg.rgb.validate()?;
    cfg.depth.validate()?;
    let mut tasks = Vec::new();
    for &kind in &cfg.kinds {
        for &level in &cfg.levels {
            tasks.push(CorruptionSpec::new(kind, level, 0)?);
        }
    }

    let clean = CorruptionSpec::clean();
    let cells: Vec<Vec<GridCell>> = tasks
        .par_iter()
        .map(|spec| {
            let dets: Vec<FrameDets> = corpus
                .iter()
                .map(|f| FrameDets {
                    rgb_clean: simulate_detections(f, &cfg.rgb, &clean),
                    depth_clean: simulate_detections(f, &cfg.depth, &clean),
                    rgb_noisy: simulate_detections(f, &cfg.rgb, spec),
                    depth_noisy: simulate_detections(f, &cfg.depth, spec),
                })
                .collect();
            Scenario::ALL
                .iter()
                .map(|&scenario| GridCell {
                    scenario,
                    kind: spec.kind,
                    level: spec.level,
                    report: run_scenario(corpus, &dets, scenario, cfg),
                })
                .collect()
        })
        .collect();
    Ok(DegradationGrid {
        cells: cells.into_iter().flatten().collect(),
    })
}

fn run_scenario(corpus: &[GroundTruthFrame], dets: &[FrameDets], scenario: Scenario, cfg: &GridConfig) -> EvalReport {
    let fused = |rgb: &DetectionSet, depth: &DetectionSet, selective: bool, frame: &GroundTruthFrame| {
        if selective {
            multi_source_nms(rgb, depth, &cfg.fusion)
        } else {
            avg_fusion(rgb, depth, &cfg.fusion, cfg.baseline_seed ^ frame_key(&frame.frame_id))
        }
    };
    let outputs: Vec<Vec<GaussianBox>> = corpus
        .iter()
        .zip(dets)
        .map(|(f, d)| {
            let out = match scenario {
                Scenario::Rgb => standard_nms_per_class(&d.rgb_noisy, cfg.fusion.single_modal_nms_iou),
                Scenario::Depth => standard_nms_per_class(&d.depth_noisy, cfg.fusion.single_modal_nms_iou),
                Scenario::NoisyRgbDepth { selective } => fused(&d.rgb_noisy, &d.depth_clean, selective, f),
                Scenario::RgbNoisyDepth { selective } => fused(&d.rgb_clean, &d.depth_noisy, selective, f),
                Scenario::NoisyBoth { selective } => fused(&d.rgb_noisy, &d.depth_noisy, selective, f),
            };
            out.into_boxes()
        })
        .collect();
    evaluate(corpus.iter().zip(outputs.iter().map(Vec::as_slice)), cfg.iou_gate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::corpus::synthetic_corpus;
    use crate::geometry::Modality;

    #[test]
    fn perfect_detectors_score_one_everywhere() {
        let corpus = synthetic_corpus(30, 4);
        let cfg = GridConfig {
            rgb: SimDetectorSpec::perfect(Modality::Rgb),
            depth: SimDetectorSpec::perfect(Modality::Depth),
            kinds: vec![CorruptionKind::Frost],
            levels: vec![0, 3],
            ..Default::default()
        };
        let grid = run_degradation_grid(&corpus, &cfg).unwrap();
        assert_eq!(grid.cells.len(), 2 * Scenario::ALL.len());
        for s in [Scenario::Rgb, Scenario::Depth, Scenario::NoisyBoth { selective: true }] {
            assert_eq!(grid.map(s, CorruptionKind::Frost, 3), Some(1.0), "{s}");
        }
        assert_eq!(grid.rows().len(), grid.cells.len() * 3);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(run_degradation_grid(&[], &GridConfig::default()).is_err());
    }
}
