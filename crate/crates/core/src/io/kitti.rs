//! KITTI object labels (`label_2/*.txt`).
//!
//! Each line is `type truncated occluded alpha left top right bottom h w l x
//! y z rotation_y [score]`. Only the type and the 2D box are used.

use std::path::Path;

use super::{context, parse_f64, read_text};
use crate::eval::{GroundTruthFrame, GtObject};
use crate::geometry::{CornerBox, CLASS_CAR, CLASS_CYCLIST, CLASS_PEDESTRIAN};
use crate::{Error, Result};

/// What was skipped while reading a label file.
#[derive(Debug, Default)]
pub struct LabelReport {
    /// Malformed lines, each a [`Error::Parse`] carrying its line number.
    pub errors: Vec<Error>,
    /// Boxes with zero or negative extent.
    pub degenerate: usize,
    /// Lines with an ignored type (`DontCare`, `Misc`, anything unknown).
    pub ignored: usize,
}

fn map_type(t: &str) -> Option<u8> {
    match t {
        "Car" | "Van" | "Truck" | "Tram" => Some(CLASS_CAR),
        "Pedestrian" | "Person_sitting" => Some(CLASS_PEDESTRIAN),
        "Cyclist" => Some(CLASS_CYCLIST),
        _ => None,
    }
}

/// Reads one label file; the frame id is the file stem.
pub fn read_kitti_labels(path: &Path) -> Result<(GroundTruthFrame, LabelReport)> {
    let text = read_text(path)?;
    let frame_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(parse_kitti_labels(&text, &frame_id, &context(path)))
}

/// Parses label text leniently: bad lines are recorded in the report and
/// skipped.
pub fn parse_kitti_labels(text: &str, frame_id: &str, ctx: &str) -> (GroundTruthFrame, LabelReport) {
    let mut report = LabelReport::default();
    let mut objects = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match parse_line(&toks, ctx, line_no) {
            Ok(Some((class_id, [l, t, r, b]))) => match CornerBox::new(l, t, r, b) {
                Ok(bbox) => objects.push(GtObject { class_id, bbox }),
                Err(_) => report.degenerate += 1,
            },
            Ok(None) => report.ignored += 1,
            Err(e) => report.errors.push(e),
        }
    }
    let frame = GroundTruthFrame {
        frame_id: frame_id.to_string(),
        objects,
    };
    (frame, report)
}

fn parse_line(toks: &[&str], ctx: &str, line: usize) -> Result<Option<(u8, [f64; 4])>> {
    if toks.len() < 8 {
        return Err(Error::parse(
            ctx,
            line,
            format!("expected at least 8 fields, found {}", toks.len()),
        ));
    }
    // Validate the numeric prefix even for ignored types so corrupt lines are
    // reported rather than silently dropped.
    let mut nums = [0.0; 7];
    for (k, tok) in toks[1..8].iter().enumerate() {
        nums[k] = parse_f64(tok, ctx, line, "label field")?;
    }
    Ok(map_type(toks[0]).map(|c| (c, [nums[3], nums[4], nums[5], nums[6]])))
}
