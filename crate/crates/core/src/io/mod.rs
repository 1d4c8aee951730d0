//! Readers and writers for every on-disk artifact.
//!
//! All text formats are UTF-8, `\n`-terminated, whitespace-separated. Real
//! numbers are written so that reading them back yields the identical `f64`.

mod calib;
mod corpus;
mod detections;
mod kitti;
mod pnm;
mod velodyne;

pub use calib::{parse_calib, read_calib, read_kitti_calib, render_calib, write_kitti_calib, KittiCalib};
pub use corpus::{parse_corpus, read_corpus, render_corpus, write_corpus};
pub use detections::{
    parse_detections, read_detections, render_detections, write_detections, DetectionRecord,
};
pub use kitti::{parse_kitti_labels, read_kitti_labels, LabelReport};
pub use pnm::{
    decode_pnm, encode_pnm, read_pnm, read_raster, write_pnm, write_raster, Pnm,
};
pub use velodyne::{decode_velodyne, encode_velodyne, read_velodyne, write_velodyne};

use std::path::Path;

use crate::{Error, Result};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn context(path: &Path) -> String {
    path.display().to_string()
}

/// Parses a real, rejecting NaN and infinities.
pub(crate) fn parse_f64(tok: &str, ctx: &str, line: usize, what: &str) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(Error::parse(ctx, line, format!("{what}: non-finite value {v}"))),
        Err(_) => Err(Error::parse(ctx, line, format!("{what}: cannot parse {tok:?} as a number"))),
    }
}
