//! KITTI velodyne scans: little-endian `f32` quadruples `(x, y, z,
//! intensity)`, 16 bytes per point, no header.

use std::path::Path;

use super::{read_bytes, write_file};
use crate::projection::{PointCloud, PointXyzi};
use crate::{Error, Result};

const RECORD: usize = 16;

pub fn read_velodyne(path: &Path) -> Result<PointCloud> {
    decode_velodyne(&read_bytes(path)?).ok_or_else(|| Error::Truncated {
        path: path.to_path_buf(),
        len: std::fs::metadata(path).map(|m| m.len()).unwrap_or(0),
        record: RECORD,
    })
}

/// Returns `None` when the length is not a whole number of records.
pub fn decode_velodyne(bytes: &[u8]) -> Option<PointCloud> {
    if bytes.len() % RECORD != 0 {
        return None;
    }
    let f = |c: &[u8]| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]]));
    let points = bytes
        .chunks_exact(RECORD)
        .map(|r| PointXyzi {
            x: f(&r[0..4]),
            y: f(&r[4..8]),
            z: f(&r[8..12]),
            intensity: f(&r[12..16]),
        })
        .collect();
    Some(PointCloud { points })
}

/// Coordinates are narrowed to `f32`.
pub fn encode_velodyne(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(cloud.points.len() * RECORD);
    for p in &cloud.points {
        for v in [p.x, p.y, p.z, p.intensity] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn write_velodyne(path: &Path, cloud: &PointCloud) -> Result<()> {
    write_file(path, &encode_velodyne(cloud))
}
