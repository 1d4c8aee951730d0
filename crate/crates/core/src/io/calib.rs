//! KITTI calibration text (`calib/*.txt`).
//!
//! Lines have the form `KEY: v0 v1 …`. `P2` and `Tr_velo_to_cam` hold 12
//! row-major values (3×4), `R0_rect` holds 9 (3×3). Other keys are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{context, parse_f64, read_text, write_file};
use crate::projection::{CalibMatrices, Mat3};
use crate::{Error, Result};

/// The raw KITTI matrices, before folding into `K [R | T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KittiCalib {
    pub p2: [[f64; 4]; 3],
    pub r0_rect: Mat3,
    pub tr_velo_to_cam: [[f64; 4]; 3],
}

impl KittiCalib {
    pub fn to_matrices(&self) -> Result<CalibMatrices> {
        CalibMatrices::from_kitti(&self.p2, &self.r0_rect, &self.tr_velo_to_cam)
    }
}

pub fn read_kitti_calib(path: &Path) -> Result<KittiCalib> {
    parse_calib(&read_text(path)?, &context(path))
}

/// Reads and folds a calibration file.
pub fn read_calib(path: &Path) -> Result<CalibMatrices> {
    read_kitti_calib(path)?
        .to_matrices()
        .map_err(|e| Error::Calibration(format!("{}: {e}", path.display())))
}

pub fn parse_calib(text: &str, ctx: &str) -> Result<KittiCalib> {
    let mut p2 = None;
    let mut r0 = None;
    let mut tr = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let Some((key, rest)) = line.split_once(':') else {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::parse(ctx, line_no, "expected `KEY: values`"));
        };
        let slot = match key.trim() {
            "P2" => &mut p2,
            "R0_rect" => &mut r0,
            "Tr_velo_to_cam" => &mut tr,
            _ => continue,
        };
        let vals = rest
            .split_whitespace()
            .map(|t| parse_f64(t, ctx, line_no, key.trim()))
            .collect::<Result<Vec<f64>>>()?;
        *slot = Some((line_no, vals));
    }
    let take = |slot: Option<(usize, Vec<f64>)>, key: &str, n: usize| -> Result<Vec<f64>> {
        let (line, vals) = slot.ok_or_else(|| Error::Calibration(format!("{ctx}: missing key {key}")))?;
        if vals.len() != n {
            return Err(Error::parse(
                ctx,
                line,
                format!("{key}: expected {n} values, found {}", vals.len()),
            ));
        }
        Ok(vals)
    };
    let p2 = take(p2, "P2", 12)?;
    let r0 = take(r0, "R0_rect", 9)?;
    let tr = take(tr, "Tr_velo_to_cam", 12)?;
    Ok(KittiCalib {
        p2: std::array::from_fn(|i| std::array::from_fn(|j| p2[4 * i + j])),
        r0_rect: std::array::from_fn(|i| std::array::from_fn(|j| r0[3 * i + j])),
        tr_velo_to_cam: std::array::from_fn(|i| std::array::from_fn(|j| tr[4 * i + j])),
    })
}

pub fn render_calib(c: &KittiCalib) -> String {
    let mut s = String::new();
    let mut row = |key: &str, vals: &mut dyn Iterator<Item = f64>| {
        s.push_str(key);
        s.push(':');
        for v in vals {
            write!(s, " {v:e}").unwrap();
        }
        s.push('\n');
    };
    row("P2", &mut c.p2.iter().flatten().copied());
    row("R0_rect", &mut c.r0_rect.iter().flatten().copied());
    row("Tr_velo_to_cam", &mut c.tr_velo_to_cam.iter().flatten().copied());
    s
}

pub fn write_kitti_calib(path: &Path, c: &KittiCalib) -> Result<()> {
    write_file(path, render_calib(c).as_bytes())
}
