//! Binary netpbm rasters: `P5` (gray) and `P6` (RGB).
//!
//! Header: magic, width, height and maxval as ASCII decimals separated by
//! whitespace (`#` comments allowed), then exactly one whitespace byte, then
//! row-major samples. `maxval < 256` stores one byte per sample, otherwise two
//! bytes big-endian. The writer emits `P5\n<w> <h>\n<maxval>\n`.

use std::path::Path;

use super::{read_bytes, write_file};
use crate::corruption::Raster;
use crate::{Error, Result};

/// Integer samples exactly as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pnm {
    pub width: usize,
    pub height: usize,
    /// 1 for `P5`, 3 for `P6`.
    pub channels: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

impl Pnm {
    pub fn validate(&self) -> Result<()> {
        if self.channels != 1 && self.channels != 3 {
            return Err(Error::Format(format!("unsupported channel count {}", self.channels)));
        }
        if self.maxval == 0 {
            return Err(Error::Format("maxval must be positive".into()));
        }
        if self.samples.len() != self.width * self.height * self.channels {
            return Err(Error::Format(format!(
                "{} samples for a {}x{}x{} image",
                self.samples.len(),
                self.width,
                self.height,
                self.channels
            )));
        }
        if let Some(s) = self.samples.iter().find(|s| **s > self.maxval) {
            return Err(Error::Format(format!("sample {s} exceeds maxval {}", self.maxval)));
        }
        Ok(())
    }

    /// Samples scaled to `[0, 1]` by `maxval`.
    pub fn to_raster(&self) -> Raster {
        let m = f64::from(self.maxval);
        Raster {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.samples.iter().map(|&s| f64::from(s) / m).collect(),
        }
    }

    /// Quantizes with `round(maxval · v)`.
    pub fn from_raster(r: &Raster, maxval: u16) -> Result<Self> {
        let m = f64::from(maxval);
        let p = Pnm {
            width: r.width,
            height: r.height,
            channels: r.channels,
            maxval,
            samples: r
                .data
                .iter()
                .map(|&v| (v.clamp(0.0, 1.0) * m).round() as u16)
                .collect(),
        };
        p.validate()?;
        Ok(p)
    }
}

pub fn encode_pnm(p: &Pnm) -> Result<Vec<u8>> {
    p.validate()?;
    let magic = if p.channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n{}\n", p.width, p.height, p.maxval).into_bytes();
    if p.maxval < 256 {
        out.extend(p.samples.iter().map(|&s| s as u8));
    } else {
        out.extend(p.samples.iter().flat_map(|s| s.to_be_bytes()));
    }
    Ok(out)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::Format(format!("bad or missing {what} in header")))
    }
}

pub fn decode_pnm(bytes: &[u8]) -> Result<Pnm> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => {
            let shown = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
            return Err(Error::Format(format!("bad magic number {shown:?}, expected P5 or P6")));
        }
    };
    let mut h = Header { bytes, pos: 2 };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("maxval {maxval} outside 1..=65535")));
    }
    if !bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Format("missing whitespace after maxval".into()));
    }
    let data = &bytes[h.pos + 1..];
    let n = width
        .checked_mul(height)
        .and_then(|v| v.checked_mul(channels))
        .ok_or_else(|| Error::Format("image dimensions overflow".into()))?;
    let bps = if maxval < 256 { 1 } else { 2 };
    if data.len() != n * bps {
        return Err(Error::Format(format!(
            "expected {} bytes of samples, found {}",
            n * bps,
            data.len()
        )));
    }
    let samples: Vec<u16> = if bps == 1 {
        data.iter().map(|&b| u16::from(b)).collect()
    } else {
        data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    };
    let p = Pnm {
        width,
        height,
        channels,
        maxval: maxval as u16,
        samples,
    };
    p.validate()?;
    Ok(p)
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        e => e,
    }
}

pub fn read_pnm(path: &Path) -> Result<Pnm> {
    decode_pnm(&read_bytes(path)?).map_err(|e| with_path(path, e))
}

pub fn write_pnm(path: &Path, p: &Pnm) -> Result<()> {
    write_file(path, &encode_pnm(p).map_err(|e| with_path(path, e))?)
}

pub fn read_raster(path: &Path) -> Result<Raster> {
    Ok(read_pnm(path)?.to_raster())
}

/// Writes a raster at `maxval` (255 for 8-bit, 65535 for 16-bit).
pub fn write_raster(path: &Path, r: &Raster, maxval: u16) -> Result<()> {
    write_pnm(path, &Pnm::from_raster(r, maxval)?)
}
