//! Seeded image corruptions at five severity levels.
//!
//! Three corruption kinds are supported, each with a fixed per-level
//! parameter ladder:
//!
//! | level | noise σ | blur length (px) | frost opacity | frost coverage |
//! |-------|---------|------------------|---------------|----------------|
//! | 1     | 0.08    | 7                | 0.25          | 0.30           |
//! | 2     | 0.12    | 11               | 0.35          | 0.40           |
//! | 3     | 0.18    | 15               | 0.45          | 0.50           |
//! | 4     | 0.26    | 19               | 0.55          | 0.60           |
//! | 5     | 0.38    | 23               | 0.65          | 0.70           |
//!
//! Level 0 is the identity. All randomness comes from [`CounterRng`] keyed by
//! the spec's seed, so output depends only on `(raster, spec)`.

mod blur;
mod frost;

use std::fmt;
use std::str::FromStr;

use crate::rng::CounterRng;
use crate::{Error, Result};

pub use blur::motion_blur;
pub use frost::{frost, frost_field};

pub const MAX_LEVEL: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CorruptionKind {
    GaussianNoise,
    MotionBlur,
    Frost,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 3] = [
        CorruptionKind::GaussianNoise,
        CorruptionKind::MotionBlur,
        CorruptionKind::Frost,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CorruptionKind::GaussianNoise => "gaussian_noise",
            CorruptionKind::MotionBlur => "motion_blur",
            CorruptionKind::Frost => "frost",
        }
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorruptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "gaussian_noise" | "gaussian" | "noise" => Ok(CorruptionKind::GaussianNoise),
            "motion_blur" | "blur" => Ok(CorruptionKind::MotionBlur),
            "frost" => Ok(CorruptionKind::Frost),
            _ => Err(Error::InvalidValue(format!("unknown corruption kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    /// 0 (clean) to 5.
    pub level: u8,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn new(kind: CorruptionKind, level: u8, seed: u64) -> Result<Self> {
        let s = CorruptionSpec { kind, level, seed };
        s.validate()?;
        Ok(s)
    }

    pub fn clean() -> Self {
        CorruptionSpec {
            kind: CorruptionKind::GaussianNoise,
            level: 0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.level > MAX_LEVEL {
            return Err(Error::InvalidValue(format!(
                "severity level must be 0..={MAX_LEVEL}, got {}",
                self.level
            )));
        }
        Ok(())
    }
}

/// Parameters for one severity level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeverityParams {
    GaussianNoise { sigma: f64 },
    MotionBlur { length: usize, angle_deg: f64 },
    Frost { opacity: f64, coverage: f64 },
}

impl SeverityParams {
    /// The parameter each ladder is ordered by.
    pub fn intensity(&self) -> f64 {
        match *self {
            SeverityParams::GaussianNoise { sigma } => sigma,
            SeverityParams::MotionBlur { length, .. } => length as f64,
            SeverityParams::Frost { opacity, .. } => opacity,
        }
    }
}

const NOISE_SIGMA: [f64; 5] = [0.08, 0.12, 0.18, 0.26, 0.38];
const BLUR_LENGTH: [usize; 5] = [7, 11, 15, 19, 23];
const FROST_OPACITY: [f64; 5] = [0.25, 0.35, 0.45, 0.55, 0.65];
const FROST_COVERAGE: [f64; 5] = [0.30, 0.40, 0.50, 0.60, 0.70];

/// Horizontal blur, matching forward ego-motion.
pub const DEFAULT_BLUR_ANGLE_DEG: f64 = 0.0;

/// Parameters for levels 1 through 5.
pub fn severity_ladder(kind: CorruptionKind) -> [SeverityParams; 5] {
    std::array::from_fn(|i| match kind {
        CorruptionKind::GaussianNoise => SeverityParams::GaussianNoise { sigma: NOISE_SIGMA[i] },
        CorruptionKind::MotionBlur => SeverityParams::MotionBlur {
            length: BLUR_LENGTH[i],
            angle_deg: DEFAULT_BLUR_ANGLE_DEG,
        },
        CorruptionKind::Frost => SeverityParams::Frost {
            opacity: FROST_OPACITY[i],
            coverage: FROST_COVERAGE[i],
        },
    })
}

/// Interleaved raster with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    /// 1 (depth / gray) or 3 (RGB).
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize) -> Result<Self> {
        check_channels(channels)?;
        Ok(Raster {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        })
    }

    pub fn from_data(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_channels(channels)?;
        if data.len() != width * height * channels {
            return Err(Error::Format(format!(
                "raster data has {} samples, expected {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Format(format!("raster sample {v} outside [0,1]")));
        }
        Ok(Raster {
            width,
            height,
            channels,
            data,
        })
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Mean absolute per-sample difference.
    pub fn mean_abs_diff(&self, other: &Raster) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).sum::<f64>() / self.data.len() as f64
    }
}

fn check_channels(channels: usize) -> Result<()> {
    if channels == 1 || channels == 3 {
        Ok(())
    } else {
        Err(Error::Format(format!("unsupported channel count {channels}")))
    }
}

/// Applies `spec` to `img`. Level 0 returns an exact copy.
pub fn corrupt(img: &Raster, spec: &CorruptionSpec) -> Result<Raster> {
    check_channels(img.channels)?;
    spec.validate()?;
    if img.data.len() != img.width * img.height * img.channels {
        return Err(Error::Format("raster dimensions do not match its data".into()));
    }
    if spec.level == 0 {
        return Ok(img.clone());
    }
    let params = severity_ladder(spec.kind)[spec.level as usize - 1];
    Ok(apply(img, &params, spec.seed))
}

/// Applies explicit parameters, e.g. a custom blur angle.
pub fn apply(img: &Raster, params: &SeverityParams, seed: u64) -> Raster {
    match *params {
        SeverityParams::GaussianNoise { sigma } => gaussian_noise(img, sigma, seed),
        SeverityParams::MotionBlur { length, angle_deg } => motion_blur(img, length, angle_deg),
        SeverityParams::Frost { opacity, coverage } => frost(img, opacity, coverage, seed),
    }
}

/// Adds i.i.d. `N(0, sigma²)` per sample, then clamps. Sample `i` (in
/// interleaved order) uses normal draw `i` of stream `("noise", seed)`.
pub fn gaussian_noise(img: &Raster, sigma: f64, seed: u64) -> Raster {
    let rng = CounterRng::new(seed, STREAM_NOISE);
    let data = img
        .data
        .iter()
        .enumerate()
        .map(|(i, v)| (v + sigma * rng.normal_at(i as u64)).clamp(0.0, 1.0))
        .collect();
    Raster { data, ..img.clone() }
}

const STREAM_NOISE: u64 = 0x6E6F_6973_65; // "noise"
