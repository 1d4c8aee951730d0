//! Box representations and overlap measures.
//!
//! Predictions are center-form `(x, y, w, h)` with a variance per coordinate;
//! ground truth and IoU use corner form. All arithmetic is `f64`.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Index of each coordinate inside [`GaussianBox::mean`] / [`GaussianBox::var`].
pub const X: usize = 0;
pub const Y: usize = 1;
pub const W: usize = 2;
pub const H: usize = 3;

pub const CLASS_CAR: u8 = 0;
pub const CLASS_PEDESTRIAN: u8 = 1;
pub const CLASS_CYCLIST: u8 = 2;
pub const NUM_CLASSES: usize = 3;
pub const CLASS_NAMES: [&str; NUM_CLASSES] = ["car", "pedestrian", "cyclist"];

/// Sensor stream a detection came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    Rgb,
    Depth,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Rgb => "rgb",
            Modality::Depth => "depth",
        }
    }

    pub fn other(self) -> Modality {
        match self {
            Modality::Rgb => Modality::Depth,
            Modality::Depth => Modality::Rgb,
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rgb" => Ok(Modality::Rgb),
            "depth" => Ok(Modality::Depth),
            other => Err(Error::InvalidValue(format!("unknown modality `{other}`"))),
        }
    }
}

/// Axis-aligned box in corner form, pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl CornerBox {
    /// Builds a box, rejecting degenerate or non-finite extents.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let b = CornerBox {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::InvalidValue(format!("degenerate box {self:?}")));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Center-form `(x, y, w, h)`.
    pub fn to_center(&self) -> [f64; 4] {
        [
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
            self.width(),
            self.height(),
        ]
    }

    pub fn from_center(c: [f64; 4]) -> Self {
        CornerBox {
            x_min: c[X] - c[W] / 2.0,
            y_min: c[Y] - c[H] / 2.0,
            x_max: c[X] + c[W] / 2.0,
            y_max: c[Y] + c[H] / 2.0,
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        CornerBox {
            x_min: self.x_min + dx,
            y_min: self.y_min + dy,
            x_max: self.x_max + dx,
            y_max: self.y_max + dy,
        }
    }
}

/// A detection whose four center-form coordinates are independent Gaussians.
///
/// `var` holds the per-coordinate variance in pixels², used as the aleatoric
/// uncertainty of the prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBox {
    pub mean: [f64; 4],
    pub var: [f64; 4],
    pub score: f64,
    pub class_id: u8,
    pub modality: Modality,
}

impl GaussianBox {
    pub fn new(
        mean: [f64; 4],
        var: [f64; 4],
        score: f64,
        class_id: u8,
        modality: Modality,
    ) -> Result<Self> {
        let b = GaussianBox {
            mean,
            var,
            score,
            class_id,
            modality,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidValue(format!("non-finite box mean {:?}", self.mean)));
        }
        if !(self.mean[W] > 0.0 && self.mean[H] > 0.0) {
            return Err(Error::InvalidValue(format!(
                "box size must be positive, got w={} h={}",
                self.mean[W], self.mean[H]
            )));
        }
        if !self.var.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::InvalidValue(format!(
                "variances must be positive and finite, got {:?}",
                self.var
            )));
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::InvalidValue(format!("score {} outside [0,1]", self.score)));
        }
        Ok(())
    }

    pub fn to_corners(&self) -> CornerBox {
        CornerBox::from_center(self.mean)
    }

    /// Center-form box from corners with the given variance, score and labels.
    pub fn from_corners(
        c: &CornerBox,
        var: [f64; 4],
        score: f64,
        class_id: u8,
        modality: Modality,
    ) -> Self {
        GaussianBox {
            mean: c.to_center(),
            var,
            score,
            class_id,
            modality,
        }
    }

    /// Mean of the four coordinate variances; the single per-box uncertainty
    /// used in scatter analyses.
    pub fn mean_variance(&self) -> f64 {
        self.var.iter().sum::<f64>() / 4.0
    }
}

/// Intersection over union of two corner boxes. Disjoint boxes give 0.
pub fn iou(a: &CornerBox, b: &CornerBox) -> f64 {
    let iw = a.x_max.min(b.x_max) - a.x_min.max(b.x_min);
    let ih = a.y_max.min(b.y_max) - a.y_min.max(b.y_min);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Logistic map used to bring raw network outputs into (0, 1).
pub fn sigmoid_scale(raw: f64) -> f64 {
    // Split on sign so neither branch computes exp of a large positive number.
    if raw >= 0.0 {
        1.0 / (1.0 + (-raw).exp())
    } else {
        let e = raw.exp();
        e / (1.0 + e)
    }
}
