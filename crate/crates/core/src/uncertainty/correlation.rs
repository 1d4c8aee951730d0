//! How well predicted variance and confidence track localization quality.

use crate::geometry::{iou, CornerBox, GaussianBox};
use crate::{Error, Result};

/// A Pearson coefficient, or a flag when one variate is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    /// NaN when `degenerate`.
    pub value: f64,
    pub degenerate: bool,
}

impl Correlation {
    pub fn get(&self) -> Option<f64> {
        (!self.degenerate).then_some(self.value)
    }
}

/// Per-detection scatter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint {
    /// IoU with the best-overlapping ground truth.
    pub iou: f64,
    /// Mean of the four coordinate variances.
    pub variance: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationStats {
    pub iou_variance: Correlation,
    pub iou_score: Correlation,
    pub variance_score: Correlation,
    pub scatter: Vec<ScatterPoint>,
}

/// Matches every detection to its best-IoU ground truth and correlates the
/// three per-detection quantities.
pub fn correlation_stats(dets: &[GaussianBox], gts: &[CornerBox]) -> Result<CorrelationStats> {
    let scatter: Vec<ScatterPoint> = if gts.is_empty() {
        Vec::new()
    } else {
        dets.iter()
            .map(|d| {
                let c = d.to_corners();
                let best = gts.iter().map(|g| iou(&c, g)).fold(0.0, f64::max);
                ScatterPoint {
                    iou: best,
                    variance: d.mean_variance(),
                    score: d.score,
                }
            })
            .collect()
    };
    scatter_correlations(scatter)
}

/// Correlations over precomputed scatter points (e.g. pooled across frames).
pub fn scatter_correlations(scatter: Vec<ScatterPoint>) -> Result<CorrelationStats> {
    if scatter.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "correlation needs at least 3 matched detections, got {}",
            scatter.len()
        )));
    }
    let ious: Vec<f64> = scatter.iter().map(|p| p.iou).collect();
    let vars: Vec<f64> = scatter.iter().map(|p| p.variance).collect();
    let scores: Vec<f64> = scatter.iter().map(|p| p.score).collect();
    Ok(CorrelationStats {
        iou_variance: pearson(&ious, &vars),
        iou_score: pearson(&ious, &scores),
        variance_score: pearson(&vars, &scores),
        scatter,
    })
}

/// Single-pass (Welford) Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Correlation {
    assert_eq!(xs.len(), ys.len());
    let (mut mx, mut my) = (0.0, 0.0);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let n = (i + 1) as f64;
        let dx = x - mx;
        let dy = y - my;
        mx += dx / n;
        my += dy / n;
        sxx += dx * (x - mx);
        syy += dy * (y - my);
        sxy += dx * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Correlation {
            value: f64::NAN,
            degenerate: true,
        };
    }
    Correlation {
        value: (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0),
        degenerate: false,
    }
}
