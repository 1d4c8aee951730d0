//! Interval calibration of Gaussian coordinate predictions.
//!
//! For a confidence level `p`, a perfectly calibrated predictor places the
//! target inside the central `p`-mass interval of `N(mu, var)` for a fraction
//! `p` of coordinates. The calibration error is the mean absolute gap between
//! nominal and observed coverage over a grid of levels.

use statrs::function::erf::erf;

use crate::{Error, Result};

/// One coordinate-vector prediction and its target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedPrediction {
    pub pred_var: [f64; 4],
    pub pred_mu: [f64; 4],
    pub target: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationBin {
    pub expected: f64,
    pub observed: f64,
    /// Number of coordinates evaluated at this level.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationCurve {
    pub bins: Vec<CalibrationBin>,
    pub ece: f64,
}

/// `{0.05, 0.10, ..., 0.95}`.
pub fn default_levels() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

/// Probability mass of `N(0, var)` inside `[-|r|, |r|]`.
///
/// The target lies within the central `p` interval iff this mass is at most
/// `p`. Zero variance puts all mass at 0, so any non-zero residual is outside
/// every interval.
fn central_mass(residual: f64, var: f64) -> f64 {
    let r = residual.abs();
    if r == 0.0 {
        return 0.0;
    }
    if var <= 0.0 {
        return 1.0;
    }
    erf(r / (2.0 * var).sqrt())
}

/// Coverage curve and calibration error, per coordinate.
pub fn ece_curve(paired: &[PairedPrediction], levels: &[f64]) -> Result<CalibrationCurve> {
    if paired.is_empty() {
        return Err(Error::InsufficientData("calibration needs at least one prediction".into()));
    }
    if levels.is_empty() {
        return Err(Error::InvalidValue("no calibration levels".into()));
    }
    if levels.iter().any(|p| !(*p > 0.0 && *p < 1.0)) || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidValue(
            "calibration levels must be strictly increasing in (0,1)".into(),
        ));
    }

    let mut masses: Vec<f64> = paired
        .iter()
        .flat_map(|p| (0..4).map(move |k| central_mass(p.target[k] - p.pred_mu[k], p.pred_var[k])))
        .collect();
    masses.sort_by(f64::total_cmp);
    let n = masses.len();

    let bins: Vec<CalibrationBin> = levels
        .iter()
        .map(|&p| {
            let inside = masses.partition_point(|&m| m <= p);
            CalibrationBin {
                expected: p,
                observed: inside as f64 / n as f64,
                count: n,
            }
        })
        .collect();
    let ece = bins.iter().map(|b| (b.expected - b.observed).abs()).sum::<f64>() / bins.len() as f64;
    Ok(CalibrationCurve { bins, ece })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_level() {
        let sigma: f64 = 2.0;
        let mk = |r: f64| PairedPrediction {
            pred_var: [sigma * sigma; 4],
            pred_mu: [0.0; 4],
            target: [r; 4],
        };
        let pairs = [mk(0.0), mk(0.0), mk(3.0 * sigma), mk(3.0 * sigma)];
        let curve = ece_curve(&pairs, &[0.5]).unwrap();
        assert_eq!(curve.bins[0].observed, 0.5);
        assert_eq!(curve.bins[0].count, 16);
    }

    #[test]
    fn overconfident_predictions_cover_nothing() {
        let pairs: Vec<PairedPrediction> = (1..50)
            .map(|i| PairedPrediction {
                pred_var: [1e-300; 4],
                pred_mu: [0.0; 4],
                target: [i as f64 * 0.1; 4],
            })
            .collect();
        let levels = default_levels();
        let curve = ece_curve(&pairs, &levels).unwrap();
        assert!(curve.bins.iter().all(|b| b.observed == 0.0));
        let mean_level = levels.iter().sum::<f64>() / levels.len() as f64;
        assert!((curve.ece - mean_level).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(ece_curve(&[], &default_levels()), Err(Error::InsufficientData(_))));
        let p = PairedPrediction {
            pred_var: [1.0; 4],
            pred_mu: [0.0; 4],
            target: [0.0; 4],
        };
        assert!(ece_curve(&[p], &[0.5, 0.4]).is_err());
        assert!(ece_curve(&[p], &[0.0, 0.4]).is_err());
        assert!(ece_curve(&[p], &[]).is_err());
    }

    #[test]
    fn default_grid() {
        let l = default_levels();
        assert_eq!(l.len(), 19);
        assert!((l[0] - 0.05).abs() < 1e-15 && (l[18] - 0.95).abs() < 1e-15);
    }
}
