//! Loss attenuation for Gaussian box regression.
//!
//! Each coordinate is modelled as `N(pred_mu, pred_var)`. The attenuated
//! squared error trades residual against predicted variance, so a model can
//! only lower its loss on a hard example by admitting more uncertainty.

use std::f64::consts::PI;

use crate::{Error, Result};

/// One anchor-level regression target with its Gaussian prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSample {
    /// Ground-truth `(x, y, w, h)` in pixels.
    pub target: [f64; 4],
    pub pred_mu: [f64; 4],
    /// Predicted variance per coordinate, strictly positive.
    pub pred_var: [f64; 4],
    /// Ground-truth width normalized by image width, in (0, 1].
    pub gt_w_norm: f64,
    /// Ground-truth height normalized by image height, in (0, 1].
    pub gt_h_norm: f64,
    /// Whether this prediction's anchor is responsible for the object.
    pub anchor_match: bool,
}

impl LossSample {
    pub fn new(
        target: [f64; 4],
        pred_mu: [f64; 4],
        pred_var: [f64; 4],
        gt_w_norm: f64,
        gt_h_norm: f64,
        anchor_match: bool,
    ) -> Result<Self> {
        let s = LossSample {
            target,
            pred_mu,
            pred_var,
            gt_w_norm,
            gt_h_norm,
            anchor_match,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.pred_var.iter().all(|v| *v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "predicted variances must be positive, got {:?}",
                self.pred_var
            )));
        }
        for v in [self.gt_w_norm, self.gt_h_norm] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidValue(format!(
                    "normalized ground-truth size {v} outside (0,1]"
                )));
            }
        }
        Ok(())
    }

    pub fn residual(&self, k: usize) -> f64 {
        self.target[k] - self.pred_mu[k]
    }

    /// Size-dependent weight, zero for unmatched anchors. Small objects
    /// weigh up to twice as much as image-filling ones.
    pub fn weight(&self) -> f64 {
        if self.anchor_match {
            (2.0 - self.gt_w_norm * self.gt_h_norm) / 2.0
        } else {
            0.0
        }
    }
}

/// Flattened set of anchor-level samples (the grid cells × anchors of a
/// detector output, in any order).
#[derive(Debug, Clone, PartialEq)]
pub struct LossBatch {
    pub samples: Vec<LossSample>,
    /// Added to the density before the log.
    pub epsilon: f64,
}

impl LossBatch {
    pub const DEFAULT_EPSILON: f64 = 1e-9;

    pub fn new(samples: Vec<LossSample>) -> Self {
        LossBatch {
            samples,
            epsilon: Self::DEFAULT_EPSILON,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidValue(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        self.samples.iter().try_for_each(LossSample::validate)
    }
}

/// `Σ_k r_k² / (2 σ_k²) + ½ log σ_k²` over the four coordinates.
pub fn attenuated_loss(sample: &LossSample) -> f64 {
    (0..4)
        .map(|k| {
            let r = sample.residual(k);
            let v = sample.pred_var[k];
            r * r / (2.0 * v) + 0.5 * v.ln()
        })
        .sum()
}

/// Partial derivatives of [`attenuated_loss`] with respect to the predicted
/// mean and the predicted variance.
pub fn attenuated_loss_grad(sample: &LossSample) -> ([f64; 4], [f64; 4]) {
    let mut d_mu = [0.0; 4];
    let mut d_var = [0.0; 4];
    for k in 0..4 {
        let r = sample.residual(k);
        let v = sample.pred_var[k];
        d_mu[k] = -r / v;
        d_var[k] = -(r * r) / (2.0 * v * v) + 1.0 / (2.0 * v);
    }
    (d_mu, d_var)
}

/// Univariate normal density.
pub fn gaussian_pdf(x: f64, mu: f64, var: f64) -> f64 {
    let r = x - mu;
    (-(r * r) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// `-weight · Σ_k log(N(target_k | mu_k, var_k) + epsilon)` for one sample.
///
/// Densities above 1 (small variances) make the term negative; that is
/// allowed.
pub fn weighted_gaussian_nll(sample: &LossSample, weight: f64, epsilon: f64) -> f64 {
    if weight == 0.0 {
        return 0.0;
    }
    let sum: f64 = (0..4)
        .map(|k| (gaussian_pdf(sample.target[k], sample.pred_mu[k], sample.pred_var[k]) + epsilon).ln())
        .sum();
    -weight * sum
}

/// Size-weighted negative log-likelihood over a batch.
pub fn nll_loss(batch: &LossBatch) -> f64 {
    batch
        .samples
        .iter()
        .map(|s| weighted_gaussian_nll(s, s.weight(), batch.epsilon))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(r: f64, var: f64) -> LossSample {
        LossSample::new([r, 0.0, 0.0, 0.0], [0.0; 4], [var, 1.0, 1.0, 1.0], 0.5, 0.5, true).unwrap()
    }

    #[test]
    fn attenuated_examples() {
        let zero = LossSample::new([3.0; 4], [3.0; 4], [1.0; 4], 0.5, 0.5, true).unwrap();
        assert_eq!(attenuated_loss(&zero), 0.0);
        assert_eq!(attenuated_loss(&sample(1.0, 1.0)), 0.5);
        let (d_mu, _) = attenuated_loss_grad(&zero);
        assert_eq!(d_mu, [0.0; 4]);
        let (_, d_var) = attenuated_loss_grad(&sample(1.0, 1.0));
        assert_eq!(d_var[0], 0.0);
    }

    #[test]
    fn nll_examples() {
        let s = LossSample::new([1.0; 4], [1.0; 4], [1.0; 4], 0.5, 0.5, true).unwrap();
        let batch = LossBatch::new(vec![s]);
        let per_coord = -(2.0 - 0.25) / 2.0 * ((1.0 / (2.0 * PI).sqrt()) + 1e-9f64).ln();
        assert!((per_coord - 0.8041).abs() < 1e-4);
        assert!((nll_loss(&batch) - 4.0 * per_coord).abs() < 1e-12);

        let unmatched = LossSample {
            anchor_match: false,
            target: [1e6; 4],
            ..s
        };
        assert_eq!(nll_loss(&LossBatch::new(vec![unmatched])), 0.0);
    }

    #[test]
    fn nll_increases_with_residual() {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..50 {
            let s = sample(i as f64 * 0.1, 1.0);
            let l = nll_loss(&LossBatch::new(vec![s]));
            assert!(l > prev);
            prev = l;
        }
    }

    #[test]
    fn nll_with_unit_weight_matches_attenuated_plus_constant() {
        let s = LossSample::new([1.0, -2.0, 30.0, 12.0], [0.5, -1.0, 28.0, 13.5], [0.3, 2.0, 4.5, 1.1], 0.1, 0.2, true)
            .unwrap();
        let nll = weighted_gaussian_nll(&s, 1.0, 0.0);
        let expected = attenuated_loss(&s) + 4.0 * 0.5 * (2.0 * PI).ln();
        assert!((nll - expected).abs() < 1e-10);
    }

    #[test]
    fn validation() {
        assert!(LossSample::new([0.0; 4], [0.0; 4], [0.0, 1.0, 1.0, 1.0], 0.5, 0.5, true).is_err());
        assert!(LossSample::new([0.0; 4], [0.0; 4], [1.0; 4], 0.0, 0.5, true).is_err());
        assert!(LossSample::new([0.0; 4], [0.0; 4], [1.0; 4], 0.5, 1.5, true).is_err());
        let mut b = LossBatch::new(vec![]);
        b.epsilon = 0.0;
        assert!(b.validate().is_err());
    }
}
