//! Aleatoric box uncertainty: the training objective, coverage calibration
//! and correlation with localization quality.

mod calibration;
mod correlation;
mod loss;

pub use calibration::{default_levels, ece_curve, CalibrationBin, CalibrationCurve, PairedPrediction};
pub use correlation::{
    correlation_stats, pearson, scatter_correlations, Correlation, CorrelationStats, ScatterPoint,
};
pub use loss::{
    attenuated_loss, attenuated_loss_grad, gaussian_pdf, nll_loss, weighted_gaussian_nll, LossBatch,
    LossSample,
};
