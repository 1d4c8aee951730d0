//! Late fusion of camera and LiDAR detections with per-coordinate Gaussian
//! box uncertainty.
//!
//! The crate is organized around the data flow of a result-level fusion
//! experiment:
//!
//! - [`geometry`]: box types and IoU.
//! - [`fusion`]: baseline NMS, soft/softer-NMS primitives and the
//!   uncertainty-aware multi-source NMS that merges two modalities.
//! - [`uncertainty`]: the loss-attenuation objective with analytic gradients,
//!   interval calibration (ECE) and correlation analysis.
//! - [`projection`]: LiDAR point clouds to normalized front-view depth rasters.
//! - [`corruption`]: seeded Gaussian noise, motion blur and frost at five
//!   severity levels.
//! - [`eval`]: matching, 11-point AP, a synthetic detector simulator and the
//!   noise-degradation grid.
//! - [`io`]: KITTI labels/calibration/velodyne readers, netpbm rasters,
//!   detection records and the synthetic corpus format.

pub mod corruption;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod geometry;
pub mod io;
pub mod projection;
pub mod rng;
pub mod uncertainty;

pub use error::{Error, Result};
pub use geometry::{CornerBox, GaussianBox, Modality};
