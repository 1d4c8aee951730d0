//! Front-view depth rasters from LiDAR sweeps.
//!
//! A velodyne point `P` is taken into the camera frame with `R·P + T` and onto
//! the image plane with the intrinsics `K`. Each surviving point is splatted
//! into a single pixel; when several land on the same pixel the nearest one
//! wins. Stored values are camera-frame depth divided by a fixed range and
//! clamped to `[0, 1]`, with 0 meaning "no return".

use crate::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

/// KITTI LiDAR effective range, used as the depth normalization scale.
pub const DEFAULT_MAX_RANGE: f64 = 80.0;
/// Cropped raster size, `(width, height)`.
pub const DEFAULT_OUT_SIZE: (usize, usize) = (512, 128);
/// Typical KITTI left color camera frame.
pub const KITTI_IMAGE_SIZE: (usize, usize) = (1242, 375);

const ORTHONORMAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointXyzi {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub intensity: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<PointXyzi>,
}

/// Camera intrinsics and the LiDAR-to-camera rigid transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibMatrices {
    pub k: Mat3,
    pub r: Mat3,
    pub t: [f64; 3],
}

impl CalibMatrices {
    pub fn identity(fx: f64, fy: f64, cx: f64, cy: f64) -> Self {
        CalibMatrices {
            k: [[fx, 0.0, cx], [0.0, fy, cy], [0.0, 0.0, 1.0]],
            r: IDENTITY,
            t: [0.0; 3],
        }
    }

    /// Folds KITTI's `P2`, `R0_rect` and `Tr_velo_to_cam` into `K [R | T]`.
    ///
    /// `P2 = K [I | K⁻¹ p]` for its last column `p`, so
    /// `P2 · R0 · Tr = K [R0·R_tr | R0·t_tr + K⁻¹ p]`.
    pub fn from_kitti(p2: &[[f64; 4]; 3], r0_rect: &Mat3, tr_velo_to_cam: &[[f64; 4]; 3]) -> Result<Self> {
        let k: Mat3 = std::array::from_fn(|i| [p2[i][0], p2[i][1], p2[i][2]]);
        let r_tr: Mat3 = std::array::from_fn(|i| [tr_velo_to_cam[i][0], tr_velo_to_cam[i][1], tr_velo_to_cam[i][2]]);
        let t_tr = [tr_velo_to_cam[0][3], tr_velo_to_cam[1][3], tr_velo_to_cam[2][3]];
        let p_col = [p2[0][3], p2[1][3], p2[2][3]];
        let calib = CalibMatrices { k, r: IDENTITY, t: [0.0; 3] };
        calib.check_intrinsics()?;
        let k_inv_p = calib.k_inverse_apply(p_col);
        let r0_t = mat_vec(r0_rect, t_tr);
        let out = CalibMatrices {
            k,
            r: mat_mul(r0_rect, &r_tr),
            t: [r0_t[0] + k_inv_p[0], r0_t[1] + k_inv_p[1], r0_t[2] + k_inv_p[2]],
        };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.check_intrinsics()?;
        let rtr = mat_mul(&transpose(&self.r), &self.r);
        for (i, row) in rtr.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                if !((v - want).abs() <= ORTHONORMAL_TOL) {
                    return Err(Error::Calibration(format!(
                        "rotation is not orthonormal: (RᵀR)[{i}][{j}] = {v}"
                    )));
                }
            }
        }
        if !self.t.iter().all(|v| v.is_finite()) {
            return Err(Error::Calibration("non-finite translation".into()));
        }
        Ok(())
    }

    fn check_intrinsics(&self) -> Result<()> {
        let k = &self.k;
        if !k.iter().flatten().all(|v| v.is_finite()) {
            return Err(Error::Calibration("non-finite intrinsics".into()));
        }
        if k[1][0] != 0.0 || k[2][0] != 0.0 || k[2][1] != 0.0 {
            return Err(Error::Calibration("intrinsics must be upper triangular".into()));
        }
        if !(k[0][0] > 0.0 && k[1][1] > 0.0 && k[2][2] > 0.0) {
            return Err(Error::Calibration("intrinsics need positive focal terms".into()));
        }
        Ok(())
    }

    /// Sensor-frame point to camera frame.
    pub fn to_camera(&self, p: [f64; 3]) -> [f64; 3] {
        let rp = mat_vec(&self.r, p);
        [rp[0] + self.t[0], rp[1] + self.t[1], rp[2] + self.t[2]]
    }

    /// Camera-frame point to sub-pixel image coordinates, or `None` behind
    /// the camera.
    pub fn project_camera(&self, c: [f64; 3]) -> Option<(f64, f64)> {
        let h = mat_vec(&self.k, c);
        if !(c[2] > 0.0 && h[2] > 0.0) {
            return None;
        }
        Some((h[0] / h[2], h[1] / h[2]))
    }

    /// Camera-frame point at image position `(u, v)` and depth `z`.
    pub fn back_project(&self, u: f64, v: f64, z: f64) -> [f64; 3] {
        let ray = self.k_inverse_apply([u, v, 1.0]);
        // ray[2] = 1 / k22, so scale the whole ray to reach depth z.
        let s = z / ray[2];
        [ray[0] * s, ray[1] * s, z]
    }

    /// `K⁻¹ x` by back substitution (K is upper triangular).
    fn k_inverse_apply(&self, x: [f64; 3]) -> [f64; 3] {
        let k = &self.k;
        let z = x[2] / k[2][2];
        let y = (x[1] - k[1][2] * z) / k[1][1];
        let w = (x[0] - k[0][1] * y - k[0][2] * z) / k[0][0];
        [w, y, z]
    }
}

/// Row-major raster of normalized depth.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl DepthImage {
    pub fn new(width: usize, height: usize) -> Self {
        DepthImage {
            width,
            height,
            pixels: vec![0.0; width * height],
        }
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.pixels[row * self.width + col]
    }
}

/// Offset `(x, y)` of a `out`-sized crop that is horizontally centred and
/// flush with the bottom of a `full`-sized image.
pub fn center_bottom_crop(full: (usize, usize), out: (usize, usize)) -> (i64, i64) {
    let dx = (full.0 as i64 - out.0 as i64) / 2;
    let dy = full.1 as i64 - out.1 as i64;
    (dx, dy)
}

/// Projects onto an `out_size` image plane whose origin is the camera's
/// pixel origin.
pub fn project_points(
    cloud: &PointCloud,
    calib: &CalibMatrices,
    out_size: (usize, usize),
    max_range: f64,
) -> Result<DepthImage> {
    project_with_offset(cloud, calib, out_size, (0, 0), max_range)
}

/// Projects onto the full camera frame and keeps its center-bottom
/// `out_size` crop.
pub fn project_points_cropped(
    cloud: &PointCloud,
    calib: &CalibMatrices,
    full_size: (usize, usize),
    out_size: (usize, usize),
    max_range: f64,
) -> Result<DepthImage> {
    project_with_offset(cloud, calib, out_size, center_bottom_crop(full_size, out_size), max_range)
}

pub fn project_with_offset(
    cloud: &PointCloud,
    calib: &CalibMatrices,
    out_size: (usize, usize),
    offset: (i64, i64),
    max_range: f64,
) -> Result<DepthImage> {
    calib.validate()?;
    if !(max_range > 0.0 && max_range.is_finite()) {
        return Err(Error::InvalidValue(format!("max range must be > 0, got {max_range}")));
    }
    let (w, h) = out_size;
    let mut zbuf = vec![f64::INFINITY; w * h];
    for p in &cloud.points {
        let c = calib.to_camera([p.x, p.y, p.z]);
        let Some((u, v)) = calib.project_camera(c) else {
            continue;
        };
        if !(u.is_finite() && v.is_finite()) {
            continue;
        }
        let col = u.round() - offset.0 as f64;
        let row = v.round() - offset.1 as f64;
        if col < 0.0 || row < 0.0 || col >= w as f64 || row >= h as f64 {
            continue;
        }
        let i = row as usize * w + col as usize;
        if c[2] < zbuf[i] {
            zbuf[i] = c[2];
        }
    }
    let pixels = zbuf
        .into_iter()
        .map(|z| if z.is_finite() { (z / max_range).clamp(0.0, 1.0) } else { 0.0 })
        .collect();
    Ok(DepthImage {
        width: w,
        height: h,
        pixels,
    })
}

/// Affine map of `[min, max]` onto `[0, 1]`; constant input maps to zeros.
pub fn normalize_raster(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if values.is_empty() || !(hi > lo) {
        return vec![0.0; values.len()];
    }
    let span = hi - lo;
    values.iter().map(|v| ((v - lo) / span).clamp(0.0, 1.0)).collect()
}

const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

fn mat_vec(a: &Mat3, x: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2])
}

fn transpose(a: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64, z: f64) -> PointXyzi {
        PointXyzi { x, y, z, intensity: 0.0 }
    }

    fn calib() -> CalibMatrices {
        CalibMatrices::identity(100.0, 100.0, 256.0, 64.0)
    }

    #[test]
    fn on_axis_point_hits_principal_point() {
        let cloud = PointCloud { points: vec![pt(0.0, 0.0, 5.0)] };
        let img = project_points(&cloud, &calib(), (512, 128), 80.0).unwrap();
        assert_eq!(img.get(256, 64), 5.0 / 80.0);
        assert_eq!(img.pixels.iter().filter(|v| **v > 0.0).count(), 1);
    }

    #[test]
    fn behind_camera_is_culled() {
        let cloud = PointCloud {
            points: vec![pt(0.0, 0.0, -5.0), pt(0.0, 0.0, 0.0)],
        };
        let img = project_points(&cloud, &calib(), (512, 128), 80.0).unwrap();
        assert!(img.pixels.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn nearest_point_wins() {
        let cloud = PointCloud {
            points: vec![pt(0.0, 0.0, 30.0), pt(0.0, 0.0, 10.0), pt(0.0, 0.0, 20.0)],
        };
        let img = project_points(&cloud, &calib(), (512, 128), 80.0).unwrap();
        assert_eq!(img.get(256, 64), 10.0 / 80.0);
    }

    #[test]
    fn far_points_saturate() {
        let cloud = PointCloud { points: vec![pt(0.0, 0.0, 500.0)] };
        let img = project_points(&cloud, &calib(), (512, 128), 80.0).unwrap();
        assert_eq!(img.get(256, 64), 1.0);
    }

    #[test]
    fn non_orthonormal_rotation_rejected() {
        let mut c = calib();
        c.r[0][0] = 1.01;
        let err = project_points(&PointCloud::default(), &c, (4, 4), 80.0).unwrap_err();
        assert!(matches!(err, Error::Calibration(_)));
    }

    #[test]
    fn crop_offsets() {
        assert_eq!(center_bottom_crop((1242, 375), (512, 128)), (365, 247));
        let c = CalibMatrices::identity(700.0, 700.0, 621.0, 187.5);
        // A point projecting to full-frame (621, 300) lands at (256, 53) in the crop.
        let z = 10.0;
        let p = c.back_project(621.0, 300.0, z);
        let cloud = PointCloud { points: vec![pt(p[0], p[1], p[2])] };
        let img = project_points_cropped(&cloud, &c, (1242, 375), (512, 128), 80.0).unwrap();
        assert_eq!((img.width, img.height), (512, 128));
        assert_eq!(img.get(256, 53), z / 80.0);
    }

    #[test]
    fn kitti_fold_matches_chained_product() {
        let p2 = [
            [721.5377, 0.0, 609.5593, 44.85728],
            [0.0, 721.5377, 172.854, 0.2163791],
            [0.0, 0.0, 1.0, 0.002745884],
        ];
        let r0 = {
            let (s, c) = (0.01f64.sin(), 0.01f64.cos());
            [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
        };
        let tr = [
            [0.0, -1.0, 0.0, -0.004069766],
            [0.0, 0.0, -1.0, -0.07631618],
            [1.0, 0.0, 0.0, -0.2717806],
        ];
        let c = CalibMatrices::from_kitti(&p2, &r0, &tr).unwrap();
        let x = [12.0, -1.5, 0.7];
        // Chained: P2 · [R0 · (R_tr x + t_tr); 1]
        let cam = {
            let a = [
                tr[0][0] * x[0] + tr[0][1] * x[1] + tr[0][2] * x[2] + tr[0][3],
                tr[1][0] * x[0] + tr[1][1] * x[1] + tr[1][2] * x[2] + tr[1][3],
                tr[2][0] * x[0] + tr[2][1] * x[1] + tr[2][2] * x[2] + tr[2][3],
            ];
            mat_vec(&r0, a)
        };
        let h: [f64; 3] = std::array::from_fn(|i| p2[i][0] * cam[0] + p2[i][1] * cam[1] + p2[i][2] * cam[2] + p2[i][3]);
        let (u, v) = c.project_camera(c.to_camera(x)).unwrap();
        assert!((u - h[0] / h[2]).abs() < 1e-9);
        assert!((v - h[1] / h[2]).abs() < 1e-9);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_raster(&[0.0, 5.0, 10.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(normalize_raster(&[3.0; 4]), vec![0.0; 4]);
        assert!(normalize_raster(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn normalize_idempotent(v in proptest::collection::vec(-1e3..1e3f64, 1..64)) {
            let once = normalize_raster(&v);
            prop_assert_eq!(normalize_raster(&once), once);
        }

        #[test]
        fn farther_points_never_change_pixels(
            pts in proptest::collection::vec((-20.0..20.0f64, -5.0..5.0f64, 1.0..60.0f64), 1..40),
            extra in 0.1..30.0f64,
        ) {
            let cloud = PointCloud { points: pts.iter().map(|&(x, y, z)| pt(x, y, z)).collect() };
            let before = project_points(&cloud, &calib(), (512, 128), 80.0).unwrap();
            let mut more = cloud.clone();
            // Push every point farther along its own ray.
            for p in &cloud.points {
                let s = (p.z + extra) / p.z;
                more.points.push(pt(p.x * s, p.y * s, p.z * s));
            }
            let after = project_points(&more, &calib(), (512, 128), 80.0).unwrap();
            prop_assert_eq!(before, after);
        }
    }
}
