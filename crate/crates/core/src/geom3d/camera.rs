use nalgebra::{Matrix3, Vector3, Vector4};

use super::se3::Transform;
use crate::error::{Error, Result};

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if ![fx, fy, cx, cy].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("camera intrinsics"));
        }
        if fx <= 0.0 || fy <= 0.0 {
            return Err(Error::InvalidIntrinsics(format!(
                "focal lengths must be positive (fx={fx}, fy={fy})"
            )));
        }
        Ok(Self { fx, fy, cx, cy })
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    pub fn inverse_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            1.0 / self.fx,
            0.0,
            -self.cx / self.fx,
            0.0,
            1.0 / self.fy,
            -self.cy / self.fy,
            0.0,
            0.0,
            1.0,
        )
    }

    /// Intrinsics of the image obtained by keeping every `step`-th pixel
    /// starting at `offset` in both axes.
    pub fn decimated(&self, step: usize, offset: usize) -> Self {
        let s = step as f64;
        let o = offset as f64;
        Self {
            fx: self.fx / s,
            fy: self.fy / s,
            cx: (self.cx - o) / s,
            cy: (self.cy - o) / s,
        }
    }

    /// Intrinsics after resampling an image by independent axis scale factors
    /// (pixel-center convention: `u' = (u + 0.5) * sx - 0.5`).
    pub fn scaled(&self, sx: f64, sy: f64) -> Self {
        Self {
            fx: self.fx * sx,
            fy: self.fy * sy,
            cx: (self.cx + 0.5) * sx - 0.5,
            cy: (self.cy + 0.5) * sy - 0.5,
        }
    }

    /// Intrinsics after cropping the image at `(x0, y0)`.
    pub fn cropped(&self, x0: usize, y0: usize) -> Self {
        Self {
            cx: self.cx - x0 as f64,
            cy: self.cy - y0 as f64,
            ..*self
        }
    }
}

/// Per-pixel depth in meters, row-major. Non-positive or non-finite values are
/// invalid pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::dims("non-empty depth map", format!("{width}x{height}")));
        }
        if values.len() != width * height {
            return Err(Error::dims(width * height, values.len()));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, depth: f64) -> Result<Self> {
        Self::new(width, height, vec![depth; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[v * self.width + u]
    }

    #[inline]
    pub fn is_valid_depth(d: f64) -> bool {
        d.is_finite() && d > 0.0
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|&&d| Self::is_valid_depth(d)).count()
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|&d| f(d)).collect(),
        }
    }

    /// Keeps every `step`-th pixel starting at `offset`; pair with
    /// [`CameraIntrinsics::decimated`].
    pub fn decimated(&self, step: usize, offset: usize) -> Self {
        let step = step.max(1);
        let offset = offset.min(self.width - 1).min(self.height - 1);
        let w = (self.width - offset).div_ceil(step);
        let h = (self.height - offset).div_ceil(step);
        let mut values = Vec::with_capacity(w * h);
        for v in (offset..self.height).step_by(step) {
            for u in (offset..self.width).step_by(step) {
                values.push(self.get(u, v));
            }
        }
        Self {
            width: w,
            height: h,
            values,
        }
    }
}

/// Homogenized 3D points, one per pixel, with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct PointGrid {
    pub width: usize,
    pub height: usize,
    pub points: Vec<Vector4<f64>>,
    pub valid: Vec<bool>,
}

impl PointGrid {
    pub fn valid_points(&self) -> impl Iterator<Item = &Vector4<f64>> {
        self.points
            .iter()
            .zip(&self.valid)
            .filter_map(|(p, &ok)| ok.then_some(p))
    }
}

/// Lifts every valid depth pixel to its camera-frame 3D point.
pub fn backproject(depth: &DepthMap, k: &CameraIntrinsics) -> Result<PointGrid> {
    let n = depth.width * depth.height;
    let mut points = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    for v in 0..depth.height {
        for u in 0..depth.width {
            let d = depth.get(u, v);
            if DepthMap::is_valid_depth(d) {
                let x = (u as f64 - k.cx) / k.fx * d;
                let y = (v as f64 - k.cy) / k.fy * d;
                points.push(Vector4::new(x, y, d, 1.0));
                valid.push(true);
            } else {
                points.push(Vector4::zeros());
                valid.push(false);
            }
        }
    }
    if !valid.iter().any(|&b| b) {
        return Err(Error::EmptyDepth);
    }
    Ok(PointGrid {
        width: depth.width,
        height: depth.height,
        points,
        valid,
    })
}

pub fn transform_points(t: &Transform, grid: &PointGrid) -> PointGrid {
    let points = grid
        .points
        .iter()
        .zip(&grid.valid)
        .map(|(p, &ok)| if ok { t.apply_homogeneous(p) } else { *p })
        .collect();
    PointGrid {
        width: grid.width,
        height: grid.height,
        points,
        valid: grid.valid.clone(),
    }
}

/// Pinhole projection of camera-frame points; `None` for invalid points and
/// points at or behind the camera plane.
pub fn project(grid: &PointGrid, k: &CameraIntrinsics) -> Vec<Option<(f64, f64)>> {
    grid.points
        .iter()
        .zip(&grid.valid)
        .map(|(p, &ok)| {
            let q = Vector3::new(p.x, p.y, p.z);
            (ok && q.z > 0.0).then(|| (k.fx * q.x / q.z + k.cx, k.fy * q.y / q.z + k.cy))
        })
        .collect()
}
