//! Mean Euclidean distance between live-frame scene points moved by the
//! predicted and by the ground-truth relative transforms, and its gradient
//! with respect to the predicted pose vector.

use nalgebra::{Matrix3, Vector3};

use super::camera::{backproject, CameraIntrinsics, DepthMap};
use super::pose::Pose6;
use super::se3::{se3_exp, se3_exp_jacobians};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Residual norms at or below this are treated as non-differentiable.
pub const DEGENERATE_RESIDUAL: f64 = 1e-12;

/// Valid back-projected points of a depth map, reusable across loss
/// evaluations.
#[derive(Debug, Clone)]
pub struct LossPoints {
    points: Vec<Vector3<f64>>,
    pixels: Vec<usize>,
}

impl LossPoints {
    pub fn from_depth(depth: &DepthMap, k: &CameraIntrinsics) -> Result<Self> {
        let grid = backproject(depth, k)?;
        let mut points = Vec::new();
        let mut pixels = Vec::new();
        for (i, (p, &ok)) in grid.points.iter().zip(&grid.valid).enumerate() {
            if ok {
                points.push(Vector3::new(p.x, p.y, p.z));
                pixels.push(i);
            }
        }
        Ok(Self { points, pixels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn loss(&self, delta_pred: &Pose6, delta_gt: &Pose6) -> f64 {
        let tp = se3_exp(delta_pred);
        let tg = se3_exp(delta_gt);
        let (rp, tp_t) = (tp.rotation(), tp.translation());
        let (rg, tg_t) = (tg.rotation(), tg.translation());
        // (Rp - Rg) X + (tp - tg)
        let dr = rp - rg;
        let dt = tp_t - tg_t;
        let sum: CompensatedSum = self.points.iter().map(|x| (dr * x + dt).norm()).collect();
        sum.value() / self.points.len() as f64
    }

    fn loss_and_grad(
        &self,
        delta_pred: &Pose6,
        delta_gt: &Pose6,
        strict: bool,
    ) -> Result<(f64, PoseGradient)> {
        let jac = se3_exp_jacobians(delta_pred);
        let tg = se3_exp(delta_gt);
        let dr = jac.transform.rotation() - tg.rotation();
        let dt = jac.transform.translation() - tg.translation();

        let mut loss = CompensatedSum::new();
        let mut unit_sum = [CompensatedSum::new(); 3];
        // Σ u Xᵀ, row-major
        let mut outer = [CompensatedSum::new(); 9];
        for (x, &pixel) in self.points.iter().zip(&self.pixels) {
            let r = dr * x + dt;
            let norm = r.norm();
            loss.add(norm);
            if norm <= DEGENERATE_RESIDUAL {
                if strict {
                    return Err(Error::DegenerateResidual { pixel, norm });
                }
                continue;
            }
            let u = r / norm;
            for a in 0..3 {
                unit_sum[a].add(u[a]);
                for b in 0..3 {
                    outer[a * 3 + b].add(u[a] * x[b]);
                }
            }
        }

        let n = self.points.len() as f64;
        let u_sum = Vector3::new(unit_sum[0].value(), unit_sum[1].value(), unit_sum[2].value());
        let m = Matrix3::from_fn(|a, b| outer[a * 3 + b].value());
        let mut rot = Vector3::zeros();
        for i in 0..3 {
            rot[i] = (jac.d_rotation[i].component_mul(&m).sum()
                + u_sum.dot(&jac.d_translation_rot[i]))
                / n;
        }
        let trans = jac.d_translation_trans.transpose() * u_sum / n;
        Ok((loss.value() / n, PoseGradient { rot, trans }))
    }
}

/// Gradient of the loss with respect to the rotation and translation parts
/// of the predicted pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseGradient {
    pub rot: Vector3<f64>,
    pub trans: Vector3<f64>,
}

impl PoseGradient {
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.rot.x,
            self.rot.y,
            self.rot.z,
            self.trans.x,
            self.trans.y,
            self.trans.z,
        ]
    }
}

/// Projection loss in meters, averaged over valid depth pixels.
pub fn projection_loss(
    delta_pred: &Pose6,
    delta_gt: &Pose6,
    depth: &DepthMap,
    k: &CameraIntrinsics,
) -> Result<f64> {
    Ok(LossPoints::from_depth(depth, k)?.loss(delta_pred, delta_gt))
}

/// Analytic gradient of [`projection_loss`] with respect to `delta_pred`.
///
/// Fails with [`Error::DegenerateResidual`] when any residual vanishes.
pub fn projection_loss_grad(
    delta_pred: &Pose6,
    delta_gt: &Pose6,
    depth: &DepthMap,
    k: &CameraIntrinsics,
) -> Result<PoseGradient> {
    let pts = LossPoints::from_depth(depth, k)?;
    Ok(pts.loss_and_grad(delta_pred, delta_gt, true)?.1)
}

/// Loss and a subgradient: pixels whose residual vanishes contribute zero.
/// This is what the trainer uses, since a pair whose prediction is exact on
/// some pixels is an ordinary occurrence there.
pub fn loss_and_subgradient(
    points: &LossPoints,
    delta_pred: &Pose6,
    delta_gt: &Pose6,
) -> (f64, PoseGradient) {
    points
        .loss_and_grad(delta_pred, delta_gt, false)
        .expect("non-strict gradient cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::new(3.0, 3.5, 1.5, 1.2).unwrap()
    }

    fn depth() -> DepthMap {
        DepthMap::new(4, 3, (0..12).map(|i| 1.0 + 0.3 * i as f64).collect()).unwrap()
    }

    #[test]
    fn equal_poses_give_zero_loss() {
        let p = Pose6::new([0.1, -0.2, 0.3], [1.0, 2.0, -0.5]).unwrap();
        assert_eq!(projection_loss(&p, &p, &depth(), &k()).unwrap(), 0.0);
    }

    #[test]
    fn translation_offset_gives_constant_residual() {
        let eps = 0.37;
        let pred = Pose6::translation_only([eps, 0.0, 0.0]).unwrap();
        let loss = projection_loss(&pred, &Pose6::zero(), &depth(), &k()).unwrap();
        assert!((loss - eps).abs() < 1e-15);
    }

    #[test]
    fn normalizes_by_valid_pixels_only() {
        let d = DepthMap::new(2, 1, vec![1.0, 0.0]).unwrap();
        let pred = Pose6::translation_only([0.5, 0.0, 0.0]).unwrap();
        assert_eq!(projection_loss(&pred, &Pose6::zero(), &d, &k()).unwrap(), 0.5);
        assert!(matches!(
            projection_loss(&pred, &Pose6::zero(), &DepthMap::filled(2, 2, -1.0).unwrap(), &k()),
            Err(Error::EmptyDepth)
        ));
    }

    #[test]
    fn strict_gradient_rejects_zero_residuals() {
        let p = Pose6::new([0.1, 0.0, 0.0], [0.0; 3]).unwrap();
        assert!(matches!(
            projection_loss_grad(&p, &p, &depth(), &k()),
            Err(Error::DegenerateResidual { .. })
        ));
        let pts = LossPoints::from_depth(&depth(), &k()).unwrap();
        let (loss, g) = loss_and_subgradient(&pts, &p, &p);
        assert_eq!(loss, 0.0);
        assert_eq!(g.to_array(), [0.0; 6]);
    }

    #[test]
    fn pure_x_translation_mismatch_has_unit_x_gradient() {
        let pred = Pose6::translation_only([0.2, 0.0, 0.0]).unwrap();
        let g = projection_loss_grad(&pred, &Pose6::zero(), &depth(), &k()).unwrap();
        assert!((g.trans.x - 1.0).abs() < 1e-12);
        assert!(g.trans.y.abs() < 1e-12 && g.trans.z.abs() < 1e-12);
        let neg = Pose6::translation_only([-0.2, 0.0, 0.0]).unwrap();
        let g = projection_loss_grad(&neg, &Pose6::zero(), &depth(), &k()).unwrap();
        assert!((g.trans.x + 1.0).abs() < 1e-12);
    }
}
