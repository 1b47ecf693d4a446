//! SE(3) exponential and logarithm maps on twists `(rot, trans)`.
//!
//! The rotation block is `R = I + a[w] + b[w]^2` (Rodrigues) and the translation
//! is `V t` with the SO(3) left Jacobian `V = I + b[w] + c[w]^2`, where
//! `a = sin(θ)/θ`, `b = (1 - cos θ)/θ²`, `c = (θ - sin θ)/θ³`. With the
//! `decoupled-pose` feature the translation is used as-is (`V = I`).

use std::fmt;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use super::pose::Pose6;
use crate::error::{Error, Result};

const ORTHO_TOL: f64 = 1e-9;
const DRIFT_TOL: f64 = 1e-12;
const TINY_ANGLE: f64 = 1e-8;
const SERIES_ANGLE: f64 = 0.25;

/// A validated 4×4 homogeneous rigid-body transform.
#[derive(Clone, Copy, PartialEq)]
pub struct Transform {
    m: Matrix4<f64>,
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Transform{:?}", self.to_row_major())
    }
}

impl Default for Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform {
    pub fn identity() -> Self {
        Self {
            m: Matrix4::identity(),
        }
    }

    /// Validates and wraps a homogeneous matrix.
    pub fn try_from_matrix(m: Matrix4<f64>) -> Result<Self> {
        check_matrix(&m)?;
        Ok(Self { m })
    }

    pub fn from_parts(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        Self::try_from_matrix(assemble(&rotation, &translation))
    }

    pub fn from_translation(t: [f64; 3]) -> Self {
        Self {
            m: assemble(&Matrix3::identity(), &Vector3::from(t)),
        }
    }

    pub fn from_row_major(v: &[f64; 16]) -> Result<Self> {
        Self::try_from_matrix(Matrix4::from_row_slice(v))
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for r in 0..4 {
            for c in 0..4 {
                out[r * 4 + c] = self.m[(r, c)];
            }
        }
        out
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        self.m.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.m.fixed_view::<3, 1>(0, 3).into_owned()
    }

    pub fn apply_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation() * p + self.translation()
    }

    pub fn apply_homogeneous(&self, p: &Vector4<f64>) -> Vector4<f64> {
        self.m * p
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation().transpose();
        let t = -(rt * self.translation());
        Self { m: assemble(&rt, &t) }
    }

    /// `self · other`, re-orthonormalized when the rotation block drifts.
    pub fn compose(&self, other: &Transform) -> Self {
        let mut r = self.rotation() * other.rotation();
        let t = self.rotation() * other.translation() + self.translation();
        if orthonormality_error(&r) > DRIFT_TOL {
            r = polar_rotation(&r);
        }
        Self { m: assemble(&r, &t) }
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &Transform) -> f64 {
        (self.m - other.m).amax()
    }

    /// Rotation angle of the rotation block, in radians.
    pub fn rotation_angle(&self) -> f64 {
        let r = self.rotation();
        let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        let sin = vee_antisym(&r).norm();
        sin.atan2(cos)
    }
}

fn assemble(r: &Matrix3<f64>, t: &Vector3<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(t);
    m
}

fn orthonormality_error(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).norm()
}

fn check_matrix(m: &Matrix4<f64>) -> Result<()> {
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidTransform("non-finite entry".into()));
    }
    if m[(3, 0)] != 0.0 || m[(3, 1)] != 0.0 || m[(3, 2)] != 0.0 || m[(3, 3)] != 1.0 {
        return Err(Error::InvalidTransform(
            "bottom row is not (0, 0, 0, 1)".into(),
        ));
    }
    let r: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into_owned();
    let err = orthonormality_error(&r);
    if err >= ORTHO_TOL {
        return Err(Error::InvalidTransform(format!(
            "rotation block not orthonormal (|RᵀR - I| = {err:e})"
        )));
    }
    if r.determinant() <= 0.0 {
        return Err(Error::InvalidTransform("rotation block is a reflection".into()));
    }
    Ok(())
}

/// Nearest rotation in the Frobenius sense (polar factor).
fn polar_rotation(r: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = r.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut q = u * v_t;
    if q.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        q = u * v_t;
    }
    q
}

/// Skew-symmetric cross-product matrix.
pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

fn vee_antisym(r: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    ) * 0.5
}

/// Scalar coefficients of the Rodrigues / left-Jacobian expansions and their
/// derivatives divided by θ.
#[derive(Debug, Clone, Copy)]
struct Coeffs {
    a: f64,
    b: f64,
    c: f64,
    da: f64,
    db: f64,
    dc: f64,
}

impl Coeffs {
    fn new(theta: f64) -> Self {
        let t2 = theta * theta;
        let (a, b) = if theta < TINY_ANGLE {
            (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
        } else {
            let half = (0.5 * theta).sin();
            (theta.sin() / theta, 2.0 * half * half / t2)
        };
        if theta < SERIES_ANGLE {
            let t4 = t2 * t2;
            let t6 = t4 * t2;
            let t8 = t4 * t4;
            Self {
                a,
                b,
                c: 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t6 / 362_880.0 + t8 / 39_916_800.0,
                da: -1.0 / 3.0 + t2 / 30.0 - t4 / 840.0 + t6 / 45_360.0 - t8 / 3_991_680.0,
                db: -1.0 / 12.0 + t2 / 180.0 - t4 / 6720.0 + t6 / 453_600.0
                    - t8 / 47_900_160.0,
                dc: -1.0 / 60.0 + t2 / 1260.0 - t4 / 60_480.0 + t6 / 4_989_600.0
                    - t8 / 622_702_080.0,
            }
        } else {
            let (s, co) = theta.sin_cos();
            let half = (0.5 * theta).sin();
            let one_minus_cos = 2.0 * half * half;
            let t3 = t2 * theta;
            let t4 = t2 * t2;
            let t5 = t4 * theta;
            Self {
                a,
                b,
                c: (theta - s) / t3,
                da: (theta * co - s) / t3,
                db: (theta * s - 2.0 * one_minus_cos) / t4,
                dc: one_minus_cos / t4 - 3.0 * (theta - s) / t5,
            }
        }
    }
}

fn left_jacobian(w: &Matrix3<f64>, w2: &Matrix3<f64>, k: &Coeffs) -> Matrix3<f64> {
    if cfg!(feature = "decoupled-pose") {
        Matrix3::identity()
    } else {
        Matrix3::identity() + w * k.b + w2 * k.c
    }
}

/// SE(3) exponential of a pose vector.
pub fn se3_exp(delta: &Pose6) -> Transform {
    let w = hat(delta.rot());
    let w2 = w * w;
    let k = Coeffs::new(delta.rot().norm());
    let r = Matrix3::identity() + w * k.a + w2 * k.b;
    let v = left_jacobian(&w, &w2, &k);
    Transform {
        m: assemble(&r, &(v * delta.trans())),
    }
}

/// The transform together with its derivatives with respect to the six pose
/// components.
#[derive(Debug, Clone)]
pub struct ExpJacobians {
    pub transform: Transform,
    /// `∂R/∂rot_i`.
    pub d_rotation: [Matrix3<f64>; 3],
    /// `∂(V t)/∂rot_i`.
    pub d_translation_rot: [Vector3<f64>; 3],
    /// `∂(V t)/∂t`, i.e. `V`.
    pub d_translation_trans: Matrix3<f64>,
}

pub fn se3_exp_jacobians(delta: &Pose6) -> ExpJacobians {
    let omega = *delta.rot();
    let t = *delta.trans();
    let w = hat(&omega);
    let w2 = w * w;
    let k = Coeffs::new(omega.norm());
    let r = Matrix3::identity() + w * k.a + w2 * k.b;
    let v = left_jacobian(&w, &w2, &k);

    let mut d_rotation = [Matrix3::zeros(); 3];
    let mut d_translation_rot = [Vector3::zeros(); 3];
    for i in 0..3 {
        let e = hat(&Vector3::ith(i, 1.0));
        let sym = e * w + w * e;
        let wi = omega[i];
        d_rotation[i] = w * (k.da * wi) + e * k.a + w2 * (k.db * wi) + sym * k.b;
        if !cfg!(feature = "decoupled-pose") {
            let dv = w * (k.db * wi) + e * k.b + w2 * (k.dc * wi) + sym * k.c;
            d_translation_rot[i] = dv * t;
        }
    }
    ExpJacobians {
        transform: Transform {
            m: assemble(&r, &(v * t)),
        },
        d_rotation,
        d_translation_rot,
        d_translation_trans: v,
    }
}

pub fn se3_inverse(t: &Transform) -> Result<Transform> {
    check_matrix(&t.m)?;
    Ok(t.inverse())
}

pub fn se3_compose(a: &Transform, b: &Transform) -> Result<Transform> {
    check_matrix(&a.m)?;
    check_matrix(&b.m)?;
    Ok(a.compose(b))
}

fn so3_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let s = vee_antisym(r);
    let sin = s.norm();
    let theta = sin.atan2(cos);
    if theta < TINY_ANGLE {
        s * (1.0 + theta * theta / 6.0)
    } else if cos > -0.5 {
        s * (theta / sin)
    } else {
        // Near π the antisymmetric part vanishes; recover the axis from the
        // symmetric part and take its sign from the antisymmetric one.
        let one_minus_cos = 1.0 - cos;
        let b = (r + r.transpose()) * 0.5 - Matrix3::identity() * cos;
        let i = (0..3)
            .max_by(|&x, &y| b[(x, x)].total_cmp(&b[(y, y)]))
            .unwrap_or(0);
        let ai = (b[(i, i)] / one_minus_cos).max(0.0).sqrt();
        let mut axis = Vector3::zeros();
        for j in 0..3 {
            axis[j] = if j == i {
                ai
            } else {
                b[(i, j)] / (one_minus_cos * ai)
            };
        }
        axis.normalize_mut();
        if axis.dot(&s) < 0.0 {
            axis.neg_mut();
        }
        axis * theta
    }
}

/// SE(3) logarithm. Fails only when the rotation angle is too close to π for
/// the result to satisfy the [`Pose6`] range.
pub fn se3_log(t: &Transform) -> Result<Pose6> {
    let r = t.rotation();
    let omega = so3_log(&r);
    let w = hat(&omega);
    let w2 = w * w;
    let k = Coeffs::new(omega.norm());
    let v = left_jacobian(&w, &w2, &k);
    let trans = v
        .lu()
        .solve(&t.translation())
        .ok_or_else(|| Error::InvalidTransform("singular left Jacobian".into()))?;
    Pose6::from_vectors(omega, trans)
}
