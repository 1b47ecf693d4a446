use std::fmt;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Largest accepted rotation-vector norm.
pub const ROTATION_LIMIT: f64 = std::f64::consts::PI + 1e-6;

/// A 6-DoF pose vector: rotation vector (radians) followed by translation (meters).
#[derive(Clone, Copy, PartialEq)]
pub struct Pose6 {
    rot: Vector3<f64>,
    trans: Vector3<f64>,
}

impl Pose6 {
    pub fn new(rot: [f64; 3], trans: [f64; 3]) -> Result<Self> {
        Self::from_vectors(Vector3::from(rot), Vector3::from(trans))
    }

    pub fn from_vectors(rot: Vector3<f64>, trans: Vector3<f64>) -> Result<Self> {
        if !rot.iter().chain(trans.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("pose vector"));
        }
        let angle = rot.norm();
        if angle >= ROTATION_LIMIT {
            return Err(Error::OutOfRange(format!(
                "rotation vector norm {angle} exceeds pi"
            )));
        }
        Ok(Self { rot, trans })
    }

    /// Builds a pose from `[rx, ry, rz, tx, ty, tz]`.
    pub fn from_array(v: [f64; 6]) -> Result<Self> {
        Self::new([v[0], v[1], v[2]], [v[3], v[4], v[5]])
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        let arr: [f64; 6] = v
            .try_into()
            .map_err(|_| Error::dims("6 pose components", v.len()))?;
        Self::from_array(arr)
    }

    pub fn zero() -> Self {
        Self {
            rot: Vector3::zeros(),
            trans: Vector3::zeros(),
        }
    }

    pub fn translation_only(t: [f64; 3]) -> Result<Self> {
        Self::new([0.0; 3], t)
    }

    pub fn rot(&self) -> &Vector3<f64> {
        &self.rot
    }

    pub fn trans(&self) -> &Vector3<f64> {
        &self.trans
    }

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

impl fmt::Debug for Pose6 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Pose6(rot=[{:.6}, {:.6}, {:.6}], trans=[{:.6}, {:.6}, {:.6}])",
            self.rot.x, self.rot.y, self.rot.z, self.trans.x, self.trans.y, self.trans.z
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_components() {
        assert!(matches!(
            Pose6::new([0.0, f64::NAN, 0.0], [0.0; 3]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            Pose6::new([0.0; 3], [f64::INFINITY, 0.0, 0.0]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn rejects_rotation_beyond_pi() {
        assert!(Pose6::new([0.0, 0.0, std::f64::consts::PI], [0.0; 3]).is_ok());
        assert!(matches!(
            Pose6::new([0.0, 0.0, 3.2], [0.0; 3]),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn array_layout_is_rotation_first() {
        let p = Pose6::from_array([1.0, 0.0, 0.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(p.rot().x, 1.0);
        assert_eq!(p.trans().z, 6.0);
        assert_eq!(p.to_array(), [1.0, 0.0, 0.0, 4.0, 5.0, 6.0]);
    }
}
