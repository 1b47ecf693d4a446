//! Rigid-body geometry: SE(3) exponential/logarithm, depth back-projection and
//! the 3D projection loss used to supervise relative pose regression.

mod camera;
mod loss;
pub mod io;
mod pose;
mod se3;

pub use camera::{backproject, project, transform_points, CameraIntrinsics, DepthMap, PointGrid};
pub use loss::{
    loss_and_subgradient, projection_loss, projection_loss_grad, LossPoints, PoseGradient,
};
pub use pose::{Pose6, ROTATION_LIMIT};
pub use se3::{
    hat, se3_compose, se3_exp, se3_exp_jacobians, se3_inverse, se3_log, ExpJacobians, Transform,
};
