//! Visual global localization from single camera images.
//!
//! A VG-RAM weightless neural network recalls the closest mapped keyframe for
//! a live image ([`wnn`]); a small Siamese fully-convolutional network
//! regresses the 6-DoF relative pose between the keyframe and the live frame
//! ([`net`]), trained under a 3D projection loss ([`geom3d`]). Composing the
//! recalled keyframe pose with the regressed relative pose yields the live
//! global pose ([`globaloc`]).

pub mod error;
pub mod geom3d;
pub mod numeric;

pub use error::{Error, Result};
pub mod image;
pub mod wnn;

mod binio;
mod csvio;
pub mod data;
pub mod globaloc;
pub mod net;
pub mod eval;
