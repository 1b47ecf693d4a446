use crate::error::{Error, Result};
use crate::geom3d::{Pose6, Transform};

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub timestamp: f64,
    pub image_key: String,
    pub depth_key: Option<String>,
    /// Camera-to-world transform.
    pub pose: Transform,
}

impl FrameRecord {
    pub fn position(&self) -> nalgebra::Vector3<f64> {
        self.pose.translation()
    }

    pub fn distance_to(&self, other: &FrameRecord) -> f64 {
        (self.position() - other.position()).norm()
    }
}

/// A timestamp-ordered, non-empty run of frames.
#[derive(Debug, Clone, PartialEq)]
pub struct LapSequence {
    name: String,
    frames: Vec<FrameRecord>,
}

impl LapSequence {
    pub fn new(name: impl Into<String>, frames: Vec<FrameRecord>) -> Result<Self> {
        let name = name.into();
        if frames.is_empty() {
            return Err(Error::EmptySequence(name));
        }
        if let Some(w) = frames.windows(2).find(|w| w[1].timestamp <= w[0].timestamp) {
            return Err(Error::format(
                "lap sequence",
                format!(
                    "{name}: timestamps not strictly increasing ({} then {})",
                    w[0].timestamp, w[1].timestamp
                ),
            ));
        }
        Ok(Self { name, frames })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn frames(&self) -> &[FrameRecord] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            frames: self.frames.clone(),
        }
    }
}

/// A keyframe/live-frame pair with the live camera's pose expressed in the
/// keyframe's camera frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    pub key: FrameRecord,
    pub live: FrameRecord,
    pub key_index: usize,
    pub live_index: usize,
    pub delta_gt: Pose6,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(t: f64) -> FrameRecord {
        FrameRecord {
            timestamp: t,
            image_key: format!("{t}"),
            depth_key: None,
            pose: Transform::identity(),
        }
    }

    #[test]
    fn sequences_must_be_ordered_and_non_empty() {
        assert!(matches!(LapSequence::new("a", vec![]), Err(Error::EmptySequence(_))));
        assert!(LapSequence::new("a", vec![frame(1.0), frame(1.0)]).is_err());
        assert!(LapSequence::new("a", vec![frame(1.0), frame(2.0)]).is_ok());
    }
}
