//! Composition of place recognition and relative pose regression into a live
//! global pose.
//!
//! Convention: the pose vector δ between a keyframe with global pose `G_K`
//! and a live frame with global pose `G_L` is `log(G_K⁻¹ · G_L)`, so the live
//! pose is recovered as `G_L = G_K · exp(δ)`.

use std::path::Path;

use crate::csvio;
use crate::error::{Error, Result};
use crate::geom3d::{se3_exp, se3_log, Pose6, Transform};
use crate::image::GrayImage;
use crate::net::{output_pose, Network, Tensor4};
use crate::numeric::fmt_f64;
use crate::wnn::{HammingIndex, WnnModel};

pub const FIX_LOG_HEADER: &str = "live_key,place_id,vote,dx,dy,dz,drx,dry,drz,gx,gy,gz";

/// Rotation angles at or beyond this are rejected by [`relative_pose`].
pub const RELATIVE_ANGLE_LIMIT: f64 = std::f64::consts::PI - 1e-6;

/// Pose vector `δ` with `exp(δ) = key_pose⁻¹ · live_pose`.
pub fn relative_pose(key_pose: &Transform, live_pose: &Transform) -> Result<Pose6> {
    let rel = key_pose.inverse().compose(live_pose);
    let angle = rel.rotation_angle();
    if angle >= RELATIVE_ANGLE_LIMIT {
        return Err(Error::OutOfRange(format!(
            "relative rotation angle {angle} too close to pi"
        )));
    }
    se3_log(&rel)
}


/// One localization result.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalFix {
    pub live_key: String,
    pub place_id: u32,
    pub key_pose: Transform,
    pub delta: Pose6,
    pub live_pose: Transform,
    pub vote_fraction: f64,
}

impl GlobalFix {
    /// Builds a fix, computing `G_L = G_K · exp(δ)`.
    pub fn new(
        live_key: impl Into<String>,
        place_id: u32,
        key_pose: Transform,
        delta: Pose6,
        vote_fraction: f64,
    ) -> Self {
        Self {
            live_key: live_key.into(),
            place_id,
            key_pose,
            delta,
            live_pose: key_pose.compose(&se3_exp(&delta)),
            vote_fraction,
        }
    }
}

/// Trained place memory and pose regressor, plus the keyframe images the
/// regressor compares against. Read-only once built.
pub struct Localizer {
    wnn: WnnModel,
    index: Option<HammingIndex>,
    net: Network,
    key_inputs: Vec<Vec<f32>>,
}

impl Localizer {
    /// `key_images[i]` is the raw image of place `i`.
    pub fn new(wnn: WnnModel, net: Network, key_images: &[GrayImage]) -> Result<Self> {
        if wnn.places().is_empty() {
            return Err(Error::EmptyMemory);
        }
        if key_images.len() != wnn.places().len() {
            return Err(Error::dims(
                format!("{} keyframe images", wnn.places().len()),
                key_images.len(),
            ));
        }
        let (w, h) = (net.config().input_w, net.config().input_h);
        let key_inputs = key_images.iter().map(|img| img.resize_normalized(w, h)).collect();
        Ok(Self {
            wnn,
            index: None,
            net,
            key_inputs,
        })
    }

    /// Uses a Hamming index for recall instead of the linear scan.
    pub fn with_index(mut self, index: HammingIndex) -> Self {
        self.index = Some(index);
        self
    }

    pub fn wnn(&self) -> &WnnModel {
        &self.wnn
    }

    pub fn net(&self) -> &Network {
        &self.net
    }

    /// Recalls the keyframe, regresses the relative pose between it and the
    /// live image, and composes the live global pose.
    pub fn localize(&self, live: &GrayImage, live_key: &str) -> Result<GlobalFix> {
        let recall = match &self.index {
            Some(idx) => idx.committee_recall(&self.wnn, live)?,
            None => self.wnn.committee_recall(live)?,
        };
        let place = self
            .wnn
            .place(recall.place_id)
            .ok_or_else(|| Error::OutOfRange(format!("place id {}", recall.place_id)))?;
        let cfg = self.net.config();
        let (c, h, w) = (cfg.input_channels, cfg.input_h, cfg.input_w);
        let live_input = live.resize_normalized(w, h);
        let key = Tensor4::stack(&[&self.key_inputs[recall.place_id as usize]], c, h, w)?;
        let live_t = Tensor4::stack(&[&live_input], c, h, w)?;
        let delta = output_pose(&self.net.predict(&key, &live_t)?, 0)?;
        Ok(GlobalFix::new(
            live_key,
            recall.place_id,
            place.pose,
            delta,
            recall.vote_fraction,
        ))
    }
}

/// Parsed fix-log row; the log keeps the live position, not the full pose.
#[derive(Debug, Clone, PartialEq)]
pub struct FixLogRow {
    pub live_key: String,
    pub place_id: u32,
    pub vote_fraction: f64,
    pub delta: Pose6,
    pub position: [f64; 3],
}

impl From<&GlobalFix> for FixLogRow {
    fn from(f: &GlobalFix) -> Self {
        let p = f.live_pose.translation();
        Self {
            live_key: f.live_key.clone(),
            place_id: f.place_id,
            vote_fraction: f.vote_fraction,
            delta: f.delta,
            position: [p.x, p.y, p.z],
        }
    }
}

pub fn fix_rows(fixes: &[GlobalFix]) -> Result<Vec<Vec<String>>> {
    fixes
        .iter()
        .map(|f| {
            csvio::check_field("fix log", &f.live_key)?;
            let r = FixLogRow::from(f);
            let [rx, ry, rz, tx, ty, tz] = r.delta.to_array();
            let mut row = vec![r.live_key, r.place_id.to_string(), fmt_f64(r.vote_fraction)];
            row.extend([tx, ty, tz, rx, ry, rz].into_iter().chain(r.position).map(fmt_f64));
            Ok(row)
        })
        .collect()
}

pub fn write_fix_log(path: &Path, fixes: &[GlobalFix]) -> Result<()> {
    csvio::write_table(path, FIX_LOG_HEADER, &fix_rows(fixes)?)
}

pub fn read_fix_log(path: &Path) -> Result<Vec<FixLogRow>> {
    const WHAT: &str = "fix log";
    csvio::read_table(WHAT, path, FIX_LOG_HEADER)?
        .iter()
        .map(|r| {
            let n: Vec<f64> = r[2..]
                .iter()
                .map(|s| csvio::parse_f64(WHAT, s))
                .collect::<Result<_>>()?;
            Ok(FixLogRow {
                live_key: r[0].clone(),
                place_id: r[1]
                    .parse()
                    .map_err(|_| Error::format(WHAT, format!("bad place id `{}`", r[1])))?,
                vote_fraction: n[0],
                delta: Pose6::from_array([n[4], n[5], n[6], n[1], n[2], n[3]])?,
                position: [n[7], n[8], n[9]],
            })
        })
        .collect()
}
