//! Procedural stand-in for a mapped route: a closed loop through a textured
//! world of ground plane, roadside boxes, a distant skyline and a cloud
//! layer, ray-cast per pixel into intensity images and exact depth maps.
//!
//! World frame is z-up. Camera frames are x-right, y-down, z-forward, and a
//! frame's pose maps camera coordinates to world coordinates.

use nalgebra::{Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::records::{FrameRecord, LapSequence};
use crate::error::{Error, Result};
use crate::geom3d::{CameraIntrinsics, DepthMap, Transform};
use crate::image::GrayImage;

const ARC_SAMPLES: usize = 8192;
const CLOUD_HEIGHT: f64 = 150.0;
const CULL_RADIUS: f64 = 80.0;

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub seed: u64,
    /// Length of the reference loop in meters.
    pub lap_length: f64,
    pub width: usize,
    pub height: usize,
    pub intrinsics: CameraIntrinsics,
    pub camera_height: f64,
    /// Depths beyond this are reported as invalid, like a stereo matcher
    /// running out of disparity.
    pub max_depth: f64,
    /// Relative radius modulation of the loop.
    pub shape_amplitude: f64,
}

impl WorldConfig {
    pub fn new(seed: u64, lap_length: f64, intrinsics: CameraIntrinsics) -> Self {
        Self {
            seed,
            lap_length,
            width: (2.0 * (intrinsics.cx + 0.5)).round().max(1.0) as usize,
            height: (2.0 * (intrinsics.cy + 0.5)).round().max(1.0) as usize,
            intrinsics,
            camera_height: 1.5,
            max_depth: 60.0,
            shape_amplitude: 0.12,
        }
    }

    /// 160×120 camera with a 67° horizontal field of view.
    pub fn desk_default(seed: u64, lap_length: f64) -> Self {
        let k = CameraIntrinsics::new(120.0, 120.0, 79.5, 59.5).expect("valid intrinsics");
        Self::new(seed, lap_length, k)
    }
}

/// One lap driven through the world.
#[derive(Debug, Clone, PartialEq)]
pub struct LapSpec {
    pub name: String,
    pub n_frames: usize,
    /// Sideways displacement from the reference loop, positive to the right.
    pub lateral_offset: f64,
    /// Arc position of the first frame.
    pub start_arc: f64,
    pub start_time: f64,
    pub frame_interval: f64,
}

impl LapSpec {
    pub fn new(name: impl Into<String>, n_frames: usize) -> Self {
        Self {
            name: name.into(),
            n_frames,
            lateral_offset: 0.0,
            start_arc: 0.0,
            start_time: 0.0,
            frame_interval: 0.1,
        }
    }

    pub fn with_offset(mut self, lateral_offset: f64) -> Self {
        self.lateral_offset = lateral_offset;
        self
    }
}

#[derive(Debug, Clone)]
pub struct SynthLap {
    pub sequence: LapSequence,
    pub images: Vec<GrayImage>,
    pub depths: Vec<DepthMap>,
}

/// An oriented box standing on the ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldBox {
    pub center: Vector2<f64>,
    pub yaw: f64,
    pub half_length: f64,
    pub half_width: f64,
    pub height: f64,
    brightness: f64,
    seed: u32,
}

impl WorldBox {
    fn to_local(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let (s, c) = self.yaw.sin_cos();
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        Vector3::new(c * dx + s * dy, -s * dx + c * dy, p.z)
    }

    fn dir_to_local(&self, d: &Vector3<f64>) -> Vector3<f64> {
        let (s, c) = self.yaw.sin_cos();
        Vector3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    /// True if `p` lies on the box surface within `tol`.
    pub fn on_surface(&self, p: &Vector3<f64>, tol: f64) -> bool {
        let l = self.to_local(p);
        let inside = l.x.abs() <= self.half_length + tol
            && l.y.abs() <= self.half_width + tol
            && l.z >= -tol
            && l.z <= self.height + tol;
        let on_face = (l.x.abs() - self.half_length).abs() <= tol
            || (l.y.abs() - self.half_width).abs() <= tol
            || (l.z - self.height).abs() <= tol;
        inside && on_face
    }
}

#[derive(Debug, Clone)]
struct Route {
    base_radius: f64,
    amplitude: f64,
    /// Cumulative arc length at uniformly spaced angles, last entry = length.
    arc: Vec<f64>,
}

impl Route {
    fn new(length: f64, amplitude: f64) -> Self {
        let unit = Self::arc_table(1.0, amplitude);
        let base_radius = length / unit[ARC_SAMPLES];
        let arc = unit.iter().map(|a| a * base_radius).collect();
        Self {
            base_radius,
            amplitude,
            arc,
        }
    }

    fn arc_table(r0: f64, amplitude: f64) -> Vec<f64> {
        let speed = |phi: f64| {
            let r = r0 * (1.0 + amplitude * (2.0 * phi).sin());
            let dr = 2.0 * r0 * amplitude * (2.0 * phi).cos();
            (r * r + dr * dr).sqrt()
        };
        let h = std::f64::consts::TAU / ARC_SAMPLES as f64;
        let mut table = Vec::with_capacity(ARC_SAMPLES + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for k in 0..ARC_SAMPLES {
            let a = k as f64 * h;
            // Simpson on each cell
            acc += h / 6.0 * (speed(a) + 4.0 * speed(a + 0.5 * h) + speed(a + h));
            table.push(acc);
        }
        table
    }

    fn length(&self) -> f64 {
        self.arc[ARC_SAMPLES]
    }

    fn angle_at(&self, s: f64) -> f64 {
        let s = s.rem_euclid(self.length());
        let k = self.arc.partition_point(|&a| a <= s).clamp(1, ARC_SAMPLES);
        let (a0, a1) = (self.arc[k - 1], self.arc[k]);
        let frac = if a1 > a0 { (s - a0) / (a1 - a0) } else { 0.0 };
        (k as f64 - 1.0 + frac) * std::f64::consts::TAU / ARC_SAMPLES as f64
    }

    fn point(&self, phi: f64) -> Vector2<f64> {
        let r = self.base_radius * (1.0 + self.amplitude * (2.0 * phi).sin());
        Vector2::new(r * phi.cos(), r * phi.sin())
    }

    fn tangent(&self, phi: f64) -> Vector2<f64> {
        let r = self.base_radius * (1.0 + self.amplitude * (2.0 * phi).sin());
        let dr = 2.0 * self.base_radius * self.amplitude * (2.0 * phi).cos();
        let (s, c) = phi.sin_cos();
        Vector2::new(dr * c - r * s, dr * s + r * c).normalize()
    }

    fn max_radius(&self) -> f64 {
        self.base_radius * (1.0 + self.amplitude.abs())
    }
}

pub struct SynthWorld {
    cfg: WorldConfig,
    route: Route,
    boxes: Vec<WorldBox>,
    sky_radius: f64,
    seed: u32,
}

#[derive(Debug, Clone, Copy)]
enum Surface {
    Ground,
    Box(usize, Vector3<f64>),
    Skyline,
    Cloud,
}

impl SynthWorld {
    pub fn new(cfg: WorldConfig) -> Result<Self> {
        if !(cfg.lap_length.is_finite() && cfg.lap_length > 20.0) {
            return Err(Error::InvalidConfig(format!(
                "lap length must exceed 20 m, got {}",
                cfg.lap_length
            )));
        }
        if cfg.width == 0 || cfg.height == 0 {
            return Err(Error::InvalidConfig("image must be non-empty".into()));
        }
        if !(cfg.shape_amplitude.abs() < 0.3) {
            return Err(Error::InvalidConfig("shape amplitude must be below 0.3".into()));
        }
        let route = Route::new(cfg.lap_length, cfg.shape_amplitude);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let seed: u32 = rng.gen();
        let mut boxes = Vec::new();
        let mut s = 2.0;
        while s < route.length() {
            let phi = route.angle_at(s);
            let c = route.point(phi);
            let t = route.tangent(phi);
            let right = Vector2::new(t.y, -t.x);
            let heading = t.y.atan2(t.x);
            for side in [1.0, -1.0] {
                if rng.gen_bool(0.85) {
                    let half_width = rng.gen_range(1.5..4.0);
                    let edge = rng.gen_range(5.5..9.0);
                    boxes.push(WorldBox {
                        center: c + right * (side * (edge + half_width)),
                        yaw: heading + rng.gen_range(-0.15..0.15),
                        half_length: rng.gen_range(1.5..4.0),
                        half_width,
                        height: rng.gen_range(3.0..14.0),
                        brightness: rng.gen_range(70.0..200.0),
                        seed: rng.gen(),
                    });
                }
            }
            s += rng.gen_range(4.0..9.0);
        }
        let sky_radius = route.max_radius() + 45.0;
        Ok(Self {
            cfg,
            route,
            boxes,
            sky_radius,
            seed,
        })
    }

    pub fn config(&self) -> &WorldConfig {
        &self.cfg
    }

    pub fn boxes(&self) -> &[WorldBox] {
        &self.boxes
    }

    pub fn sky_radius(&self) -> f64 {
        self.sky_radius
    }

    pub fn cloud_height(&self) -> f64 {
        CLOUD_HEIGHT
    }

    pub fn route_length(&self) -> f64 {
        self.route.length()
    }

    /// Height of the skyline wall at a world point's azimuth.
    pub fn skyline_height(&self, p: &Vector3<f64>) -> f64 {
        let phi = p.y.atan2(p.x);
        let a = phi.rem_euclid(std::f64::consts::TAU) * 6.0;
        12.0 + 25.0 * fbm1(self.seed ^ 0x5151, a)
    }

    /// Camera pose at arc position `s` of the reference loop, displaced
    /// sideways by `lateral` meters.
    pub fn camera_pose(&self, s: f64, lateral: f64) -> Transform {
        let phi = self.route.angle_at(s);
        let c = self.route.point(phi);
        let t = self.route.tangent(phi);
        let forward = Vector3::new(t.x, t.y, 0.0);
        let right = Vector3::new(t.y, -t.x, 0.0);
        let down = Vector3::new(0.0, 0.0, -1.0);
        let rot = Matrix3::from_columns(&[right, down, forward]);
        let pos = Vector3::new(c.x, c.y, 0.0) + right * lateral
            + Vector3::new(0.0, 0.0, self.cfg.camera_height);
        Transform::from_parts(rot, pos).expect("orthonormal camera frame")
    }

    fn hit(&self, origin: &Vector3<f64>, dir: &Vector3<f64>, candidates: &[usize]) -> (f64, Surface) {
        let mut best = (f64::INFINITY, Surface::Cloud);
        if dir.z < 0.0 {
            best = (-origin.z / dir.z, Surface::Ground);
        }
        for &bi in candidates {
            let b = &self.boxes[bi];
            let o = b.to_local(origin);
            let d = b.dir_to_local(dir);
            let (mut t0, mut t1) = (0.0f64, best.0);
            let mut normal = Vector3::zeros();
            let mut ok = true;
            for (axis, lo, hi) in [
                (0, -b.half_length, b.half_length),
                (1, -b.half_width, b.half_width),
                (2, 0.0, b.height),
            ] {
                if d[axis].abs() < 1e-15 {
                    if o[axis] < lo || o[axis] > hi {
                        ok = false;
                        break;
                    }
                    continue;
                }
                let inv = 1.0 / d[axis];
                let (mut a, mut c) = ((lo - o[axis]) * inv, (hi - o[axis]) * inv);
                if a > c {
                    std::mem::swap(&mut a, &mut c);
                }
                if a > t0 {
                    t0 = a;
                    normal = Vector3::zeros();
                    // entering face faces against the ray
                    normal[axis] = -inv.signum();
                }
                t1 = t1.min(c);
                if t0 > t1 {
                    ok = false;
                    break;
                }
            }
            if ok && t0 > 1e-9 && t0 < best.0 {
                best = (t0, Surface::Box(bi, normal));
            }
        }
        // Skyline wall: inside a vertical cylinder, take the forward root.
        let a = dir.x * dir.x + dir.y * dir.y;
        if a > 1e-15 {
            let b = origin.x * dir.x + origin.y * dir.y;
            let c = origin.x * origin.x + origin.y * origin.y - self.sky_radius * self.sky_radius;
            let disc = b * b - a * c;
            if disc >= 0.0 {
                let t = (-b + disc.sqrt()) / a;
                if t > 0.0 && t < best.0 {
                    let p = origin + dir * t;
                    if p.z >= 0.0 && p.z <= self.skyline_height(&p) {
                        best = (t, Surface::Skyline);
                    }
                }
            }
        }
        if best.0.is_infinite() || matches!(best.1, Surface::Cloud) {
            if dir.z > 0.0 {
                best = ((CLOUD_HEIGHT - origin.z) / dir.z, Surface::Cloud);
            } else {
                // Only reachable for exactly horizontal rays past the skyline.
                best = (1e6, Surface::Cloud);
            }
        }
        best
    }

    fn shade(&self, p: &Vector3<f64>, dir: &Vector3<f64>, t: f64, surface: Surface) -> f64 {
        let dn = dir.norm();
        let pixel = t * dn / self.cfg.intrinsics.fx;
        let incidence = |n: &Vector3<f64>| (n.dot(dir) / dn).abs().max(0.1);
        match surface {
            Surface::Ground => {
                let f = pixel / incidence(&Vector3::z());
                105.0 + 150.0 * fbm2(self.seed ^ 0x9e37, p.x, p.y, 1.2, 5, f)
            }
            Surface::Box(i, local_normal) => {
                let b = &self.boxes[i];
                let l = b.to_local(p);
                let (u, v) = if local_normal.x != 0.0 {
                    (l.y + 10.0 * local_normal.x, l.z)
                } else if local_normal.y != 0.0 {
                    (l.x + 20.0 * local_normal.y, l.z)
                } else {
                    (l.x, l.y + 40.0)
                };
                let (s, c) = b.yaw.sin_cos();
                let world_n = Vector3::new(
                    c * local_normal.x - s * local_normal.y,
                    s * local_normal.x + c * local_normal.y,
                    local_normal.z,
                );
                let sun = Vector3::new(0.4, 0.3, 0.87).normalize();
                let light = 0.65 + 0.35 * world_n.dot(&sun).max(0.0);
                let f = pixel / incidence(&world_n);
                b.brightness * light + 130.0 * fbm2(b.seed, u, v, 0.9, 4, f)
            }
            Surface::Skyline => {
                let phi = p.y.atan2(p.x);
                let f = pixel / incidence(&Vector3::new(p.x, p.y, 0.0).normalize());
                90.0 + 120.0 * fbm2(self.seed ^ 0x3c6e, phi * self.sky_radius, p.z, 0.15, 4, f)
            }
            Surface::Cloud => {
                let f = pixel / incidence(&Vector3::z());
                205.0 + 90.0 * fbm2(self.seed ^ 0x7f4a, p.x, p.y, 0.02, 4, f)
            }
        }
    }

    fn visible_boxes(&self, pose: &Transform) -> Vec<usize> {
        let pos = pose.translation();
        let fwd = pose.rotation().column(2).into_owned();
        self.boxes
            .iter()
            .enumerate()
            .filter(|(_, b)| {
                let d = Vector3::new(b.center.x - pos.x, b.center.y - pos.y, 0.0);
                let reach = b.half_length.hypot(b.half_width);
                d.norm() < CULL_RADIUS + reach && d.dot(&fwd) > -reach
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// World-space direction through pixel `(u, v)`, scaled so its
    /// camera-frame z component is 1.
    pub fn pixel_ray(&self, pose: &Transform, u: usize, v: usize) -> Vector3<f64> {
        let k = &self.cfg.intrinsics;
        let cam = Vector3::new((u as f64 - k.cx) / k.fx, (v as f64 - k.cy) / k.fy, 1.0);
        pose.rotation() * cam
    }

    /// Renders the intensity image and the depth map seen from `pose`.
    pub fn render(&self, pose: &Transform) -> (GrayImage, DepthMap) {
        let (w, h) = (self.cfg.width, self.cfg.height);
        let origin = pose.translation();
        let candidates = self.visible_boxes(pose);
        let mut pixels = Vec::with_capacity(w * h);
        let mut depth = Vec::with_capacity(w * h);
        for v in 0..h {
            for u in 0..w {
                let dir = self.pixel_ray(pose, u, v);
                let (t, surface) = self.hit(&origin, &dir, &candidates);
                let p = origin + dir * t;
                let value = self.shade(&p, &dir, t, surface);
                pixels.push(value.round().clamp(0.0, 255.0) as u8);
                depth.push(if t <= self.cfg.max_depth { t } else { 0.0 });
            }
        }
        (
            GrayImage::new(w, h, pixels).expect("sized buffer"),
            DepthMap::new(w, h, depth).expect("sized buffer"),
        )
    }

    pub fn render_lap(&self, spec: &LapSpec) -> Result<SynthLap> {
        if spec.n_frames < 2 {
            return Err(Error::InvalidConfig("a lap needs at least two frames".into()));
        }
        let step = self.route.length() / spec.n_frames as f64;
        let mut frames = Vec::with_capacity(spec.n_frames);
        let mut images = Vec::with_capacity(spec.n_frames);
        let mut depths = Vec::with_capacity(spec.n_frames);
        for i in 0..spec.n_frames {
            let pose = self.camera_pose(spec.start_arc + i as f64 * step, spec.lateral_offset);
            let (img, depth) = self.render(&pose);
            frames.push(FrameRecord {
                timestamp: spec.start_time + i as f64 * spec.frame_interval,
                image_key: format!("{}/img_{i:05}.pgm", spec.name),
                depth_key: Some(format!("{}/depth_{i:05}.pfm", spec.name)),
                pose,
            });
            images.push(img);
            depths.push(depth);
        }
        Ok(SynthLap {
            sequence: LapSequence::new(spec.name.clone(), frames)?,
            images,
            depths,
        })
    }
}

/// A lap of `n_frames` evenly spaced frames around a `lap_length` loop,
/// rendered with the given intrinsics (image size from the principal point).
pub fn synth_world(
    seed: u64,
    n_frames: usize,
    lap_length: f64,
    intrinsics: CameraIntrinsics,
) -> Result<SynthLap> {
    let world = SynthWorld::new(WorldConfig::new(seed, lap_length, intrinsics))?;
    world.render_lap(&LapSpec::new("synth", n_frames))
}

#[inline]
fn hash(seed: u32, x: i64, y: i64) -> f64 {
    let mut h = seed as u64 ^ (x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    h ^= (y as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    h ^= h >> 31;
    h = h.wrapping_mul(0x94D0_49BB_1331_11EB);
    h ^= h >> 29;
    (h >> 11) as f64 / (1u64 << 53) as f64
}

#[inline]
fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn value_noise(seed: u32, x: f64, y: f64) -> f64 {
    let (fx, fy) = (x.floor(), y.floor());
    let (ix, iy) = (fx as i64, fy as i64);
    let (tx, ty) = (smooth(x - fx), smooth(y - fy));
    let a = hash(seed, ix, iy);
    let b = hash(seed, ix + 1, iy);
    let c = hash(seed, ix, iy + 1);
    let d = hash(seed, ix + 1, iy + 1);
    let top = a + (b - a) * tx;
    let bot = c + (d - c) * tx;
    top + (bot - top) * ty
}

/// Band-limited fractal noise in roughly [-0.5, 0.5]; octaves whose
/// wavelength falls below the pixel footprint are faded out.
fn fbm2(seed: u32, x: f64, y: f64, base_freq: f64, octaves: u32, footprint: f64) -> f64 {
    let mut sum = 0.0;
    let mut amp = 0.5;
    let mut freq = base_freq;
    for o in 0..octaves {
        let wavelength = 1.0 / freq;
        let weight = (wavelength / (2.0 * footprint) - 0.5).clamp(0.0, 1.0);
        if weight == 0.0 {
            break;
        }
        let s = seed.wrapping_add(o.wrapping_mul(0x68E3_1DA4));
        sum += amp * weight * (value_noise(s, x * freq, y * freq) - 0.5);
        amp *= 0.5;
        freq *= 2.0;
    }
    sum
}

fn fbm1(seed: u32, x: f64) -> f64 {
    0.5 + fbm2(seed, x, 0.0, 1.0, 3, 0.0)
}
