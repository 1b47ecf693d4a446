//! C ABI over the localization toolkit.
//!
//! Models are opaque handles created by `hl_*_load` and released by the
//! matching `hl_*_free`. Every fallible call returns an [`HlStatus`]; on
//! failure the message is kept per thread and can be read with
//! [`hl_last_error_message`]. Matrices are 4x4 row-major, pose vectors are
//! `[rx, ry, rz, tx, ty, tz]`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use hybridloc::geom3d::{projection_loss, se3_exp, CameraIntrinsics, DepthMap, Pose6};
use hybridloc::image::GrayImage;
use hybridloc::net::persist::load_network;
use hybridloc::net::{Network, Tensor4};
use hybridloc::wnn::persist::load_model;
use hybridloc::wnn::WnnModel;
use hybridloc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Format = 5,
    NonFinite = 6,
    DimensionMismatch = 7,
    EmptyMemory = 8,
    EmptyDepth = 9,
    Panic = 10,
    Other = 11,
}

/// Trained place-recognition memory.
pub struct HlWnn(WnnModel);

/// Relative pose network in inference mode.
pub struct HlNet(Network);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HlStatus {
    match e {
        Error::Config { .. } | Error::InvalidConfig(_) => HlStatus::Config,
        Error::Io { .. } => HlStatus::Io,
        Error::Format { .. } | Error::Image(_) => HlStatus::Format,
        Error::NonFinite(_) => HlStatus::NonFinite,
        Error::DimensionMismatch { .. } | Error::ShapeMismatch(_) | Error::LengthMismatch(..) => {
            HlStatus::DimensionMismatch
        }
        Error::EmptyMemory => HlStatus::EmptyMemory,
        Error::EmptyDepth => HlStatus::EmptyDepth,
        Error::OutOfRange(_) | Error::InvalidIntrinsics(_) | Error::InvalidTransform(_) => {
            HlStatus::InvalidArgument
        }
        _ => HlStatus::Other,
    }
}

enum Fail {
    Null,
    Arg(String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            HlStatus::Ok
        }
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument".into());
            HlStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            HlStatus::InvalidArgument
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            HlStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null)
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null)
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(Fail::Null);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Fail::Arg("path is not valid UTF-8".into()))
}

unsafe fn gray_arg(pixels: *const u8, width: usize, height: usize) -> Result<GrayImage, Fail> {
    if pixels.is_null() {
        return Err(Fail::Null);
    }
    let len = width
        .checked_mul(height)
        .ok_or_else(|| Fail::Arg("image size overflows".into()))?;
    let data = std::slice::from_raw_parts(pixels, len).to_vec();
    Ok(GrayImage::new(width, height, data)?)
}

unsafe fn pose_arg(p: *const f64) -> Result<Pose6, Fail> {
    let v = non_null(p as *const [f64; 6])?;
    Ok(Pose6::from_array(*v)?)
}

/// Message for the last failed call on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_wnn_load(path: *const c_char, out: *mut *mut HlWnn) -> HlStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let model = load_model(&path_arg(path)?)?;
        *out = Box::into_raw(Box::new(HlWnn(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`hl_wnn_load`] and not be freed twice. Null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn hl_wnn_free(model: *mut HlWnn) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of stored places; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_wnn_place_count(model: *const HlWnn) -> usize {
    model.as_ref().map_or(0, |m| m.0.places().len())
}

/// Recalls the place for a raw 8-bit image of the size the model was
/// trained on.
///
/// # Safety
/// `pixels` must hold `width * height` bytes; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hl_wnn_recall(
    model: *const HlWnn,
    pixels: *const u8,
    width: usize,
    height: usize,
    place_id: *mut u32,
    vote_fraction: *mut f64,
) -> HlStatus {
    guard(|| {
        let m = non_null(model)?;
        let (id, frac) = (out_ref(place_id)?, out_ref(vote_fraction)?);
        let r = m.0.committee_recall(&gray_arg(pixels, width, height)?)?;
        *id = r.place_id;
        *frac = r.vote_fraction;
        Ok(())
    })
}

/// Pose of a stored place as a row-major 4x4 matrix.
///
/// # Safety
/// `out` must point to 16 doubles.
#[no_mangle]
pub unsafe extern "C" fn hl_wnn_place_pose(model: *const HlWnn, place_id: u32, out: *mut f64) -> HlStatus {
    guard(|| {
        let m = non_null(model)?;
        let out = out_ref(out as *mut [f64; 16])?;
        let place = m
            .0
            .place(place_id)
            .ok_or_else(|| Fail::Arg(format!("no place {place_id}")))?;
        *out = place.pose.to_row_major();
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_net_load(path: *const c_char, out: *mut *mut HlNet) -> HlStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let net = load_network(&path_arg(path)?)?;
        *out = Box::into_raw(Box::new(HlNet(net)));
        Ok(())
    })
}

/// # Safety
/// `net` must come from [`hl_net_load`] and not be freed twice. Null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn hl_net_free(net: *mut HlNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Predicts the relative pose of `live` with respect to `key`. Both images
/// have the same size and are resampled to the network input.
///
/// # Safety
/// Both pixel buffers must hold `width * height` bytes; `out` must point to
/// 6 doubles.
#[no_mangle]
pub unsafe extern "C" fn hl_net_predict(
    net: *const HlNet,
    key: *const u8,
    live: *const u8,
    width: usize,
    height: usize,
    out: *mut f64,
) -> HlStatus {
    guard(|| {
        let n = &non_null(net)?.0;
        let out = out_ref(out as *mut [f64; 6])?;
        let c = n.config();
        let input = |img: GrayImage| -> Result<Tensor4, Error> {
            let v = img.resize_normalized(c.input_w, c.input_h);
            Tensor4::stack(&[v.as_slice()], c.input_channels, c.input_h, c.input_w)
        };
        let k = input(gray_arg(key, width, height)?)?;
        let l = input(gray_arg(live, width, height)?)?;
        let y = n.predict(&k, &l)?;
        *out = hybridloc::net::output_pose(&y, 0)?.to_array();
        Ok(())
    })
}

/// Exponential map of a 6-vector to a row-major 4x4 rigid transform.
///
/// # Safety
/// `delta` must point to 6 doubles and `out` to 16.
#[no_mangle]
pub unsafe extern "C" fn hl_se3_exp(delta: *const f64, out: *mut f64) -> HlStatus {
    guard(|| {
        let d = pose_arg(delta)?;
        *out_ref(out as *mut [f64; 16])? = se3_exp(&d).to_row_major();
        Ok(())
    })
}

/// Mean distance in meters between the scene points moved by the predicted
/// and by the true pose. Depth values that are zero or not finite are
/// skipped.
///
/// # Safety
/// `pred` and `truth` point to 6 doubles, `depth` to `width * height`
/// doubles, `out` to one double.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn hl_projection_loss(
    pred: *const f64,
    truth: *const f64,
    depth: *const f64,
    width: usize,
    height: usize,
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    out: *mut f64,
) -> HlStatus {
    guard(|| {
        let (p, t) = (pose_arg(pred)?, pose_arg(truth)?);
        if depth.is_null() {
            return Err(Fail::Null);
        }
        let len = width
            .checked_mul(height)
            .ok_or_else(|| Fail::Arg("depth size overflows".into()))?;
        let values = std::slice::from_raw_parts(depth, len).to_vec();
        let d = DepthMap::new(width, height, values)?;
        let k = CameraIntrinsics::new(fx, fy, cx, cy)?;
        *out_ref(out)? = projection_loss(&p, &t, &d, &k)?;
        Ok(())
    })
}
