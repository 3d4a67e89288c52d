//! C ABI over `slesigma`.
//!
//! Every fallible function returns an [`SlesStatus`]; on failure the message
//! is kept per thread and read back with [`sles_last_error_message`]. Paths,
//! hull clouds and densities are opaque handles released by their `*_free`
//! function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use slesigma::model::{sample_driving_path, validate_sigma, DrivingPath};
use slesigma::phases::{classify, PhaseLabel};
use slesigma::slit_engine::{compose_forward, left_hull_cloud, right_hull_cloud, HullPointCloud};
use slesigma::stationary::{stationary_density, StationaryDensity};
use slesigma::streams::SeedRecord;
use slesigma::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlesStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidCovariance = 2,
    InvalidArgument = 3,
    OnSlit = 4,
    Quadrature = 5,
    Unsupported = 6,
    NoConvergence = 7,
    Inconsistent = 8,
    Io = 9,
    Parse = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

impl From<&Error> for SlesStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidCovariance(_) => SlesStatus::InvalidCovariance,
            Error::InvalidArgument(_) => SlesStatus::InvalidArgument,
            Error::OnSlit { .. } => SlesStatus::OnSlit,
            Error::Quadrature { .. } => SlesStatus::Quadrature,
            Error::Unsupported(_) => SlesStatus::Unsupported,
            Error::NoConvergence { .. } => SlesStatus::NoConvergence,
            Error::Inconsistent(_) => SlesStatus::Inconsistent,
            Error::Io(_) => SlesStatus::Io,
            Error::Parse(_) => SlesStatus::Parse,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlesPhase {
    Thin = 0,
    Swallowing = 1,
    Hitting = 2,
    Dense = 3,
    BoundaryIndeterminate = 4,
}

impl From<PhaseLabel> for SlesPhase {
    fn from(l: PhaseLabel) -> Self {
        match l {
            PhaseLabel::Thin => SlesPhase::Thin,
            PhaseLabel::Swallowing => SlesPhase::Swallowing,
            PhaseLabel::Hitting => SlesPhase::Hitting,
            PhaseLabel::Dense => SlesPhase::Dense,
            PhaseLabel::BoundaryIndeterminate => SlesPhase::BoundaryIndeterminate,
        }
    }
}

/// Hull side selector for [`sles_hull_cloud`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlesSide {
    Left = 0,
    Right = 1,
}

/// Phase integrals and the label derived from their signs.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlesPhaseReport {
    pub i: f64,
    pub ii: f64,
    pub err_i: f64,
    pub err_ii: f64,
    pub tol_i: f64,
    pub tol_ii: f64,
    pub label: SlesPhase,
}

/// Opaque driving path.
pub struct SlesPath(DrivingPath);

/// Opaque hull point cloud.
pub struct SlesCloud(HullPointCloud);

/// Opaque stationary density.
pub struct SlesDensity(StationaryDensity);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), SlesStatus>>(f: F) -> SlesStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SlesStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SlesStatus::Panic
        }
    }
}

fn fail(e: Error) -> SlesStatus {
    let s = SlesStatus::from(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> SlesStatus {
    set_error(format!("null pointer: {what}"));
    SlesStatus::NullPointer
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sles_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length in bytes
/// excluding the terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sles_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Samples a driver with covariance `(a, b, c)`, `n` steps over `horizon`,
/// from stream `stream` of master seed `master`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn sles_path_sample(
    a: f64,
    b: f64,
    c: f64,
    n: usize,
    horizon: f64,
    master: u64,
    stream: u64,
    out: *mut *mut SlesPath,
) -> SlesStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sigma = validate_sigma(a, b, c).map_err(fail)?;
        let path = sample_driving_path(&sigma, n, horizon, SeedRecord::new(master, stream)).map_err(fail)?;
        put(out, SlesPath(path));
        Ok(())
    })
}

/// A driver with all increments zero.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn sles_path_zero(n: usize, horizon: f64, out: *mut *mut SlesPath) -> SlesStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = DrivingPath::zero(n, horizon).map_err(fail)?;
        put(out, SlesPath(path));
        Ok(())
    })
}

/// A driver from `n` increments given as separate real and imaginary arrays.
///
/// # Safety
/// `re` and `im` must point to `n` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sles_path_from_increments(
    horizon: f64,
    re: *const f64,
    im: *const f64,
    n: usize,
    out: *mut *mut SlesPath,
) -> SlesStatus {
    guard(|| {
        if out.is_null() || re.is_null() || im.is_null() {
            return Err(null("argument"));
        }
        let re = std::slice::from_raw_parts(re, n);
        let im = std::slice::from_raw_parts(im, n);
        let inc = re.iter().zip(im).map(|(&x, &y)| Complex64::new(x, y)).collect();
        let path = DrivingPath::from_increments(horizon, inc).map_err(fail)?;
        put(out, SlesPath(path));
        Ok(())
    })
}

/// Number of increments, or 0 for a null handle.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sles_path_len(path: *const SlesPath) -> usize {
    path.as_ref().map_or(0, |p| p.0.n())
}

/// # Safety
/// `path` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sles_path_free(path: *mut SlesPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Pushes `z = re + i·im` through the full composition; on a slit hit the
/// result is NaN.
///
/// # Safety
/// `path` must be a live handle; `out_re`, `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sles_forward_map(
    path: *const SlesPath,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> SlesStatus {
    guard(|| {
        let p = path.as_ref().ok_or_else(|| null("path"))?;
        if out_re.is_null() || out_im.is_null() {
            return Err(null("out"));
        }
        let w = compose_forward(&p.0, Complex64::new(re, im)).last();
        *out_re = w.re;
        *out_im = w.im;
        Ok(())
    })
}

/// Hull samples of `path` at probe radius `epsilon`.
///
/// # Safety
/// `path` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sles_hull_cloud(
    path: *const SlesPath,
    epsilon: f64,
    side: SlesSide,
    out: *mut *mut SlesCloud,
) -> SlesStatus {
    guard(|| {
        let p = path.as_ref().ok_or_else(|| null("path"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cloud = match side {
            SlesSide::Left => left_hull_cloud(&p.0, epsilon),
            SlesSide::Right => right_hull_cloud(&p.0, epsilon),
        }
        .map_err(fail)?;
        put(out, SlesCloud(cloud));
        Ok(())
    })
}

/// # Safety
/// `cloud` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sles_cloud_len(cloud: *const SlesCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.0.len())
}

/// Copies points into `re`, `im` and `t_added` (each may be null), `len`
/// entries each. Fails with `BufferTooSmall` if `len` is short.
///
/// # Safety
/// Non-null buffers must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sles_cloud_points(
    cloud: *const SlesCloud,
    re: *mut f64,
    im: *mut f64,
    t_added: *mut f64,
    len: usize,
) -> SlesStatus {
    guard(|| {
        let c = cloud.as_ref().ok_or_else(|| null("cloud"))?;
        let pts = &c.0.points;
        if len < pts.len() {
            set_error(format!("buffer holds {len} points, cloud has {}", pts.len()));
            return Err(SlesStatus::BufferTooSmall);
        }
        for (k, q) in pts.iter().enumerate() {
            if !re.is_null() {
                *re.add(k) = q.z.re;
            }
            if !im.is_null() {
                *im.add(k) = q.z.im;
            }
            if !t_added.is_null() {
                *t_added.add(k) = q.t_added;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `cloud` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sles_cloud_free(cloud: *mut SlesCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Stationary angular density of `(a, b, c)` on an `m`-cell grid of `[0, 2π]`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sles_density(a: f64, b: f64, c: f64, m: usize, out: *mut *mut SlesDensity) -> SlesStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sigma = validate_sigma(a, b, c).map_err(fail)?;
        let p = stationary_density(&sigma, m).map_err(fail)?;
        put(out, SlesDensity(p));
        Ok(())
    })
}

/// Number of grid nodes (`m + 1`), or 0 for a null handle.
///
/// # Safety
/// `density` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sles_density_len(density: *const SlesDensity) -> usize {
    density.as_ref().map_or(0, |d| d.0.values.len())
}

/// Copies grid nodes and values into `u` and `p` (each may be null).
///
/// # Safety
/// Non-null buffers must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sles_density_values(
    density: *const SlesDensity,
    u: *mut f64,
    p: *mut f64,
    len: usize,
) -> SlesStatus {
    guard(|| {
        let d = density.as_ref().ok_or_else(|| null("density"))?;
        let n = d.0.values.len();
        if len < n {
            set_error(format!("buffer holds {len} values, density has {n}"));
            return Err(SlesStatus::BufferTooSmall);
        }
        for k in 0..n {
            if !u.is_null() {
                *u.add(k) = d.0.grid[k];
            }
            if !p.is_null() {
                *p.add(k) = d.0.values[k];
            }
        }
        Ok(())
    })
}

/// Interpolated density at angle `u`; NaN for a null handle.
///
/// # Safety
/// `density` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sles_density_value_at(density: *const SlesDensity, u: f64) -> f64 {
    density.as_ref().map_or(f64::NAN, |d| d.0.value_at(u))
}

/// # Safety
/// `density` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sles_density_free(density: *mut SlesDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// Phase integrals and label of `(a, b, c)`. A `tol_zero` that is not
/// positive selects the error-derived tolerances.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sles_phase_classify(
    a: f64,
    b: f64,
    c: f64,
    tol_zero: f64,
    out: *mut SlesPhaseReport,
) -> SlesStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sigma = validate_sigma(a, b, c).map_err(fail)?;
        let tol = (tol_zero > 0.0).then_some(tol_zero);
        let r = classify(&sigma, tol).map_err(fail)?;
        *out = SlesPhaseReport {
            i: r.i,
            ii: r.ii,
            err_i: r.err_i,
            err_ii: r.err_ii,
            tol_i: r.tol_i,
            tol_ii: r.tol_ii,
            label: r.label.into(),
        };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn message() -> String {
        let mut buf = vec![0 as c_char; 256];
        let n = unsafe { sles_last_error_message(buf.as_mut_ptr(), buf.len()) };
        let s: Vec<u8> = buf.iter().take(n.min(255)).map(|&c| c as u8).collect();
        String::from_utf8(s).unwrap()
    }

    #[test]
    fn invalid_covariance_sets_message() {
        let mut p = ptr::null_mut();
        let s = unsafe { sles_path_sample(1.0, 1.0, 2.0, 10, 1.0, 0, 0, &mut p) };
        assert_eq!(s, SlesStatus::InvalidCovariance);
        assert!(p.is_null());
        assert!(message().contains("invalid covariance"));
        let mut q = ptr::null_mut();
        assert_eq!(unsafe { sles_path_zero(4, 1.0, &mut q) }, SlesStatus::Ok);
        assert_eq!(message(), "");
        unsafe { sles_path_free(q) };
    }

    #[test]
    fn null_handles() {
        let mut x = 0.0;
        let s = unsafe { sles_forward_map(ptr::null(), 1.0, 1.0, &mut x, &mut x) };
        assert_eq!(s, SlesStatus::NullPointer);
        assert_eq!(unsafe { sles_path_len(ptr::null()) }, 0);
        assert!(unsafe { sles_density_value_at(ptr::null(), 0.0) }.is_nan());
        unsafe { sles_cloud_free(ptr::null_mut()) };
    }

    #[test]
    fn short_buffer_is_reported() {
        let mut p = ptr::null_mut();
        let mut c = ptr::null_mut();
        unsafe {
            assert_eq!(sles_path_zero(20, 1.0, &mut p), SlesStatus::Ok);
            assert_eq!(sles_hull_cloud(p, 0.02, SlesSide::Left, &mut c), SlesStatus::Ok);
            let n = sles_cloud_len(c);
            let mut re = vec![0.0; n - 1];
            let s = sles_cloud_points(c, re.as_mut_ptr(), ptr::null_mut(), ptr::null_mut(), n - 1);
            assert_eq!(s, SlesStatus::BufferTooSmall);
            sles_cloud_free(c);
            sles_path_free(p);
        }
    }
}
