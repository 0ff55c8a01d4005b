//! C ABI over the cogradio library.
//!
//! Every fallible call returns a [`CgStatus`]; on failure a message is kept
//! per thread and can be copied out with [`cg_last_error`]. Objects cross
//! the boundary as opaque handles that the caller must release with the
//! matching `*_free` function. Matrices are exchanged as separate real and
//! imaginary arrays in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cogradio::channel::{paper_channels, ChannelSet};
use cogradio::linalg::{c, CMat};
use cogradio::pairing::{relay_ratio_approx, siso_relay_ratio};
use cogradio::transceiver::{generalized_zf, joint_design, DesignProblem, GzfConfig, TransceiverDesign};
use cogradio::Error;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Infeasible = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Selects one matrix of a design.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgMatrix {
    Relay = 0,
    Feedback = 1,
    Transmit = 2,
    Receive = 3,
}

/// Opaque set of four channel matrices.
pub struct CgChannels(ChannelSet);

/// Opaque transceiver design with its figures of merit.
pub struct CgDesign {
    design: TransceiverDesign,
    smse: f64,
    gap: f64,
    converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> CgStatus {
    match e {
        Error::Infeasible { .. } => CgStatus::Infeasible,
        Error::InvalidArgument(_) | Error::Dimension(_) | Error::NonFinite => CgStatus::InvalidArgument,
        _ => CgStatus::Numerical,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (CgStatus, String)>) -> CgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CgStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (CgStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CgStatus, String) {
    (CgStatus::NullPointer, format!("{what} is null"))
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating if needed. Returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cg_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The fixed 2×2 reference channels.
///
/// # Safety
/// `out` must be a valid pointer to writable handle storage.
#[no_mangle]
pub unsafe extern "C" fn cg_channels_reference(out: *mut *mut CgChannels) -> CgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(CgChannels(paper_channels())));
        Ok(())
    })
}

/// Parses a channel set from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid handle storage.
#[no_mangle]
pub unsafe extern "C" fn cg_channels_from_json(json: *const c_char, out: *mut *mut CgChannels) -> CgStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| (CgStatus::InvalidArgument, e.to_string()))?;
        let set = ChannelSet::from_json(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CgChannels(set)));
        Ok(())
    })
}

/// Builds a channel set from four `n×n` matrices, each given as row-major
/// real and imaginary arrays of length `n*n`, in the order `H13, H14, H23,
/// H24`.
///
/// # Safety
/// `re` and `im` must each point to `4*n*n` readable doubles and `out` to
/// valid handle storage.
#[no_mangle]
pub unsafe extern "C" fn cg_channels_new(n: usize, re: *const f64, im: *const f64, out: *mut *mut CgChannels) -> CgStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(null("matrix data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        if n == 0 {
            return Err((CgStatus::InvalidArgument, "n must be positive".into()));
        }
        let re = std::slice::from_raw_parts(re, 4 * n * n);
        let im = std::slice::from_raw_parts(im, 4 * n * n);
        let mat = |k: usize| CMat::from_fn(n, n, |i, j| c(re[k * n * n + i * n + j], im[k * n * n + i * n + j]));
        let set = ChannelSet::new(mat(0), mat(1), mat(2), mat(3)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CgChannels(set)));
        Ok(())
    })
}

/// Antennas per node, or 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cg_channels_n_t(ch: *const CgChannels) -> usize {
    ch.as_ref().map_or(0, |c| c.0.n_t)
}

/// # Safety
/// `ch` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cg_channels_free(ch: *mut CgChannels) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

unsafe fn problem(ch: *const CgChannels, p_p: f64, p_t: f64) -> Result<DesignProblem, (CgStatus, String)> {
    let ch = ch.as_ref().ok_or_else(|| null("channels"))?;
    DesignProblem::new(ch.0.clone(), p_p, p_t).map_err(lib_err)
}

/// Joint THP design by successive convex approximation. Powers are linear.
///
/// # Safety
/// `ch` must be a live handle and `out` valid handle storage.
#[no_mangle]
pub unsafe extern "C" fn cg_joint_design(ch: *const CgChannels, p_p: f64, p_t: f64, out: *mut *mut CgDesign) -> CgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = problem(ch, p_p, p_t)?;
        let o = joint_design(&p).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CgDesign { design: o.design, smse: o.smse, gap: o.gap, converged: o.converged }));
        Ok(())
    })
}

/// Generalized zero-forcing baseline with the default grid.
///
/// # Safety
/// `ch` must be a live handle and `out` valid handle storage.
#[no_mangle]
pub unsafe extern "C" fn cg_gzf_design(ch: *const CgChannels, p_p: f64, p_t: f64, out: *mut *mut CgDesign) -> CgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = problem(ch, p_p, p_t)?;
        let o = generalized_zf(&p, &GzfConfig::default()).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CgDesign { design: o.design, smse: o.smse, gap: o.gap, converged: true }));
        Ok(())
    })
}

/// Sum MSE of a design, NaN for a null handle.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cg_design_smse(d: *const CgDesign) -> f64 {
    d.as_ref().map_or(f64::NAN, |d| d.smse)
}

/// Coexistence gap in bits, NaN for a null handle.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cg_design_gap(d: *const CgDesign) -> f64 {
    d.as_ref().map_or(f64::NAN, |d| d.gap)
}

/// Whether the iteration met its stopping rule.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cg_design_converged(d: *const CgDesign) -> bool {
    d.as_ref().is_some_and(|d| d.converged)
}

/// Copies one `n×n` matrix of the design into row-major `re`/`im` buffers
/// of length `len`. Fails with `BufferTooSmall` when `len < n*n`.
///
/// # Safety
/// `d` must be a live handle; `re` and `im` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn cg_design_matrix(d: *const CgDesign, which: CgMatrix, re: *mut f64, im: *mut f64, len: usize) -> CgStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("design"))?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let m = match which {
            CgMatrix::Relay => &d.design.a,
            CgMatrix::Feedback => &d.design.b,
            CgMatrix::Transmit => &d.design.f,
            CgMatrix::Receive => &d.design.w,
        };
        let (r, k) = m.shape();
        if len < r * k {
            return Err((CgStatus::BufferTooSmall, format!("need {} entries, got {len}", r * k)));
        }
        for i in 0..r {
            for j in 0..k {
                *re.add(i * k + j) = m[(i, j)].re;
                *im.add(i * k + j) = m[(i, j)].im;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `d` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cg_design_free(d: *mut CgDesign) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Closed-form MIMO relay-ratio approximation. Powers are linear.
///
/// # Safety
/// `ch` must be a live handle and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn cg_relay_ratio(ch: *const CgChannels, p_p: f64, p_t: f64, out: *mut f64) -> CgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = problem(ch, p_p, p_t)?;
        *out = relay_ratio_approx(&p.channels.h14, &p.channels.h24, &p.sigma, p_t, None).map_err(lib_err)?;
        Ok(())
    })
}

/// Exact SISO relay ratio for PU and SU link powers `p1`, `p2`.
///
/// # Safety
/// `out` must be a writable double.
#[no_mangle]
pub unsafe extern "C" fn cg_siso_relay_ratio(p1: f64, p2: f64, out: *mut f64) -> CgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = siso_relay_ratio(p1, p2).map_err(lib_err)?;
        Ok(())
    })
}
