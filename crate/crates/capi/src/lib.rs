//! C interface to the rlcm sampler.
//!
//! The surface is a pair of opaque handles. [`RlcmSim`] owns one simulated
//! dataset (responses, covariates, true attribute profiles); [`RlcmFit`]
//! owns the recorded draws of one fitted chain. Every entry point returns a
//! status code, never unwinds across the boundary, and leaves a descriptive
//! message for the calling thread that [`rlcm_last_error`] can copy out.
//!
//! Matrix buffers are row-major. Buffer capacities are in elements, not
//! bytes; the `*_rows`/`*_width` queries give the counts a caller needs.

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::DMatrix;

use rlcm::eval::geweke_z;
use rlcm::io::infer_levels;
use rlcm::runner::run_chains;
use rlcm::sampler::{ChainOutput, DrawBlock};
use rlcm::sim::{gen_dataset, gen_truth, Scenario};
use rlcm::{Error, ModelConfig, RngStream};

/// Call completed.
pub const RLCM_OK: c_int = 0;
/// Caller error at the interface: null handle, undersized buffer, bad enum.
pub const RLCM_ERR_USAGE: c_int = 1;
/// The model layer rejected the configuration or the data.
pub const RLCM_ERR_INVALID: c_int = 2;
/// The sampler hit a numerical failure it could not recover from.
pub const RLCM_ERR_NUMERICAL: c_int = 3;
/// An internal panic was caught at the boundary.
pub const RLCM_ERR_PANIC: c_int = 4;

/// Parameter blocks recorded by a fit, for `rlcm_fit_block_*` calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlcmBlock {
    /// Measurement coefficients, J * H columns.
    Beta = 0,
    /// Inclusion indicators (0/1 draws), J * H columns.
    Delta = 1,
    /// Free response cutpoints, sum over items of (M_j - 2) columns.
    Kappa = 2,
    /// Structural regression coefficients, D * K columns.
    Lambda = 3,
    /// Attribute correlations, K * (K - 1) / 2 columns.
    R = 4,
    /// Free attribute thresholds, K * (L - 2) columns.
    Gamma = 5,
    /// Inclusion probability, 1 column.
    Omega = 6,
}

/// Opaque handle to a simulated dataset; create with `rlcm_simulate`,
/// release with `rlcm_sim_free`.
pub struct RlcmSim {
    k: usize,
    y: DMatrix<u8>,
    x: DMatrix<f64>,
    alpha: DMatrix<u8>,
}

/// Opaque handle to one fitted chain; create with `rlcm_fit`, release
/// with `rlcm_fit_free`.
pub struct RlcmFit {
    out: ChainOutput,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn clear_error() {
    LAST_ERROR.with(|e| e.borrow_mut().clear());
}

fn usage(msg: impl Into<String>) -> c_int {
    set_error(msg);
    RLCM_ERR_USAGE
}

fn model_error(err: &Error) -> c_int {
    set_error(err.to_string());
    // The library's own code classes: 1 usage, 2 config/data, 3 numerical.
    err.exit_code()
}

/// Runs `f` with panics converted to RLCM_ERR_PANIC and the error slot
/// cleared on entry, so a later rlcm_last_error reflects this call only.
fn guard<F: FnOnce() -> c_int>(f: F) -> c_int {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(payload) => {
            let msg = if let Some(s) = payload.downcast_ref::<&str>() {
                format!("internal panic: {s}")
            } else if let Some(s) = payload.downcast_ref::<String>() {
                format!("internal panic: {s}")
            } else {
                "internal panic".into()
            };
            set_error(msg);
            RLCM_ERR_PANIC
        }
    }
}

unsafe fn sim_ref<'a>(sim: *const RlcmSim) -> Option<&'a RlcmSim> {
    unsafe { sim.as_ref() }
}

unsafe fn fit_ref<'a>(fit: *const RlcmFit) -> Option<&'a RlcmFit> {
    unsafe { fit.as_ref() }
}

fn block_of(out: &ChainOutput, block: c_int) -> Option<&DrawBlock> {
    match block {
        0 => Some(&out.beta),
        1 => Some(&out.delta),
        2 => Some(&out.kappa),
        3 => Some(&out.lambda),
        4 => Some(&out.r),
        5 => Some(&out.gamma),
        6 => Some(&out.omega),
        _ => None,
    }
}

/// Copies a u8 matrix row-major into `buf`; cap is in elements.
unsafe fn copy_u8_matrix(m: &DMatrix<u8>, buf: *mut u8, cap: usize) -> c_int {
    if buf.is_null() {
        return usage("output buffer is null");
    }
    let needed = m.nrows() * m.ncols();
    if cap < needed {
        return usage(format!("buffer holds {cap} elements, {needed} required"));
    }
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            unsafe { *buf.add(i * m.ncols() + j) = m[(i, j)] };
        }
    }
    RLCM_OK
}

unsafe fn copy_f64_matrix(m: &DMatrix<f64>, buf: *mut f64, cap: usize) -> c_int {
    if buf.is_null() {
        return usage("output buffer is null");
    }
    let needed = m.nrows() * m.ncols();
    if cap < needed {
        return usage(format!("buffer holds {cap} elements, {needed} required"));
    }
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            unsafe { *buf.add(i * m.ncols() + j) = m[(i, j)] };
        }
    }
    RLCM_OK
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rlcm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the message from the most recent failing call on this thread into
/// `buf` (NUL-terminated, truncated to `cap` bytes) and returns the full
/// length the message needs including the terminator. `buf` may be null or
/// `cap` zero to query the length alone. Successful calls clear the slot.
///
/// # Safety
///
/// `buf`, when non-null, must point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rlcm_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let ncopy = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, ncopy);
                *buf.add(ncopy) = 0;
            }
        }
        bytes.len() + 1
    })
}

/// Simulates one dataset: `n` respondents answering `j` ternary items
/// driven by `k` ordinal attributes with `l` levels each and pairwise
/// latent correlation `rho`, keeping interactions up to `order`. The
/// drawn truth is internal to the handle; fetch the observables with the
/// `rlcm_sim_*` accessors and free the handle with `rlcm_sim_free`.
///
/// # Safety
///
/// `out` must be a valid pointer to an `RlcmSim*` slot.
#[no_mangle]
pub unsafe extern "C" fn rlcm_simulate(
    n: usize,
    j: usize,
    k: usize,
    l: usize,
    rho: f64,
    order: usize,
    seed: u64,
    out: *mut *mut RlcmSim,
) -> c_int {
    guard(|| {
        if out.is_null() {
            return usage("out is null");
        }
        if n == 0 || j == 0 {
            return usage(format!("n and j must be positive, got n={n} j={j}"));
        }
        if k == 0 || l < 2 || order == 0 || order > k {
            return usage(format!(
                "need k >= 1, l >= 2, 1 <= order <= k; got k={k} l={l} order={order}"
            ));
        }
        if !rho.is_finite() || rho.abs() >= 1.0 {
            return usage(format!("rho must lie in (-1, 1), got {rho}"));
        }
        let sc = Scenario::new(n, j, k, l, rho);
        let mut truth_rng = RngStream::new(seed, 0);
        let truth = match gen_truth(&sc, order, &mut truth_rng) {
            Ok(t) => t,
            Err(e) => return model_error(&e),
        };
        let mut data_rng = RngStream::new(seed, 1);
        let data = match gen_dataset(&sc, order, &truth, &mut data_rng) {
            Ok(d) => d,
            Err(e) => return model_error(&e),
        };
        let handle = Box::new(RlcmSim {
            k,
            y: data.y,
            x: data.x,
            alpha: data.alpha,
        });
        unsafe { *out = Box::into_raw(handle) };
        RLCM_OK
    })
}

/// Releases a simulation handle. Null is a no-op.
///
/// # Safety
///
/// `sim` must be null or a handle returned by `rlcm_simulate` that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn rlcm_sim_free(sim: *mut RlcmSim) {
    if !sim.is_null() {
        drop(unsafe { Box::from_raw(sim) });
    }
}

/// Respondent count, or 0 on a null handle.
///
/// # Safety
///
/// `sim` must be null or a live handle from `rlcm_simulate`.
#[no_mangle]
pub unsafe extern "C" fn rlcm_sim_rows(sim: *const RlcmSim) -> usize {
    unsafe { sim_ref(sim) }.map_or(0, |s| s.y.nrows())
}

/// Item count, or 0 on a null handle.
///
/// # Safety
///
/// `sim` must be null or a live handle from `rlcm_simulate`.
#[no_mangle]
pub unsafe extern "C" fn rlcm_sim_items(sim: *const RlcmSim) -> usize {
    unsafe { sim_ref(sim) }.map_or(0, |s| s.y.ncols())
}

/// Attribute count, or 0 on a null handle.
///
/// # Safety
///
/// `sim` must be null or a live handle from `rlcm_simulate`.
#[no_mangle]
pub unsafe extern "C" fn rlcm_sim_attributes(sim: *const RlcmSim) -> usize {
    unsafe { sim_ref(sim) }.map_or(0, |s| s.k)
}

/// Covariate column count including the intercept, or 0 on a null handle.
///
/// # Safety
///
/// `sim` must be null or a live handle from `rlcm_simulate`.
#[no_mangle]
pub unsafe extern "C" fn rlcm_sim_covariates(sim: *const RlcmSim) -> usize {
    unsafe { sim_ref(sim) }.map_or(0, |s| s.x.ncols())
}

/// Copies the response matrix, row-major rows x items, levels 0..M-1.
///
/// # Safety
///
/// `sim` must be a live handle; `buf` must hold `cap` writable elements.
#[no_mangle]
pub unsafe extern "C" fn rlcm_sim_responses(
    sim: *const RlcmSim,
    buf: *mut u8,
    cap: usize,
) -> c_int {
    guard(|| match unsafe { sim_ref(sim) } {
        None => usage("sim handle is null"),
        Some(s) => unsafe { copy_u8_matrix(&s.y, buf, cap) },
    })
}

/// Copies the covariate matrix, row-major rows x covariates, intercept in
/// column 0.
///
/// # Safety
///
/// `sim` must be a live handle; `buf` must hold `cap` writable elements.
#[no_mangle]
pub unsafe extern "C" fn rlcm_sim_covariate_matrix(
    sim: *const RlcmSim,
    buf: *mut f64,
    cap: usize,
) -> c_int {
    guard(|| match unsafe { sim_ref(sim) } {
        None => usage("sim handle is null"),
        Some(s) => unsafe { copy_f64_matrix(&s.x, buf, cap) },
    })
}

/// Copies the true attribute profiles, row-major rows x attributes, levels
/// 0..L-1.
///
/// # Safety
///
/// `sim` must be a live handle; `buf` must hold `cap` writable elements.
#[no_mangle]
pub unsafe extern "C" fn rlcm_sim_profiles(
    sim: *const RlcmSim,
    buf: *mut u8,
    cap: usize,
) -> c_int {
    guard(|| match unsafe { sim_ref(sim) } {
        None => usage("sim handle is null"),
        Some(s) => unsafe { copy_u8_matrix(&s.alpha, buf, cap) },
    })
}

/// Fits one chain to response matrix `y` (row-major `n` x `j`, levels from
/// 0; per-item level counts are inferred from the data) with covariate
/// matrix `x` (row-major `n` x `d`, include your own intercept column),
/// modeling `k` attributes with `l` levels and interactions up to `order`.
/// Runs `chain_length` iterations, discards `burnin`, and records the rest.
/// Same seed, same inputs: identical draws. Free with `rlcm_fit_free`.
///
/// # Safety
///
/// `y` must hold `n * j` elements, `x` must hold `n * d` elements, and
/// `out` must be a valid pointer to an `RlcmFit*` slot.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn rlcm_fit(
    y: *const u8,
    n: usize,
    j: usize,
    x: *const f64,
    d: usize,
    k: usize,
    l: usize,
    order: usize,
    chain_length: usize,
    burnin: usize,
    seed: u64,
    out: *mut *mut RlcmFit,
) -> c_int {
    guard(|| {
        if out.is_null() {
            return usage("out is null");
        }
        if y.is_null() || x.is_null() {
            return usage("y and x must be non-null");
        }
        if n == 0 || j == 0 || d == 0 {
            return usage(format!("n, j, d must be positive, got n={n} j={j} d={d}"));
        }
        if n.checked_mul(j).is_none() || n.checked_mul(d).is_none() {
            return usage("n * j or n * d overflows");
        }
        if chain_length <= burnin {
            return usage(format!(
                "chain_length {chain_length} must exceed burnin {burnin}"
            ));
        }
        let ym = DMatrix::from_fn(n, j, |i, c| unsafe { *y.add(i * j + c) });
        let xm = DMatrix::from_fn(n, d, |i, c| unsafe { *x.add(i * d + c) });
        if xm.iter().any(|v| !v.is_finite()) {
            set_error("covariate matrix contains a non-finite value");
            return RLCM_ERR_INVALID;
        }
        let config = ModelConfig::new(n, infer_levels(&ym), k, l, d, order)
            .with_chain(chain_length, burnin);
        match run_chains(&config, &ym, &xm, None, None, seed, 1) {
            Ok(mut outcomes) => {
                let fitted = outcomes.pop().expect("one chain requested");
                let handle = Box::new(RlcmFit { out: fitted.output });
                unsafe { *out = Box::into_raw(handle) };
                RLCM_OK
            }
            Err(e) => model_error(&e),
        }
    })
}

/// Releases a fit handle. Null is a no-op.
///
/// # Safety
///
/// `fit` must be null or a handle returned by `rlcm_fit` that has not been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn rlcm_fit_free(fit: *mut RlcmFit) {
    if !fit.is_null() {
        drop(unsafe { Box::from_raw(fit) });
    }
}

/// Recorded (post-burn-in) draw count, or 0 on a null handle.
///
/// # Safety
///
/// `fit` must be null or a live handle from `rlcm_fit`.
#[no_mangle]
pub unsafe extern "C" fn rlcm_fit_draws(fit: *const RlcmFit) -> usize {
    unsafe { fit_ref(fit) }.map_or(0, |f| f.out.draws())
}

/// Respondent count the fit was run on, or 0 on a null handle.
///
/// # Safety
///
/// `fit` must be null or a live handle from `rlcm_fit`.
#[no_mangle]
pub unsafe extern "C" fn rlcm_fit_rows(fit: *const RlcmFit) -> usize {
    unsafe { fit_ref(fit) }.map_or(0, |f| f.out.config.n)
}

/// Attribute count of the fitted model, or 0 on a null handle.
///
/// # Safety
///
/// `fit` must be null or a live handle from `rlcm_fit`.
#[no_mangle]
pub unsafe extern "C" fn rlcm_fit_attributes(fit: *const RlcmFit) -> usize {
    unsafe { fit_ref(fit) }.map_or(0, |f| f.out.config.k)
}

/// Column count of one parameter block (an `RlcmBlock` value), 0 on a null
/// handle or unknown block. Blocks with nothing to sample (for example
/// Gamma at l = 2) have width 0.
///
/// # Safety
///
/// `fit` must be null or a live handle from `rlcm_fit`.
#[no_mangle]
pub unsafe extern "C" fn rlcm_fit_block_width(fit: *const RlcmFit, block: c_int) -> usize {
    unsafe { fit_ref(fit) }
        .and_then(|f| block_of(&f.out, block))
        .map_or(0, DrawBlock::cols)
}

/// Posterior mean of every column of one parameter block, in the block's
/// column order. `cap` must cover `rlcm_fit_block_width` elements.
///
/// # Safety
///
/// `fit` must be a live handle; `buf` must hold `cap` writable elements.
#[no_mangle]
pub unsafe extern "C" fn rlcm_fit_block_mean(
    fit: *const RlcmFit,
    block: c_int,
    buf: *mut f64,
    cap: usize,
) -> c_int {
    guard(|| {
        let Some(f) = (unsafe { fit_ref(fit) }) else {
            return usage("fit handle is null");
        };
        let Some(b) = block_of(&f.out, block) else {
            return usage(format!("unknown parameter block {block}"));
        };
        if buf.is_null() {
            return usage("output buffer is null");
        }
        if cap < b.cols() {
            return usage(format!(
                "buffer holds {cap} elements, {} required",
                b.cols()
            ));
        }
        for c in 0..b.cols() {
            unsafe { *buf.add(c) = b.col_mean(c) };
        }
        RLCM_OK
    })
}

/// Geweke convergence score of every column of one parameter block: the
/// standardized mean difference between early and late chain segments,
/// NaN where the column is too short or constant. `cap` must cover
/// `rlcm_fit_block_width` elements.
///
/// # Safety
///
/// `fit` must be a live handle; `buf` must hold `cap` writable elements.
#[no_mangle]
pub unsafe extern "C" fn rlcm_fit_block_geweke(
    fit: *const RlcmFit,
    block: c_int,
    buf: *mut f64,
    cap: usize,
) -> c_int {
    guard(|| {
        let Some(f) = (unsafe { fit_ref(fit) }) else {
            return usage("fit handle is null");
        };
        let Some(b) = block_of(&f.out, block) else {
            return usage(format!("unknown parameter block {block}"));
        };
        if buf.is_null() {
            return usage("output buffer is null");
        }
        if cap < b.cols() {
            return usage(format!(
                "buffer holds {cap} elements, {} required",
                b.cols()
            ));
        }
        for c in 0..b.cols() {
            unsafe { *buf.add(c) = geweke_z(&b.col_vec(c)).z };
        }
        RLCM_OK
    })
}

/// Most-visited post-burn-in level of every respondent-attribute pair,
/// row-major rows x attributes. `cap` must cover
/// `rlcm_fit_rows * rlcm_fit_attributes` elements.
///
/// # Safety
///
/// `fit` must be a live handle; `buf` must hold `cap` writable elements.
#[no_mangle]
pub unsafe extern "C" fn rlcm_fit_modal_profiles(
    fit: *const RlcmFit,
    buf: *mut u8,
    cap: usize,
) -> c_int {
    guard(|| {
        let Some(f) = (unsafe { fit_ref(fit) }) else {
            return usage("fit handle is null");
        };
        if buf.is_null() {
            return usage("output buffer is null");
        }
        let (n, k) = (f.out.config.n, f.out.config.k);
        let needed = n * k;
        if cap < needed {
            return usage(format!("buffer holds {cap} elements, {needed} required"));
        }
        for i in 0..n {
            for a in 0..k {
                unsafe { *buf.add(i * k + a) = f.out.modal_level(i, a) as u8 };
            }
        }
        RLCM_OK
    })
}
