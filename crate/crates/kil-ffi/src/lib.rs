//! C interface to the `kil` kernel-approximation library.
//!
//! Every function follows the same contract:
//!
//! * objects cross the boundary as opaque handles created by a `*_parse`,
//!   `*_build`, or `kil_fit` call and released by the matching `*_free`;
//! * fallible calls return a [`KilStatus`] and write their result through an
//!   `out` pointer, which is left untouched on failure;
//! * after a failure, [`kil_last_error_message`] returns a human-readable
//!   explanation valid until the next failing call on the same thread;
//! * passing a null required pointer is reported as
//!   [`KilStatus::NullPointer`], never undefined behavior, and panics are
//!   caught at the boundary and reported as [`KilStatus::Panic`].
//!
//! Strings returned through `char **` out-parameters are heap-allocated and
//! must be released with [`kil_string_free`].

#![deny(unsafe_op_in_unsafe_fn)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fmt::Display;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kil::geometry::{self, PointSet, Region};
use kil::interpolate::{fit, Interpolant};
use kil::kernels::Kernel;
use kil::rates::{fit_rate, refinement_study, Regime, Target};
use kil::spectral::{nystrom, SpectralModel, DEFAULT_DROP_TOL};
use kil::Error;

// ---------------------------------------------------------------------------
// status codes and error reporting
// ---------------------------------------------------------------------------

/// Result of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KilStatus {
    /// The call succeeded and any out-parameters were written.
    Ok = 0,
    /// A descriptor, dimension, or parameter was rejected during validation.
    InvalidArgument = 1,
    /// The computation itself failed (ill-conditioning, non-finite values).
    NumericalFailure = 2,
    /// A required pointer argument was null.
    NullPointer = 3,
    /// An internal panic was caught at the boundary; state may be stale.
    Panic = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Display) {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(text).expect("NUL stripped above"));
    });
}

fn fail(err: &Error) -> KilStatus {
    set_error(err);
    if err.exit_code() == 3 {
        KilStatus::NumericalFailure
    } else {
        KilStatus::InvalidArgument
    }
}

fn null_pointer(what: &str) -> KilStatus {
    set_error(format!("required pointer `{what}` is null"));
    KilStatus::NullPointer
}

/// Run a boundary body, converting panics into [`KilStatus::Panic`].
fn guarded<F: FnOnce() -> KilStatus>(body: F) -> KilStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            KilStatus::Panic
        }
    }
}

/// Last error message on this thread, or null if no call has failed yet.
///
/// The pointer stays valid until the next failing call on the same thread;
/// do not free it.
#[no_mangle]
pub extern "C" fn kil_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |text| text.as_ptr())
    })
}

/// Library version as a static nul-terminated string; do not free it.
#[no_mangle]
pub extern "C" fn kil_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned through a `char **` out-parameter.
///
/// # Safety
/// `text` must be a pointer previously returned by this library's string
/// out-parameters (or null, which is ignored), passed at most once.
#[no_mangle]
pub unsafe extern "C" fn kil_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(unsafe { CString::from_raw(text) });
    }
}

// ---------------------------------------------------------------------------
// boundary helpers
// ---------------------------------------------------------------------------

/// Borrow a required C string argument.
///
/// # Safety
/// If non-null, `ptr` must point to a nul-terminated string.
unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, KilStatus> {
    if ptr.is_null() {
        return Err(null_pointer(what));
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error(format!("`{what}` is not valid UTF-8"));
        KilStatus::InvalidArgument
    })
}

/// Borrow a required handle argument.
unsafe fn required_ref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, KilStatus> {
    if ptr.is_null() {
        Err(null_pointer(what))
    } else {
        Ok(unsafe { &*ptr })
    }
}

/// Borrow a required slice argument of `len` doubles.
unsafe fn required_slice<'a>(
    ptr: *const f64,
    len: usize,
    what: &str,
) -> Result<&'a [f64], KilStatus> {
    if ptr.is_null() && len > 0 {
        Err(null_pointer(what))
    } else if len == 0 {
        Ok(&[])
    } else {
        Ok(unsafe { std::slice::from_raw_parts(ptr, len) })
    }
}

/// Write a value through a required out-pointer.
unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> KilStatus {
    if out.is_null() {
        // The value is dropped; the caller gave us nowhere to put it.
        null_pointer(what)
    } else {
        unsafe { out.write(value) };
        KilStatus::Ok
    }
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// # Safety
/// `ptr` must come from [`boxed`] and be freed at most once.
unsafe fn free<T>(ptr: *mut T) {
    if !ptr.is_null() {
        drop(unsafe { Box::from_raw(ptr) });
    }
}

fn export_string(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " "))
        .expect("NUL stripped above")
        .into_raw()
}

// ---------------------------------------------------------------------------
// kernels
// ---------------------------------------------------------------------------

/// Opaque handle to a positive definite kernel on a fixed dimension.
pub struct KilKernel {
    inner: Kernel,
}

/// Parse a kernel descriptor such as `"wendland-hat:1"` or `"matern-half"`
/// for points of dimension `dim`.
///
/// # Safety
/// `descriptor` must be nul-terminated; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kil_kernel_parse(
    descriptor: *const c_char,
    dim: usize,
    out: *mut *mut KilKernel,
) -> KilStatus {
    guarded(|| {
        let descriptor = match unsafe { required_str(descriptor, "descriptor") } {
            Ok(text) => text,
            Err(status) => return status,
        };
        match Kernel::parse(descriptor, dim) {
            Ok(kernel) => unsafe { write_out(out, boxed(KilKernel { inner: kernel }), "out") },
            Err(err) => fail(&err),
        }
    })
}

/// Release a kernel handle (null is ignored).
///
/// # Safety
/// `kernel` must come from [`kil_kernel_parse`] and be freed at most once.
#[no_mangle]
pub unsafe extern "C" fn kil_kernel_free(kernel: *mut KilKernel) {
    unsafe { free(kernel) }
}

/// Smoothness exponent of the kernel's native space, or NaN on null input.
///
/// # Safety
/// `kernel` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn kil_kernel_tau(kernel: *const KilKernel) -> f64 {
    match unsafe { required_ref(kernel, "kernel") } {
        Ok(handle) => handle.inner.tau,
        Err(_) => f64::NAN,
    }
}

/// Canonical descriptor of the kernel, released with [`kil_string_free`].
///
/// # Safety
/// `kernel` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kil_kernel_descriptor(
    kernel: *const KilKernel,
    out: *mut *mut c_char,
) -> KilStatus {
    guarded(|| {
        let handle = match unsafe { required_ref(kernel, "kernel") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        unsafe { write_out(out, export_string(handle.inner.descriptor()), "out") }
    })
}

/// Evaluate `k(x, y)` for two points of the kernel's dimension.
///
/// # Safety
/// `x` and `y` must each point to `dim` doubles matching the kernel's
/// dimension; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kil_kernel_eval(
    kernel: *const KilKernel,
    x: *const f64,
    y: *const f64,
    dim: usize,
    out: *mut f64,
) -> KilStatus {
    guarded(|| {
        let handle = match unsafe { required_ref(kernel, "kernel") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        if dim != handle.inner.dim {
            set_error(format!(
                "point dimension {dim} does not match kernel dimension {}",
                handle.inner.dim
            ));
            return KilStatus::InvalidArgument;
        }
        let x = match unsafe { required_slice(x, dim, "x") } {
            Ok(slice) => slice,
            Err(status) => return status,
        };
        let y = match unsafe { required_slice(y, dim, "y") } {
            Ok(slice) => slice,
            Err(status) => return status,
        };
        unsafe { write_out(out, handle.inner.eval(x, y), "out") }
    })
}

// ---------------------------------------------------------------------------
// regions and grids
// ---------------------------------------------------------------------------

/// Opaque handle to a bounded evaluation region.
pub struct KilRegion {
    inner: Region,
}

/// Parse a region descriptor such as `"interval:0,1"` or `"disk:0,0,0.83"`.
///
/// # Safety
/// `descriptor` must be nul-terminated; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kil_region_parse(
    descriptor: *const c_char,
    out: *mut *mut KilRegion,
) -> KilStatus {
    guarded(|| {
        let descriptor = match unsafe { required_str(descriptor, "descriptor") } {
            Ok(text) => text,
            Err(status) => return status,
        };
        match Region::parse(descriptor) {
            Ok(region) => unsafe { write_out(out, boxed(KilRegion { inner: region }), "out") },
            Err(err) => fail(&err),
        }
    })
}

/// Release a region handle (null is ignored).
///
/// # Safety
/// `region` must come from [`kil_region_parse`] and be freed at most once.
#[no_mangle]
pub unsafe extern "C" fn kil_region_free(region: *mut KilRegion) {
    unsafe { free(region) }
}

/// Ambient dimension of the region, or 0 on null input.
///
/// # Safety
/// `region` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn kil_region_dimension(region: *const KilRegion) -> usize {
    match unsafe { required_ref(region, "region") } {
        Ok(handle) => handle.inner.dimension(),
        Err(_) => 0,
    }
}

/// Number of points in the level-`n` dyadic grid of the region.
///
/// # Safety
/// `region` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kil_grid_size(
    region: *const KilRegion,
    n: u32,
    out: *mut usize,
) -> KilStatus {
    guarded(|| {
        let handle = match unsafe { required_ref(region, "region") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        match geometry::grid_set(&handle.inner, n) {
            Ok(grid) => unsafe { write_out(out, grid.len(), "out") },
            Err(err) => fail(&err),
        }
    })
}

/// Fill `buffer` with the level-`n` grid in lexicographic order, flattened
/// point by point. `buffer_len` is the buffer's capacity in doubles and must
/// be at least `kil_grid_size(...) * dimension`.
///
/// # Safety
/// `region` must be a live handle; `buffer` must be valid for `buffer_len`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn kil_grid_fill(
    region: *const KilRegion,
    n: u32,
    buffer: *mut f64,
    buffer_len: usize,
) -> KilStatus {
    guarded(|| {
        let handle = match unsafe { required_ref(region, "region") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        let grid = match geometry::grid_set(&handle.inner, n) {
            Ok(grid) => grid,
            Err(err) => return fail(&err),
        };
        let needed = grid.len() * grid.dim();
        if buffer_len < needed {
            set_error(format!(
                "grid needs {needed} doubles but the buffer holds {buffer_len}"
            ));
            return KilStatus::InvalidArgument;
        }
        if buffer.is_null() {
            return null_pointer("buffer");
        }
        let out = unsafe { std::slice::from_raw_parts_mut(buffer, needed) };
        for (slot, coord) in out.iter_mut().zip(grid.iter().flatten()) {
            *slot = *coord;
        }
        KilStatus::Ok
    })
}

// ---------------------------------------------------------------------------
// interpolants
// ---------------------------------------------------------------------------

/// Opaque handle to a fitted kernel expansion.
pub struct KilInterpolant {
    inner: Interpolant,
}

/// Fit a kernel expansion through `num_points` centers of dimension `dim`
/// (flattened point by point in `centers`) matching `values`, with ridge
/// parameter `ridge` (`0` for plain interpolation).
///
/// # Safety
/// `kernel` must be a live handle; `centers` must hold `num_points * dim`
/// doubles; `values` must hold `num_points` doubles; `out` must be valid
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn kil_fit(
    kernel: *const KilKernel,
    centers: *const f64,
    num_points: usize,
    dim: usize,
    values: *const f64,
    ridge: f64,
    out: *mut *mut KilInterpolant,
) -> KilStatus {
    guarded(|| {
        let handle = match unsafe { required_ref(kernel, "kernel") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        let flat = match unsafe { required_slice(centers, num_points * dim, "centers") } {
            Ok(slice) => slice,
            Err(status) => return status,
        };
        let values = match unsafe { required_slice(values, num_points, "values") } {
            Ok(slice) => slice,
            Err(status) => return status,
        };
        let points = flat.chunks(dim.max(1)).map(<[f64]>::to_vec).collect();
        let centers = match PointSet::new(dim, points) {
            Ok(set) => set,
            Err(err) => return fail(&err),
        };
        match fit(&handle.inner, &centers, values, ridge) {
            Ok(interpolant) => unsafe {
                write_out(out, boxed(KilInterpolant { inner: interpolant }), "out")
            },
            Err(err) => fail(&err),
        }
    })
}

/// Release an interpolant handle (null is ignored).
///
/// # Safety
/// `interpolant` must come from a fitting or parsing call and be freed at
/// most once.
#[no_mangle]
pub unsafe extern "C" fn kil_interpolant_free(interpolant: *mut KilInterpolant) {
    unsafe { free(interpolant) }
}

/// Evaluate the expansion at a point of dimension `dim`.
///
/// # Safety
/// `interpolant` must be a live handle; `x` must hold `dim` doubles; `out`
/// must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kil_interpolant_value(
    interpolant: *const KilInterpolant,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> KilStatus {
    guarded(|| {
        let handle = match unsafe { required_ref(interpolant, "interpolant") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        if dim != handle.inner.kernel.dim {
            set_error(format!(
                "point dimension {dim} does not match the fitted dimension {}",
                handle.inner.kernel.dim
            ));
            return KilStatus::InvalidArgument;
        }
        let x = match unsafe { required_slice(x, dim, "x") } {
            Ok(slice) => slice,
            Err(status) => return status,
        };
        unsafe { write_out(out, handle.inner.value_at(x), "out") }
    })
}

/// Squared native-space norm of the expansion.
///
/// # Safety
/// `interpolant` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kil_interpolant_native_norm_sq(
    interpolant: *const KilInterpolant,
    out: *mut f64,
) -> KilStatus {
    guarded(|| {
        let handle = match unsafe { required_ref(interpolant, "interpolant") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        match handle.inner.native_norm_sq() {
            Ok(norm) => unsafe { write_out(out, norm, "out") },
            Err(err) => fail(&err),
        }
    })
}

/// Serialize the expansion to JSON, released with [`kil_string_free`].
/// The encoding round-trips bit for bit through [`kil_interpolant_from_json`].
///
/// # Safety
/// `interpolant` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kil_interpolant_to_json(
    interpolant: *const KilInterpolant,
    out: *mut *mut c_char,
) -> KilStatus {
    guarded(|| {
        let handle = match unsafe { required_ref(interpolant, "interpolant") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        unsafe { write_out(out, export_string(handle.inner.to_json()), "out") }
    })
}

/// Reconstruct an expansion serialized by [`kil_interpolant_to_json`].
///
/// # Safety
/// `json` must be nul-terminated; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kil_interpolant_from_json(
    json: *const c_char,
    out: *mut *mut KilInterpolant,
) -> KilStatus {
    guarded(|| {
        let json = match unsafe { required_str(json, "json") } {
            Ok(text) => text,
            Err(status) => return status,
        };
        match Interpolant::from_json(json) {
            Ok(interpolant) => unsafe {
                write_out(out, boxed(KilInterpolant { inner: interpolant }), "out")
            },
            Err(err) => fail(&err),
        }
    })
}

// ---------------------------------------------------------------------------
// spectral models
// ---------------------------------------------------------------------------

/// Opaque handle to a discretized kernel eigensystem on a region.
pub struct KilSpectralModel {
    inner: SpectralModel,
}

/// Default relative eigenvalue cutoff used by [`kil_spectral_build`].
#[no_mangle]
pub extern "C" fn kil_default_drop_tol() -> f64 {
    DEFAULT_DROP_TOL
}

/// Build the quadrature eigensystem of the kernel on the region at the given
/// quadrature level, dropping modes below `drop_tol` relative to the leading
/// eigenvalue (pass [`kil_default_drop_tol`] unless experimenting).
///
/// # Safety
/// `kernel` and `region` must be live handles; `out` must be valid for one
/// write.
#[no_mangle]
pub unsafe extern "C" fn kil_spectral_build(
    kernel: *const KilKernel,
    region: *const KilRegion,
    quad_level: u32,
    drop_tol: f64,
    out: *mut *mut KilSpectralModel,
) -> KilStatus {
    guarded(|| {
        let kernel = match unsafe { required_ref(kernel, "kernel") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        let region = match unsafe { required_ref(region, "region") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        match nystrom(&kernel.inner, &region.inner, quad_level, drop_tol) {
            Ok(model) => unsafe {
                write_out(out, boxed(KilSpectralModel { inner: model }), "out")
            },
            Err(err) => fail(&err),
        }
    })
}

/// Release a spectral-model handle (null is ignored).
///
/// # Safety
/// `model` must come from [`kil_spectral_build`] and be freed at most once.
#[no_mangle]
pub unsafe extern "C" fn kil_spectral_free(model: *mut KilSpectralModel) {
    unsafe { free(model) }
}

/// Number of retained eigenmodes, or 0 on null input.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn kil_spectral_num_modes(model: *const KilSpectralModel) -> usize {
    match unsafe { required_ref(model, "model") } {
        Ok(handle) => handle.inner.num_modes(),
        Err(_) => 0,
    }
}

/// Copy the retained eigenvalues (descending) into `buffer`; `buffer_len`
/// must be at least [`kil_spectral_num_modes`].
///
/// # Safety
/// `model` must be a live handle; `buffer` must be valid for `buffer_len`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn kil_spectral_eigenvalues(
    model: *const KilSpectralModel,
    buffer: *mut f64,
    buffer_len: usize,
) -> KilStatus {
    guarded(|| {
        let handle = match unsafe { required_ref(model, "model") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        let needed = handle.inner.num_modes();
        if buffer_len < needed {
            set_error(format!(
                "model holds {needed} eigenvalues but the buffer holds {buffer_len}"
            ));
            return KilStatus::InvalidArgument;
        }
        if buffer.is_null() {
            return null_pointer("buffer");
        }
        let out = unsafe { std::slice::from_raw_parts_mut(buffer, needed) };
        out.copy_from_slice(&handle.inner.eigenvalues);
        KilStatus::Ok
    })
}

/// Ratio of the power-scale norm of the expansion against the inverse-power
/// prediction `q^{-theta * tau} * |u|`, the quantity whose boundedness over
/// refinement the `bernstein` experiment tabulates.
///
/// # Safety
/// `model` and `interpolant` must be live handles; `out` must be valid for
/// one write.
#[no_mangle]
pub unsafe extern "C" fn kil_spectral_bernstein_ratio(
    model: *const KilSpectralModel,
    interpolant: *const KilInterpolant,
    theta: f64,
    separation: f64,
    out: *mut f64,
) -> KilStatus {
    guarded(|| {
        let model = match unsafe { required_ref(model, "model") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        let interpolant = match unsafe { required_ref(interpolant, "interpolant") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        match model
            .inner
            .bernstein_ratio(&interpolant.inner, theta, separation)
        {
            Ok(ratio) => unsafe { write_out(out, ratio, "out") },
            Err(err) => fail(&err),
        }
    })
}

// ---------------------------------------------------------------------------
// refinement studies
// ---------------------------------------------------------------------------

/// Convergence regime of a fitted refinement study.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KilRegime {
    /// Rate at or below the kernel smoothness.
    Escaping = 0,
    /// Rate between the kernel smoothness and its doubling.
    Superconvergence = 1,
    /// Rate above the doubled smoothness.
    Saturated = 2,
    /// Errors at rounding level on every grid; no rate was fitted.
    Exact = 3,
}

/// Fitted summary of a refinement study; `beta`, `standard_error`, and
/// `theta_hat` are NaN when `regime` is [`KilRegime::Exact`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KilRateSummary {
    /// Fitted log-log convergence rate.
    pub beta: f64,
    /// Standard error of the fitted rate.
    ///
    /// Named to avoid the `stderr` macro from `<stdio.h>`.
    pub standard_error: f64,
    /// Smoothness scale implied by the rate, capped at 2.
    pub theta_hat: f64,
    /// Regime classification of the rate.
    pub regime: KilRegime,
}

/// Run a grid-refinement study of the target over levels `n_min..=n_max`
/// and fit its convergence rate. `target` uses the same descriptors as the
/// command line (`"exp"`, `"abs-power:0.2,0.5"`, ...); quadrature for the
/// error integrals runs at level `n_max + quad_offset`.
///
/// # Safety
/// `kernel` and `region` must be live handles; `target` must be
/// nul-terminated; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kil_rate_study(
    kernel: *const KilKernel,
    region: *const KilRegion,
    target: *const c_char,
    n_min: u32,
    n_max: u32,
    ridge: f64,
    quad_offset: u32,
    out: *mut KilRateSummary,
) -> KilStatus {
    guarded(|| {
        let kernel = match unsafe { required_ref(kernel, "kernel") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        let region = match unsafe { required_ref(region, "region") } {
            Ok(handle) => handle,
            Err(status) => return status,
        };
        let descriptor = match unsafe { required_str(target, "target") } {
            Ok(text) => text,
            Err(status) => return status,
        };
        let target = match Target::parse(descriptor) {
            Ok(target) => target,
            Err(err) => return fail(&err),
        };
        let samples = match refinement_study(
            &target,
            &kernel.inner,
            &region.inner,
            n_min,
            n_max,
            ridge,
            quad_offset,
        ) {
            Ok(samples) => samples,
            Err(err) => return fail(&err),
        };
        let fit = match fit_rate(&samples, kernel.inner.tau) {
            Ok(fit) => fit,
            Err(err) => return fail(&err),
        };
        let summary = KilRateSummary {
            beta: fit.beta,
            standard_error: fit.stderr,
            theta_hat: fit.theta_hat,
            regime: match fit.regime {
                Regime::Escaping => KilRegime::Escaping,
                Regime::Superconvergence => KilRegime::Superconvergence,
                Regime::Saturated => KilRegime::Saturated,
                Regime::Exact => KilRegime::Exact,
            },
        };
        unsafe { write_out(out, summary, "out") }
    })
}
