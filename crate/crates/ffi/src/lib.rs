//! C ABI over the core library: opaque handles, status codes, and flat
//! buffers so other languages can bind the kernel machinery.
//!
//! Conventions:
//! - every fallible function returns a [`RecenterStatus`]; outputs go through
//!   pointers that are written only on `RECENTER_STATUS_OK`;
//! - complex matrices cross the boundary as interleaved `re, im` doubles in
//!   row-major order;
//! - phase-space labels cross as interleaved `p, q` doubles;
//! - the most recent error message is kept per thread and read back with
//!   [`recenter_last_error`].

use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use recenter::free_field;
use recenter::kernel;
use recenter::lattice::{FieldConfig, LatticeSpec};
use recenter::oscillator::{build_oscillator_rep, HamiltonianSpec, Label, OscillatorRep};
use recenter::Error;

/// Status codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecenterStatus {
    Ok = 0,
    /// A precondition on the inputs was violated.
    InvalidInput = 1,
    /// An eigensolve or another numerical routine failed.
    NumericalFailure = 2,
    /// The requested state leaks past the basis truncation.
    TruncationTooSmall = 3,
    /// A required pointer argument was null.
    NullPointer = 4,
    /// The library panicked; the state of outputs is unspecified.
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|slot| {
        let mut buf = slot.borrow_mut();
        buf.clear();
        buf.extend_from_slice(msg.as_bytes());
        buf.push(0);
    });
}

fn status_for(err: &Error) -> RecenterStatus {
    set_error(&err.to_string());
    match err {
        Error::InvalidInput(_) | Error::Config { .. } => RecenterStatus::InvalidInput,
        Error::Truncation { .. } => RecenterStatus::TruncationTooSmall,
        _ => RecenterStatus::NumericalFailure,
    }
}

fn guarded(f: impl FnOnce() -> RecenterStatus) -> RecenterStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            RecenterStatus::Panic
        }
    }
}

/// Copy the last error message on this thread into `buf` (NUL-terminated,
/// truncated to `cap` bytes). Returns the full message length including the
/// terminator, or 0 when no error has been recorded.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes, or be null.
#[no_mangle]
pub unsafe extern "C" fn recenter_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        if msg.is_empty() {
            return 0;
        }
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast(), n);
            // force termination even when truncated
            *buf.add(n - 1) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn recenter_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Closed-form coherent overlap `<p2,q2|p1,q1>` for fiducial width `omega0`.
///
/// # Safety
/// `out_re` and `out_im` must be valid writable pointers.
#[no_mangle]
pub unsafe extern "C" fn recenter_overlap_analytic(
    p2: f64,
    q2: f64,
    p1: f64,
    q1: f64,
    omega0: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RecenterStatus {
    if out_re.is_null() || out_im.is_null() {
        set_error("output pointers must not be null");
        return RecenterStatus::NullPointer;
    }
    if omega0 <= 0.0 {
        set_error("fiducial width must be positive");
        return RecenterStatus::InvalidInput;
    }
    let v = recenter::oscillator::overlap_analytic(p2, q2, p1, q1, omega0);
    *out_re = v.re;
    *out_im = v.im;
    RecenterStatus::Ok
}

/// Opaque truncated oscillator representation.
pub struct RecenterOscillator {
    rep: OscillatorRep,
}

/// Build a truncated representation with fiducial width `omega0` carrying
/// `H = (P^2 + omega^2 Q^2)/2 + quartic_g (a + a^dag)^4`.
///
/// On success `*out` owns the handle; release it with
/// [`recenter_oscillator_free`].
///
/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn recenter_oscillator_new(
    dim: usize,
    omega0: f64,
    omega: f64,
    quartic_g: f64,
    out: *mut *mut RecenterOscillator,
) -> RecenterStatus {
    if out.is_null() {
        set_error("output pointer must not be null");
        return RecenterStatus::NullPointer;
    }
    guarded(|| {
        let spec = if quartic_g == 0.0 {
            HamiltonianSpec::Quadratic {
                omega,
                ordered: false,
            }
        } else {
            HamiltonianSpec::Quartic {
                omega,
                g: quartic_g,
                ordered: false,
            }
        };
        match build_oscillator_rep(dim, omega0, spec) {
            Ok(rep) => {
                *out = Box::into_raw(Box::new(RecenterOscillator { rep }));
                RecenterStatus::Ok
            }
            Err(e) => status_for(&e),
        }
    })
}

/// Release a handle created by [`recenter_oscillator_new`]. Null is ignored.
///
/// # Safety
/// `handle` must be null or a pointer obtained from
/// [`recenter_oscillator_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn recenter_oscillator_free(handle: *mut RecenterOscillator) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Propagator matrix `<label_j| e^{-i dt H} |label_k>` over `n_labels`
/// phase-space labels (interleaved `p, q`). `out` receives `n_labels^2`
/// complex entries as interleaved `re, im`, row-major.
///
/// # Safety
/// `labels` must hold `2 * n_labels` doubles and `out` must have room for
/// `2 * n_labels * n_labels` doubles; `handle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn recenter_oscillator_propagator(
    handle: *const RecenterOscillator,
    dt: f64,
    labels: *const f64,
    n_labels: usize,
    out: *mut f64,
) -> RecenterStatus {
    if handle.is_null() || labels.is_null() || out.is_null() {
        set_error("handle, labels, and out must not be null");
        return RecenterStatus::NullPointer;
    }
    if n_labels == 0 {
        set_error("need at least one label");
        return RecenterStatus::InvalidInput;
    }
    guarded(|| {
        let raw = std::slice::from_raw_parts(labels, 2 * n_labels);
        let labels: Vec<Label> = raw
            .chunks_exact(2)
            .map(|c| Label::new(c[0], c[1]))
            .collect();
        let rep = &(*handle).rep;
        match rep.propagator_kernel(dt, &labels) {
            Ok(matrix) => {
                let sink = std::slice::from_raw_parts_mut(out, 2 * n_labels * n_labels);
                for j in 0..n_labels {
                    for k in 0..n_labels {
                        sink[2 * (j * n_labels + k)] = matrix[(j, k)].re;
                        sink[2 * (j * n_labels + k) + 1] = matrix[(j, k)].im;
                    }
                }
                RecenterStatus::Ok
            }
            Err(e) => status_for(&e),
        }
    })
}

/// Recenter the handle's Hamiltonian: write the unit-norm maximizer of the
/// damped overlap quotient into `coeffs` (`dim` doubles), its quotient into
/// `*quotient`, and its energy into `*energy`.
///
/// # Safety
/// `coeffs` must have room for the handle's dimension; `quotient` and
/// `energy` must be valid writable pointers; `handle` must be live.
#[no_mangle]
pub unsafe extern "C" fn recenter_oscillator_recenter(
    handle: *const RecenterOscillator,
    lambda: f64,
    coeffs: *mut f64,
    quotient: *mut f64,
    energy: *mut f64,
) -> RecenterStatus {
    if handle.is_null() || coeffs.is_null() || quotient.is_null() || energy.is_null() {
        set_error("handle and output pointers must not be null");
        return RecenterStatus::NullPointer;
    }
    guarded(|| {
        let rep = &(*handle).rep;
        match kernel::recenter(&rep.h_op, lambda) {
            Ok(fid) => {
                let sink = std::slice::from_raw_parts_mut(coeffs, rep.dim);
                for (slot, v) in sink.iter_mut().zip(fid.vector.iter()) {
                    *slot = *v;
                }
                *quotient = fid.quotient_achieved;
                *energy = fid.energy;
                RecenterStatus::Ok
            }
            Err(e) => status_for(&e),
        }
    })
}

/// Positive-semidefiniteness check of an `n x n` Hermitian matrix passed as
/// interleaved `re, im` doubles, row-major. Writes the smallest eigenvalue
/// and whether `min_eig >= -tol * max(1, ||G||)`.
///
/// # Safety
/// `entries` must hold `2 * n * n` doubles; `min_eig` and `pass` must be
/// valid writable pointers.
#[no_mangle]
pub unsafe extern "C" fn recenter_psd_check(
    entries: *const f64,
    n: usize,
    tol: f64,
    min_eig: *mut f64,
    pass: *mut bool,
) -> RecenterStatus {
    if entries.is_null() || min_eig.is_null() || pass.is_null() {
        set_error("entries and output pointers must not be null");
        return RecenterStatus::NullPointer;
    }
    if n == 0 {
        set_error("matrix must be at least 1 x 1");
        return RecenterStatus::InvalidInput;
    }
    guarded(|| {
        let raw = std::slice::from_raw_parts(entries, 2 * n * n);
        let matrix = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            recenter::C64::new(raw[2 * (i * n + j)], raw[2 * (i * n + j) + 1])
        });
        match kernel::psd_check(&matrix, tol) {
            Ok(report) => {
                *min_eig = report.min_eig;
                *pass = report.pass;
                RecenterStatus::Ok
            }
            Err(e) => status_for(&e),
        }
    })
}

/// Headline free-field number: recenter every mode of an `n`-site periodic
/// box (d = 1, length `l_box`) at fiducial width `m_width` and return the
/// worst deviation of the recentered kernel from the closed-form
/// relativistic kernel of mass `mass`, over `n_pairs` deterministic label
/// pairs at time separation `dt`.
///
/// # Safety
/// `max_dev` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn recenter_free_field_recovery_dev(
    n: usize,
    l_box: f64,
    mass: f64,
    m_width: f64,
    lambda: f64,
    dt: f64,
    d_base: usize,
    n_pairs: usize,
    max_dev: *mut f64,
) -> RecenterStatus {
    if max_dev.is_null() {
        set_error("max_dev must not be null");
        return RecenterStatus::NullPointer;
    }
    if n_pairs == 0 {
        set_error("need at least one label pair");
        return RecenterStatus::InvalidInput;
    }
    guarded(|| {
        let spec = match LatticeSpec::new(1, n, l_box) {
            Ok(s) => s,
            Err(e) => return status_for(&e),
        };
        // deterministic low-discrepancy labels keep the ABI seed-free
        let sites = spec.sites();
        let pairs: Vec<(FieldConfig, FieldConfig)> = (0..n_pairs)
            .map(|p| {
                let mk = |salt: usize| FieldConfig {
                    pi: (0..sites)
                        .map(|s| 0.3 * ((p * 7 + s * 3 + salt) as f64 * 0.7391).sin())
                        .collect(),
                    phi: (0..sites)
                        .map(|s| 0.3 * ((p * 5 + s * 11 + salt) as f64 * 0.3571).cos())
                        .collect(),
                };
                (mk(1), mk(2))
            })
            .collect();
        match free_field::recentered_kernel(sites, mass, m_width, lambda, dt, &pairs, &spec, d_base)
        {
            Ok(report) => {
                *max_dev = report.max_dev;
                RecenterStatus::Ok
            }
            Err(e) => status_for(&e),
        }
    })
}
