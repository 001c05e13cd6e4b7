//! C ABI over the mpccip solvers.
//!
//! Problems are QPCCs built from caller arrays, which are copied at
//! construction. Handles are integer ids from a process-wide registry; ids
//! are never reused, so a released or unknown handle yields
//! [`MPCCIP_ERR_INVALID_HANDLE`] instead of undefined behaviour. Every
//! function returns an `MpccipCode`; on failure the message is available
//! from [`mpccip_last_error`] on the calling thread. Panics never cross the
//! boundary.
//!
//! A handle must not be used from two threads at once.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, LazyLock, Mutex, MutexGuard};

use mpccip::bench::{Matrix, QpccData, QPCC_FORMAT_VERSION};
use mpccip::crossover::solve_with_crossover;
use mpccip::ipm::Status;
use mpccip::penalty::solve_penalty;
use mpccip::relax::solve_relaxation;
use mpccip::{Algorithm, Options, SolveResult, SolverError};

pub type MpccipHandle = u64;
pub type MpccipCode = c_int;

pub const MPCCIP_OK: MpccipCode = 0;
/// The solve ran but ended without success; the result is still readable.
pub const MPCCIP_NOT_CONVERGED: MpccipCode = 1;
pub const MPCCIP_ERR_INVALID_ARGUMENT: MpccipCode = -1;
/// Inconsistent shapes, asymmetric `Q`, bad pairs.
pub const MPCCIP_ERR_INVALID_PROBLEM: MpccipCode = -2;
pub const MPCCIP_ERR_UNKNOWN_OPTION: MpccipCode = -3;
pub const MPCCIP_ERR_INVALID_OPTION_VALUE: MpccipCode = -4;
/// Unknown or already released handle.
pub const MPCCIP_ERR_INVALID_HANDLE: MpccipCode = -5;
/// No result yet: `mpccip_solve` has not run on this handle.
pub const MPCCIP_ERR_NO_RESULT: MpccipCode = -6;
pub const MPCCIP_ERR_SOLVER: MpccipCode = -7;
pub const MPCCIP_ERR_BUFFER_TOO_SMALL: MpccipCode = -8;
pub const MPCCIP_ERR_PANIC: MpccipCode = -99;

pub const MPCCIP_ALGORITHM_RELAXATION: c_int = 0;
pub const MPCCIP_ALGORITHM_PENALTY: c_int = 1;

pub const MPCCIP_STATUS_SUCCESS: c_int = 0;
pub const MPCCIP_STATUS_MAX_ITER: c_int = 1;
pub const MPCCIP_STATUS_RESTORATION_FAILED: c_int = 2;
pub const MPCCIP_STATUS_DIVERGED: c_int = 3;
pub const MPCCIP_STATUS_PENALTY_SATURATED: c_int = 4;
pub const MPCCIP_STATUS_STALLED: c_int = 5;
pub const MPCCIP_STATUS_FAILURE: c_int = 6;

/// Scalar fields of the last solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MpccipResult {
    /// One of the `MPCCIP_STATUS_*` values.
    pub status: c_int,
    pub objective: f64,
    pub kkt_error: f64,
    pub stationarity: f64,
    pub constraint_violation: f64,
    /// `‖X1 x2‖∞` at the solution.
    pub comp: f64,
    pub iterations: u64,
    pub factorizations: u64,
    pub restorations: u64,
    pub n: u64,
}

struct Entry {
    data: QpccData,
    options: Options,
    result: Option<SolveResult>,
}

struct Registry {
    next: AtomicU64,
    entries: Mutex<HashMap<u64, Arc<Mutex<Entry>>>>,
}

static REGISTRY: LazyLock<Registry> = LazyLock::new(|| Registry {
    next: AtomicU64::new(1),
    entries: Mutex::new(HashMap::new()),
});

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).expect("nul bytes removed"));
}

struct Fail(MpccipCode, String);

type Ret<T> = std::result::Result<T, Fail>;

fn fail<T>(code: MpccipCode, msg: impl Into<String>) -> Ret<T> {
    Err(Fail(code, msg.into()))
}

fn solver_code(e: &SolverError) -> MpccipCode {
    match e {
        SolverError::UnknownOption(_) => MPCCIP_ERR_UNKNOWN_OPTION,
        SolverError::InvalidOption { .. } => MPCCIP_ERR_INVALID_OPTION_VALUE,
        SolverError::Parse { .. } | SolverError::Dimension { .. } => MPCCIP_ERR_INVALID_PROBLEM,
        _ => MPCCIP_ERR_SOLVER,
    }
}

impl From<SolverError> for Fail {
    fn from(e: SolverError) -> Self {
        Fail(solver_code(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Ret<MpccipCode>) -> MpccipCode {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(code)) => code,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            MPCCIP_ERR_PANIC
        }
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

fn entry(h: MpccipHandle) -> Ret<Arc<Mutex<Entry>>> {
    match lock(&REGISTRY.entries).get(&h) {
        Some(e) => Ok(e.clone()),
        None => fail(MPCCIP_ERR_INVALID_HANDLE, format!("invalid or released handle {h}")),
    }
}

/// Copies `len` values; a null pointer is only accepted for `len == 0`.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Ret<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(MPCCIP_ERR_INVALID_ARGUMENT, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Bound array: null means all infinite; infinities mean "no bound".
unsafe fn bounds(p: *const f64, len: usize, what: &str) -> Ret<Vec<Option<f64>>> {
    if p.is_null() {
        return Ok(vec![None; len]);
    }
    let mut out = Vec::with_capacity(len);
    for (k, &v) in slice(p, len, what)?.iter().enumerate() {
        if v.is_nan() {
            return fail(MPCCIP_ERR_INVALID_PROBLEM, format!("{what}[{k}] is NaN"));
        }
        out.push(if v.is_infinite() { None } else { Some(v) });
    }
    Ok(out)
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Ret<&'a str> {
    if p.is_null() {
        return fail(MPCCIP_ERR_INVALID_ARGUMENT, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(MPCCIP_ERR_INVALID_ARGUMENT, format!("{what} is not UTF-8")))
}

fn dense(v: &[f64], rows: usize, cols: usize) -> Matrix {
    Matrix::Dense(v.chunks(cols.max(1)).take(rows).map(|r| r[..cols].to_vec()).collect())
}

#[allow(clippy::too_many_arguments)]
unsafe fn build(
    n: usize,
    q_matrix: Matrix,
    q: *const f64,
    constant: f64,
    m: usize,
    a: Option<Matrix>,
    lg: *const f64,
    ug: *const f64,
    lx: *const f64,
    ux: *const f64,
    n_cc: usize,
    pairs: *const u64,
    out: *mut MpccipHandle,
) -> Ret<MpccipCode> {
    if out.is_null() {
        return fail(MPCCIP_ERR_INVALID_ARGUMENT, "out_handle is null");
    }
    let pairs = slice(pairs, 2 * n_cc, "pairs")?;
    let data = QpccData {
        version: QPCC_FORMAT_VERSION,
        name: String::new(),
        n,
        q_matrix,
        q: slice(q, n, "q")?.to_vec(),
        constant,
        a,
        lg: bounds(lg, m, "lg")?,
        ug: bounds(ug, m, "ug")?,
        lx: bounds(lx, n, "lx")?,
        ux: bounds(ux, n, "ux")?,
        pairs: pairs.chunks(2).map(|p| (p[0] as usize, p[1] as usize)).collect(),
        x0: None,
    };
    data.validate().map_err(|e| Fail(MPCCIP_ERR_INVALID_PROBLEM, e.to_string()))?;
    let id = REGISTRY.next.fetch_add(1, Ordering::Relaxed);
    let e = Entry {
        data,
        options: Options::default(),
        result: None,
    };
    lock(&REGISTRY.entries).insert(id, Arc::new(Mutex::new(e)));
    *out = id;
    Ok(MPCCIP_OK)
}

/// Creates a QPCC `min ½xᵀQx + qᵀx + constant  s.t.  lg <= Ax <= ug,
/// lx <= x <= ux,  x[pairs[2k]] ⊥ x[pairs[2k+1]]` from dense row-major
/// arrays: `q_matrix` is `n×n` and symmetric, `a` is `m×n` (may be null when
/// `m == 0`). Bound arrays may be null (no bounds); infinite entries are
/// absent bounds. Both members of a pair need a finite lower bound.
///
/// # Safety
/// Every non-null pointer must reference at least the stated number of
/// elements; `out_handle` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mpccip_create_qpcc(
    n: usize,
    q_matrix: *const f64,
    q: *const f64,
    constant: f64,
    m: usize,
    a: *const f64,
    lg: *const f64,
    ug: *const f64,
    lx: *const f64,
    ux: *const f64,
    n_cc: usize,
    pairs: *const u64,
    out_handle: *mut MpccipHandle,
) -> MpccipCode {
    guard(|| {
        let qm = dense(slice(q_matrix, n * n, "q_matrix")?, n, n);
        let am = if m == 0 { None } else { Some(dense(slice(a, m * n, "a")?, m, n)) };
        build(n, qm, q, constant, m, am, lg, ug, lx, ux, n_cc, pairs, out_handle)
    })
}

/// Like [`mpccip_create_qpcc`] with `Q` and `A` in coordinate form
/// (`rows`, `cols`, `vals` of length `nnz`; duplicates sum).
///
/// # Safety
/// As for [`mpccip_create_qpcc`].
#[no_mangle]
pub unsafe extern "C" fn mpccip_create_qpcc_coo(
    n: usize,
    q_nnz: usize,
    q_rows: *const u64,
    q_cols: *const u64,
    q_vals: *const f64,
    q: *const f64,
    constant: f64,
    m: usize,
    a_nnz: usize,
    a_rows: *const u64,
    a_cols: *const u64,
    a_vals: *const f64,
    lg: *const f64,
    ug: *const f64,
    lx: *const f64,
    ux: *const f64,
    n_cc: usize,
    pairs: *const u64,
    out_handle: *mut MpccipHandle,
) -> MpccipCode {
    guard(|| {
        let coo = |nrows, nnz, r, c, v| -> Ret<Matrix> {
            let (r, c, v) = (slice(r, nnz, "rows")?, slice(c, nnz, "cols")?, slice(v, nnz, "vals")?);
            Ok(Matrix::Coo {
                nrows,
                ncols: n,
                entries: (0..nnz).map(|k| (r[k] as usize, c[k] as usize, v[k])).collect(),
            })
        };
        let qm = coo(n, q_nnz, q_rows, q_cols, q_vals)?;
        let am = if m == 0 { None } else { Some(coo(m, a_nnz, a_rows, a_cols, a_vals)?) };
        build(n, qm, q, constant, m, am, lg, ug, lx, ux, n_cc, pairs, out_handle)
    })
}

/// Releases a handle. Releasing twice reports an invalid handle.
#[no_mangle]
pub extern "C" fn mpccip_destroy(handle: MpccipHandle) -> MpccipCode {
    guard(|| match lock(&REGISTRY.entries).remove(&handle) {
        Some(_) => Ok(MPCCIP_OK),
        None => fail(MPCCIP_ERR_INVALID_HANDLE, format!("invalid or released handle {handle}")),
    })
}

/// Sets the initial point, in the order the variables were given; `len`
/// must equal `n`. Without one the solver picks its default start.
///
/// # Safety
/// `x` must reference `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mpccip_set_initial_point(handle: MpccipHandle, x: *const f64, len: usize) -> MpccipCode {
    guard(|| {
        let e = entry(handle)?;
        let mut e = lock(&e);
        if len != e.data.n {
            return fail(MPCCIP_ERR_INVALID_ARGUMENT, format!("expected {} entries, got {len}", e.data.n));
        }
        let x = slice(x, len, "x")?;
        if x.iter().any(|v| !v.is_finite()) {
            return fail(MPCCIP_ERR_INVALID_ARGUMENT, "initial point must be finite");
        }
        e.data.x0 = Some(x.to_vec());
        Ok(MPCCIP_OK)
    })
}

/// Sets option `key` to `value`, as the command line's `--set key=value`.
///
/// # Safety
/// `key` and `value` must be nul-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn mpccip_set_option(handle: MpccipHandle, key: *const c_char, value: *const c_char) -> MpccipCode {
    guard(|| {
        let (key, value) = (str_arg(key, "key")?, str_arg(value, "value")?);
        let e = entry(handle)?;
        lock(&e).options.set(key, value)?;
        Ok(MPCCIP_OK)
    })
}

/// Solves with `algorithm` (`MPCCIP_ALGORITHM_*`), followed by crossover
/// when `crossover` is non-zero. Returns [`MPCCIP_OK`] on success and
/// [`MPCCIP_NOT_CONVERGED`] when the solver stopped otherwise; either way
/// the result can be read afterwards.
#[no_mangle]
pub extern "C" fn mpccip_solve(handle: MpccipHandle, algorithm: c_int, crossover: c_int) -> MpccipCode {
    guard(|| {
        let alg = match algorithm {
            MPCCIP_ALGORITHM_RELAXATION => Algorithm::Relaxation,
            MPCCIP_ALGORITHM_PENALTY => Algorithm::Penalty,
            other => return fail(MPCCIP_ERR_INVALID_ARGUMENT, format!("unknown algorithm {other}")),
        };
        let e = entry(handle)?;
        let mut e = lock(&e);
        let problem = e.data.to_problem()?;
        let r = if crossover != 0 {
            solve_with_crossover(&problem, alg, &e.options)?.1.result
        } else {
            match alg {
                Algorithm::Relaxation => solve_relaxation(&problem, &e.options)?,
                Algorithm::Penalty => solve_penalty(&problem, &e.options)?,
            }
        };
        let code = if r.status == Status::Success {
            MPCCIP_OK
        } else {
            set_error(r.message.clone().unwrap_or_else(|| format!("solver stopped with status {}", r.status)));
            MPCCIP_NOT_CONVERGED
        };
        e.result = Some(r);
        Ok(code)
    })
}

fn status_code(s: Status) -> c_int {
    match s {
        Status::Success => MPCCIP_STATUS_SUCCESS,
        Status::MaxIter => MPCCIP_STATUS_MAX_ITER,
        Status::RestorationFailed => MPCCIP_STATUS_RESTORATION_FAILED,
        Status::Diverged => MPCCIP_STATUS_DIVERGED,
        Status::PenaltySaturated => MPCCIP_STATUS_PENALTY_SATURATED,
        Status::Stalled => MPCCIP_STATUS_STALLED,
        Status::Failure => MPCCIP_STATUS_FAILURE,
    }
}

/// Copies the scalar fields of the last solve into `out`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mpccip_get_result(handle: MpccipHandle, out: *mut MpccipResult) -> MpccipCode {
    guard(|| {
        if out.is_null() {
            return fail(MPCCIP_ERR_INVALID_ARGUMENT, "out is null");
        }
        let e = entry(handle)?;
        let e = lock(&e);
        let Some(r) = &e.result else {
            return fail(MPCCIP_ERR_NO_RESULT, "no solve has run on this handle");
        };
        *out = MpccipResult {
            status: status_code(r.status),
            objective: r.objective,
            kkt_error: r.report.overall,
            stationarity: r.report.stationarity,
            constraint_violation: r.report.constraint_violation,
            comp: r.comp_residual,
            iterations: r.iterations as u64,
            factorizations: r.factorizations as u64,
            restorations: r.restorations as u64,
            n: e.data.n as u64,
        };
        Ok(MPCCIP_OK)
    })
}

/// Copies the solution, in the order the variables were given, into
/// `x[0..len]`; `len` must be at least `n`.
///
/// # Safety
/// `x` must reference `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mpccip_get_x(handle: MpccipHandle, x: *mut f64, len: usize) -> MpccipCode {
    guard(|| {
        let e = entry(handle)?;
        let e = lock(&e);
        let Some(r) = &e.result else {
            return fail(MPCCIP_ERR_NO_RESULT, "no solve has run on this handle");
        };
        let n = e.data.n;
        if len < n {
            return fail(MPCCIP_ERR_BUFFER_TOO_SMALL, format!("need {n} entries, got {len}"));
        }
        if x.is_null() {
            return fail(MPCCIP_ERR_INVALID_ARGUMENT, "x is null");
        }
        let xf = e.data.to_file_order(&r.x);
        std::slice::from_raw_parts_mut(x, n).copy_from_slice(&xf);
        Ok(MPCCIP_OK)
    })
}

/// Message of the last failed call on this thread (empty if none). The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mpccip_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mpccip_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_out_handle_is_rejected() {
        let qm = [2.0];
        let q = [0.0];
        let code = unsafe {
            mpccip_create_qpcc(1, qm.as_ptr(), q.as_ptr(), 0.0, 0, std::ptr::null(), std::ptr::null(), std::ptr::null(),
                std::ptr::null(), std::ptr::null(), 0, std::ptr::null(), std::ptr::null_mut())
        };
        assert_eq!(code, MPCCIP_ERR_INVALID_ARGUMENT);
        let msg = unsafe { CStr::from_ptr(mpccip_last_error()) };
        assert!(msg.to_str().unwrap().contains("out_handle"));
    }

    #[test]
    fn status_codes_are_distinct() {
        let all = [
            Status::Success,
            Status::MaxIter,
            Status::RestorationFailed,
            Status::Diverged,
            Status::PenaltySaturated,
            Status::Stalled,
            Status::Failure,
        ];
        let mut codes: Vec<c_int> = all.iter().map(|&s| status_code(s)).collect();
        codes.dedup();
        assert_eq!(codes, (0..7).collect::<Vec<_>>());
    }
}
