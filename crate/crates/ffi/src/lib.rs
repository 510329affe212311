//! C interface to msekit.
//!
//! Every function returns an [`MsekitStatus`]; on failure a message is kept per thread and
//! can be read with [`msekit_last_error`]. Objects cross the boundary as opaque handles that
//! the caller releases with the matching `*_free` function. Panics never unwind into C.

use msekit::cli::{parse_problem_str, run, CliError, ProblemSpec, RunOptions, RunReport};
use msekit::flatgeom::MultiDomain;
use msekit::geom::Vec2;
use msekit::msesolve::{solve_dirichlet, DiscreteSolution, SolverConfig};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsekitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// The problem JSON failed validation.
    Schema = 3,
    Io = 4,
    /// A pipeline stage (meshing, solving, conjugation, ...) failed.
    Stage = 5,
    /// Output buffer shorter than required; nothing was written.
    BufferTooSmall = 6,
    InvalidArgument = 7,
    Panic = 8,
}

/// A validated problem spec.
pub struct MsekitProblem(ProblemSpec);

/// The report of a finished run.
pub struct MsekitReport {
    report: RunReport,
    json: CString,
}

/// A triangulated planar domain.
pub struct MsekitDomain(MultiDomain);

/// A discrete minimal graph on a domain.
pub struct MsekitSolution(DiscreteSolution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("NULs were replaced"));
}

fn fail(status: MsekitStatus, msg: impl Into<String>) -> MsekitStatus {
    set_error(msg);
    status
}

fn cli_status(e: &CliError) -> MsekitStatus {
    match e {
        CliError::Schema { .. } => MsekitStatus::Schema,
        CliError::Io { .. } => MsekitStatus::Io,
        CliError::Stage { .. } => MsekitStatus::Stage,
    }
}

/// Run `f`, turning panics into [`MsekitStatus::Panic`].
fn guard(f: impl FnOnce() -> MsekitStatus) -> MsekitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == MsekitStatus::Ok {
                set_error("");
            }
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(MsekitStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, MsekitStatus> {
    if p.is_null() {
        return Err(fail(MsekitStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MsekitStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn boxed<T>(out: *mut *mut T, v: T) {
    unsafe { *out = Box::into_raw(Box::new(v)) };
}

/// Message for the last failed call on this thread; empty after a success. The pointer stays
/// valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn msekit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn msekit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse and validate a problem spec given as JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn msekit_problem_parse(json: *const c_char, out: *mut *mut MsekitProblem) -> MsekitStatus {
    guard(|| {
        if out.is_null() {
            return fail(MsekitStatus::NullPointer, "out is null");
        }
        let text = match str_arg(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_problem_str(text) {
            Ok(spec) => {
                boxed(out, MsekitProblem(spec));
                MsekitStatus::Ok
            }
            Err(e) => fail(cli_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `p` must come from [`msekit_problem_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn msekit_problem_free(p: *mut MsekitProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Run a problem, writing artifacts into `out_dir`.
///
/// # Safety
/// `problem` must be a live handle, `out_dir` a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn msekit_run(
    problem: *const MsekitProblem,
    out_dir: *const c_char,
    out: *mut *mut MsekitReport,
) -> MsekitStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            return fail(MsekitStatus::NullPointer, "problem or out is null");
        }
        let dir = match str_arg(out_dir, "out_dir") {
            Ok(d) => d,
            Err(s) => return s,
        };
        let opts = RunOptions {
            out: PathBuf::from(dir),
            seed: None,
        };
        match run(&(*problem).0, &opts) {
            Ok(report) => {
                let json = CString::new(report.to_json()).expect("JSON has no NUL");
                boxed(out, MsekitReport { report, json });
                MsekitStatus::Ok
            }
            Err(e) => fail(cli_status(&e), e.to_string()),
        }
    })
}

/// Whether every check in the report passed (1) or not (0).
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn msekit_report_passed(r: *const MsekitReport) -> i32 {
    if r.is_null() {
        return 0;
    }
    (*r).report.passed as i32
}

/// The report as JSON, owned by the handle.
///
/// # Safety
/// `r` must be a live handle; the string dies with it.
#[no_mangle]
pub unsafe extern "C" fn msekit_report_json(r: *const MsekitReport) -> *const c_char {
    if r.is_null() {
        return ptr::null();
    }
    (*r).json.as_ptr()
}

/// # Safety
/// `r` must come from [`msekit_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn msekit_report_free(r: *mut MsekitReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Axis-aligned rectangle `[x0, x0 + width] × [y0, y0 + height]` split into `nx × ny` cells.
/// Its arcs are `bottom`, `right`, `top`, `left`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn msekit_domain_rectangle(
    x0: f64,
    y0: f64,
    width: f64,
    height: f64,
    nx: usize,
    ny: usize,
    out: *mut *mut MsekitDomain,
) -> MsekitStatus {
    guard(|| {
        if out.is_null() {
            return fail(MsekitStatus::NullPointer, "out is null");
        }
        match MultiDomain::rectangle(Vec2::new(x0, y0), width, height, nx, ny) {
            Ok(d) => {
                boxed(out, MsekitDomain(d));
                MsekitStatus::Ok
            }
            Err(e) => fail(MsekitStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `d` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn msekit_domain_vertex_count(d: *const MsekitDomain) -> usize {
    if d.is_null() {
        return 0;
    }
    (*d).0.n_vertices()
}

/// Copy vertex positions as interleaved `x, y` pairs; `len` counts doubles.
///
/// # Safety
/// `d` must be a live handle and `xy` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn msekit_domain_positions(d: *const MsekitDomain, xy: *mut f64, len: usize) -> MsekitStatus {
    guard(|| {
        if d.is_null() || xy.is_null() {
            return fail(MsekitStatus::NullPointer, "domain or buffer is null");
        }
        let dom = &(*d).0;
        let need = 2 * dom.n_vertices();
        if len < need {
            return fail(MsekitStatus::BufferTooSmall, format!("need {need} doubles, got {len}"));
        }
        let buf = std::slice::from_raw_parts_mut(xy, need);
        for v in 0..dom.n_vertices() {
            let p = dom.position(v);
            buf[2 * v] = p.x;
            buf[2 * v + 1] = p.y;
        }
        MsekitStatus::Ok
    })
}

/// Whether vertex `v` lies on the boundary (1) or not (0); out-of-range vertices give 0.
///
/// # Safety
/// `d` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn msekit_domain_is_boundary(d: *const MsekitDomain, v: usize) -> i32 {
    if d.is_null() || v >= (*d).0.n_vertices() {
        return 0;
    }
    (*d).0.is_boundary(v) as i32
}

/// # Safety
/// `d` must come from a domain constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn msekit_domain_free(d: *mut MsekitDomain) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Solve the Dirichlet problem. `values` holds one entry per vertex; only boundary entries
/// are read. A non-positive `tol` selects the default tolerance.
///
/// # Safety
/// `d` must be a live handle, `values` point to `len` doubles and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn msekit_solve_dirichlet(
    d: *const MsekitDomain,
    values: *const f64,
    len: usize,
    tol: f64,
    out: *mut *mut MsekitSolution,
) -> MsekitStatus {
    guard(|| {
        if d.is_null() || values.is_null() || out.is_null() {
            return fail(MsekitStatus::NullPointer, "domain, values or out is null");
        }
        let dom = &(*d).0;
        if len != dom.n_vertices() {
            return fail(
                MsekitStatus::InvalidArgument,
                format!("{len} values for {} vertices", dom.n_vertices()),
            );
        }
        let vals = std::slice::from_raw_parts(values, len);
        let mut cfg = SolverConfig::default();
        if tol > 0.0 {
            cfg.tol = tol;
        }
        match solve_dirichlet(dom, vals, &cfg) {
            Ok(s) => {
                boxed(out, MsekitSolution(s));
                MsekitStatus::Ok
            }
            Err(e) => fail(MsekitStatus::Stage, e.to_string()),
        }
    })
}

/// Copy the vertex values of a solution; `len` must be at least the vertex count.
///
/// # Safety
/// `s` must be a live handle and `u` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn msekit_solution_values(s: *const MsekitSolution, u: *mut f64, len: usize) -> MsekitStatus {
    guard(|| {
        if s.is_null() || u.is_null() {
            return fail(MsekitStatus::NullPointer, "solution or buffer is null");
        }
        let vals = &(*s).0.u;
        if len < vals.len() {
            return fail(MsekitStatus::BufferTooSmall, format!("need {} doubles, got {len}", vals.len()));
        }
        std::slice::from_raw_parts_mut(u, vals.len()).copy_from_slice(vals);
        MsekitStatus::Ok
    })
}

/// Final Newton residual of a solution.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn msekit_solution_residual(s: *const MsekitSolution) -> f64 {
    if s.is_null() {
        return f64::NAN;
    }
    (*s).0.residual
}

/// # Safety
/// `s` must come from [`msekit_solve_dirichlet`] or be null.
#[no_mangle]
pub unsafe extern "C" fn msekit_solution_free(s: *mut MsekitSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
