//! C interface to `descent`. Objects cross the boundary as opaque handles
//! that the caller frees with the matching `*_free` function. Every fallible
//! call returns a `DescentStatus`; on failure `descent_last_error` describes
//! the error. Strings returned through out-parameters are owned by the caller
//! and released with `descent_string_free`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use descent::{Error, ExpansionSystem, IsoOutcome, KOutcome, LayeredDigraph, Status};
use libc::{c_char, size_t};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Input text was not UTF-8 or not a valid document.
    Parse = 2,
    /// An argument was outside the operation's domain.
    InvalidArgument = 3,
    /// The input does not satisfy the operation's precondition.
    Precondition = 4,
    /// The truncation is too shallow to decide.
    InsufficientDepth = 5,
    /// An internal consistency check failed.
    Invariant = 6,
    /// Any other library error.
    Other = 7,
    /// A panic was caught at the boundary.
    Panic = 8,
}

/// Outcome of a property check.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentVerdict {
    Pass = 0,
    Fail = 1,
    Inconclusive = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentProperty {
    G0 = 0,
    G1 = 1,
    G2 = 2,
    P2 = 3,
    P2Prime = 4,
    P3 = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentIso {
    Isomorphic = 0,
    NotIsomorphic = 1,
    InsufficientDepth = 2,
}

/// An expansion system.
pub struct DescentSystem(ExpansionSystem);

/// A finite layered digraph (a truncation).
pub struct DescentGraph(LayeredDigraph);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DescentStatus {
    match e.root() {
        Error::Parse { .. } => DescentStatus::Parse,
        Error::InvalidArgument(_) | Error::UnknownVertex(_) | Error::IncompatiblePin(..) => {
            DescentStatus::InvalidArgument
        }
        Error::Precondition(_) => DescentStatus::Precondition,
        Error::InsufficientDepth(_) => DescentStatus::InsufficientDepth,
        Error::Invariant(_) => DescentStatus::Invariant,
        _ => DescentStatus::Other,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (DescentStatus, String)>) -> DescentStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DescentStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside descent");
            DescentStatus::Panic
        }
    }
}

fn lib(e: Error) -> (DescentStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (DescentStatus, String) {
    (DescentStatus::NullArgument, format!("{what} is null"))
}

unsafe fn utf8<'a>(p: *const c_char) -> Result<&'a str, (DescentStatus, String)> {
    if p.is_null() {
        return Err(null("text"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (DescentStatus::Parse, "text is not UTF-8".into()))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), (DescentStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (DescentStatus, String)> {
    let c = CString::new(s).map_err(|_| (DescentStatus::Invariant, "string holds a NUL".to_string()))?;
    put(out, c.into_raw())
}

unsafe fn graph<'a>(g: *const DescentGraph) -> Result<&'a LayeredDigraph, (DescentStatus, String)> {
    g.as_ref().map(|g| &g.0).ok_or_else(|| null("graph"))
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn descent_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn descent_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses EXS text into a new system.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn descent_system_parse(text: *const c_char, out: *mut *mut DescentSystem) -> DescentStatus {
    guard(|| {
        let sys = descent::parse_exs(utf8(text)?).map_err(lib)?;
        put(out, Box::into_raw(Box::new(DescentSystem(sys))))
    })
}

/// The directed `m`-ary tree (`ladder == 0`) or the `m`-ladder (`ladder != 0`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn descent_system_builtin(m: size_t, ladder: i32, out: *mut *mut DescentSystem) -> DescentStatus {
    guard(|| {
        let sys = if ladder != 0 { descent::ladder_system(m) } else { descent::tree_system(m) }.map_err(lib)?;
        put(out, Box::into_raw(Box::new(DescentSystem(sys))))
    })
}

/// # Safety
/// `sys` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn descent_system_free(sys: *mut DescentSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Expands `sys` to `depth` levels.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn descent_system_expand(
    sys: *const DescentSystem,
    depth: size_t,
    out: *mut *mut DescentGraph,
) -> DescentStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| null("system"))?;
        let g = sys.0.expand(depth).map_err(lib)?;
        put(out, Box::into_raw(Box::new(DescentGraph(g))))
    })
}

/// Parses LDG text into a new graph.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn descent_graph_parse(text: *const c_char, out: *mut *mut DescentGraph) -> DescentStatus {
    guard(|| {
        let g = descent::parse_ldg(utf8(text)?).map_err(lib)?;
        put(out, Box::into_raw(Box::new(DescentGraph(g))))
    })
}

/// # Safety
/// `g` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn descent_graph_free(g: *mut DescentGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of vertices; 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn descent_graph_vertex_count(g: *const DescentGraph) -> size_t {
    g.as_ref().map_or(0, |g| g.0.vertex_count())
}

/// Depth (index of the last level); 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn descent_graph_depth(g: *const DescentGraph) -> size_t {
    g.as_ref().map_or(0, |g| g.0.depth())
}

/// Writes the graph as LDG text.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn descent_graph_write(g: *const DescentGraph, out: *mut *mut c_char) -> DescentStatus {
    guard(|| put_string(out, descent::write_ldg(graph(g)?)))
}

/// Checks one property on the truncation.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn descent_check(
    g: *const DescentGraph,
    property: DescentProperty,
    out: *mut DescentVerdict,
) -> DescentStatus {
    guard(|| {
        let g = graph(g)?;
        let v = match property {
            DescentProperty::G0 => Ok(descent::check_g0(g)),
            DescentProperty::G1 => descent::check_g1(g),
            DescentProperty::G2 => descent::check_g2(g),
            DescentProperty::P2 => descent::check_p2(g),
            DescentProperty::P2Prime => descent::check_p2_prime(g),
            DescentProperty::P3 => descent::check_p3(g),
        }
        .map_err(lib)?;
        let verdict = match v.status {
            Status::Pass => DescentVerdict::Pass,
            Status::Fail => DescentVerdict::Fail,
            Status::Inconclusive => DescentVerdict::Inconclusive,
        };
        put(out, verdict)
    })
}

/// The stabilisation constant k. Returns `DESCENT_STATUS_PRECONDITION` when
/// the truncation refutes stabilisation.
///
/// # Safety
/// `g` must be a live handle; `k` must be writable.
#[no_mangle]
pub unsafe extern "C" fn descent_compute_k(g: *const DescentGraph, k: *mut size_t) -> DescentStatus {
    guard(|| match descent::compute_k(graph(g)?).map_err(lib)? {
        KOutcome::Found(r) => put(k, r.k),
        KOutcome::Refuted(v) => Err((
            DescentStatus::Precondition,
            format!("k refuted: {}", v.witness.map(|w| w.to_string()).unwrap_or_default()),
        )),
    })
}

/// The fingerprint text: a `k=.. N=.. M=..` line followed by the canonical
/// LDG of the depth-M truncation.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn descent_fingerprint(g: *const DescentGraph, out: *mut *mut c_char) -> DescentStatus {
    guard(|| {
        let f = descent::compute_m(graph(g)?).map_err(lib)?;
        put_string(out, f.to_string())
    })
}

/// Decides whether two truncations come from isomorphic digraphs.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn descent_decide_iso(
    a: *const DescentGraph,
    b: *const DescentGraph,
    out: *mut DescentIso,
) -> DescentStatus {
    guard(|| {
        let d = descent::decide_iso(graph(a)?, graph(b)?).map_err(lib)?;
        put(
            out,
            match d.outcome {
                IsoOutcome::Isomorphic => DescentIso::Isomorphic,
                IsoOutcome::NotIsomorphic => DescentIso::NotIsomorphic,
                IsoOutcome::InsufficientDepth => DescentIso::InsufficientDepth,
            },
        )
    })
}
