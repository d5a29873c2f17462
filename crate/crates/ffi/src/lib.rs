//! C interface. Digraphs are opaque handles; every call returns a
//! [`CrankStatus`] and, on failure, leaves a message for
//! [`crank_last_error_message`]. Strings handed out must be released with
//! [`crank_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crank::cert::{verify_certificate, Certificate, Payload};
use crank::coloring::wcol_inf;
use crank::cycle_rank::cycle_rank;
use crank::families::{cycle_chain, cylindrical_grid, ladder, tree_chain};
use crank::graph::circumference;
use crank::io::{parse_digraph, serialize_digraph};
use crank::search::{find_model, SearchOutcome};
use crank::Digraph;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrankStatus {
    Ok = 0,
    NotContained = 1,
    InvalidArgument = 2,
    Indeterminate = 3,
    ParseError = 4,
    LimitExceeded = 5,
    InvalidCertificate = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrankFamily {
    Ladder = 0,
    CycleChain = 1,
    TreeChain = 2,
    CylindricalGrid = 3,
}

/// Opaque digraph handle.
pub struct CrankDigraph {
    graph: Digraph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CrankStatus, msg: impl Into<String>) -> CrankStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> CrankStatus) -> CrankStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(CrankStatus::Panic, "internal panic"))
}

unsafe fn graph_ref<'a>(g: *const CrankDigraph) -> Option<&'a Digraph> {
    g.as_ref().map(|h| &h.graph)
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, CrankStatus> {
    if s.is_null() {
        return Err(fail(CrankStatus::InvalidArgument, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(CrankStatus::InvalidArgument, "string is not UTF-8"))
}

unsafe fn give_string(out: *mut *mut c_char, s: String) {
    if !out.is_null() {
        *out = CString::new(s).map_or(ptr::null_mut(), CString::into_raw);
    }
}

fn give_graph(out: *mut *mut CrankDigraph, graph: Digraph) {
    unsafe { *out = Box::into_raw(Box::new(CrankDigraph { graph })) };
}

/// Parses edge-list text into a new handle stored in `*out`.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crank_digraph_parse(text: *const c_char, out: *mut *mut CrankDigraph) -> CrankStatus {
    guard(|| {
        if out.is_null() {
            return fail(CrankStatus::InvalidArgument, "null output pointer");
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_digraph(text) {
            Ok(p) => {
                give_graph(out, p.graph);
                CrankStatus::Ok
            }
            Err(e) => fail(CrankStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `g` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crank_digraph_free(g: *mut CrankDigraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crank_digraph_vertex_count(g: *const CrankDigraph) -> usize {
    graph_ref(g).map_or(0, Digraph::n)
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crank_digraph_edge_count(g: *const CrankDigraph) -> usize {
    graph_ref(g).map_or(0, Digraph::m)
}

/// Edge-list text of the digraph.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crank_digraph_to_edgelist(g: *const CrankDigraph, out: *mut *mut c_char) -> CrankStatus {
    guard(|| match graph_ref(g) {
        Some(g) if !out.is_null() => {
            give_string(out, serialize_digraph(g));
            CrankStatus::Ok
        }
        _ => fail(CrankStatus::InvalidArgument, "null argument"),
    })
}

/// Cycle rank into `*rank`. When `cert_out` is non-null it receives the
/// certificate as JSON.
///
/// # Safety
/// `g` must be a live handle, `rank` valid, `cert_out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn crank_cycle_rank(
    g: *const CrankDigraph,
    rank: *mut usize,
    cert_out: *mut *mut c_char,
) -> CrankStatus {
    guard(|| {
        let (Some(g), false) = (graph_ref(g), rank.is_null()) else {
            return fail(CrankStatus::InvalidArgument, "null argument");
        };
        match cycle_rank(g) {
            Ok(cr) => {
                *rank = cr.rank;
                let c = Certificate::new(g, Payload::CrDecomposition { rank: cr.rank, decomposition: cr.decomposition });
                give_string(cert_out, c.to_json());
                CrankStatus::Ok
            }
            Err(e) => fail(CrankStatus::LimitExceeded, e.to_string()),
        }
    })
}

/// Length of a longest directed cycle, 0 when acyclic.
///
/// # Safety
/// `g` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn crank_circumference(g: *const CrankDigraph, out: *mut usize) -> CrankStatus {
    guard(|| match graph_ref(g) {
        Some(g) if !out.is_null() => {
            *out = circumference(g);
            CrankStatus::Ok
        }
        _ => fail(CrankStatus::InvalidArgument, "null argument"),
    })
}

/// Weak infinite coloring number.
///
/// # Safety
/// `g` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn crank_wcol_inf(g: *const CrankDigraph, out: *mut usize) -> CrankStatus {
    guard(|| match graph_ref(g) {
        Some(g) if !out.is_null() => match wcol_inf(g) {
            Ok(v) => {
                *out = v;
                CrankStatus::Ok
            }
            Err(e) => fail(CrankStatus::LimitExceeded, e.to_string()),
        },
        _ => fail(CrankStatus::InvalidArgument, "null argument"),
    })
}

/// A new handle holding the member of `family` of the given order.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crank_generate(family: CrankFamily, order: usize, out: *mut *mut CrankDigraph) -> CrankStatus {
    guard(|| {
        if out.is_null() {
            return fail(CrankStatus::InvalidArgument, "null output pointer");
        }
        let g = match family {
            CrankFamily::Ladder => ladder(order),
            CrankFamily::CycleChain => cycle_chain(order).map(|t| t.graph),
            CrankFamily::TreeChain => tree_chain(order).map(|t| t.graph),
            CrankFamily::CylindricalGrid => cylindrical_grid(order),
        };
        match g {
            Ok(g) => {
                give_graph(out, g);
                CrankStatus::Ok
            }
            Err(e) => fail(CrankStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Searches for a butterfly minor model of `pattern` in `host`. Returns
/// `Ok` when found (writing the model certificate to `model_out` if
/// non-null), `NotContained`, or `Indeterminate` when the budget ran out.
///
/// # Safety
/// `pattern` and `host` must be live handles, `model_out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn crank_find_model(
    pattern: *const CrankDigraph,
    host: *const CrankDigraph,
    budget: u64,
    model_out: *mut *mut c_char,
) -> CrankStatus {
    guard(|| {
        let (Some(h), Some(g)) = (graph_ref(pattern), graph_ref(host)) else {
            return fail(CrankStatus::InvalidArgument, "null argument");
        };
        match find_model(h, g, budget) {
            SearchOutcome::Found(mu) => {
                let c = Certificate::new(g, Payload::BfModel { pattern: h.clone(), model: mu });
                give_string(model_out, c.to_json());
                CrankStatus::Ok
            }
            SearchOutcome::NotContained => CrankStatus::NotContained,
            SearchOutcome::Indeterminate => CrankStatus::Indeterminate,
        }
    })
}

/// Verifies a JSON certificate against `g`. Returns `Ok` when it holds and
/// `InvalidCertificate` otherwise, with the reason in the last error.
///
/// # Safety
/// `g` must be a live handle and `cert_json` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn crank_verify_certificate(g: *const CrankDigraph, cert_json: *const c_char) -> CrankStatus {
    guard(|| {
        let Some(g) = graph_ref(g) else {
            return fail(CrankStatus::InvalidArgument, "null handle");
        };
        let text = match read_str(cert_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let cert = match Certificate::from_json(text) {
            Ok(c) => c,
            Err(e) => return fail(CrankStatus::ParseError, e.to_string()),
        };
        let v = verify_certificate(g, &cert);
        if v.valid {
            CrankStatus::Ok
        } else {
            fail(CrankStatus::InvalidCertificate, v.detail)
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crank_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn crank_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
