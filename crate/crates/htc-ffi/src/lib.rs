//! C ABI for the half-trek identifiability library.
//!
//! Graphs travel as opaque handles created from the textual graph format;
//! analysis results come back as JSON strings allocated by Rust. Every
//! string returned by this library must be released with
//! [`htc_string_free`], every graph with [`htc_graph_free`]. Functions
//! returning a status use 0 for success and the library's stable error
//! codes otherwise (1 parse, 2 capability, 3 numerical nongenericity,
//! 4 invalid argument); the last error message is kept per thread and
//! retrievable via [`htc_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};

use htc_core::gcrit::gc_identifiable;
use htc_core::htc::{classify, classify_via_decomposition};
use htc_core::{Error, MixedGraph};

/// Opaque mixed-graph handle.
pub struct HtcGraph {
    inner: MixedGraph,
}

pub const HTC_OK: c_int = 0;
pub const HTC_ERR_PARSE: c_int = 1;
pub const HTC_ERR_CAPABILITY: c_int = 2;
pub const HTC_ERR_NONGENERIC: c_int = 3;
pub const HTC_ERR_ARGUMENT: c_int = 4;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let cstring = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn code_of(err: &Error) -> c_int {
    err.exit_code() as c_int
}

fn to_owned_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// Parses the textual graph format into a new handle stored in `out`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer;
/// on success the caller owns the handle and must release it with
/// [`htc_graph_free`].
#[no_mangle]
pub unsafe extern "C" fn htc_graph_parse(text: *const c_char, out: *mut *mut HtcGraph) -> c_int {
    if text.is_null() || out.is_null() {
        set_error("null argument".into());
        return HTC_ERR_ARGUMENT;
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("graph text is not valid UTF-8".into());
            return HTC_ERR_ARGUMENT;
        }
    };
    match MixedGraph::parse(text) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(HtcGraph { inner }));
            HTC_OK
        }
        Err(e) => {
            set_error(e.to_string());
            code_of(&e)
        }
    }
}

/// Releases a graph handle. Null is a no-op.
///
/// # Safety
/// `graph` must be null or a handle returned by [`htc_graph_parse`] that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn htc_graph_free(graph: *mut HtcGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Number of nodes, or -1 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle from [`htc_graph_parse`].
#[no_mangle]
pub unsafe extern "C" fn htc_graph_node_count(graph: *const HtcGraph) -> c_int {
    match graph.as_ref() {
        Some(g) => g.inner.node_count() as c_int,
        None => -1,
    }
}

/// Classifies the graph and returns the JSON classification record
/// (`verdict`, `solved_nodes`, `witness`). Null on error.
///
/// # Safety
/// `graph` must be a live handle from [`htc_graph_parse`]. The returned
/// string must be released with [`htc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn htc_classify_json(graph: *const HtcGraph) -> *mut c_char {
    let Some(g) = graph.as_ref() else {
        set_error("null graph handle".into());
        return std::ptr::null_mut();
    };
    to_owned_c_string(classify(&g.inner).to_json().to_string())
}

/// Classifies the graph together with its mixed components (acyclic graphs
/// only) and returns the JSON record extended with a `decomposition` field.
/// Null on error (for instance on cyclic input).
///
/// # Safety
/// As for [`htc_classify_json`].
#[no_mangle]
pub unsafe extern "C" fn htc_classify_decomposed_json(graph: *const HtcGraph) -> *mut c_char {
    let Some(g) = graph.as_ref() else {
        set_error("null graph handle".into());
        return std::ptr::null_mut();
    };
    let mut record = classify(&g.inner).to_json();
    let report = match classify_via_decomposition(&g.inner) {
        Ok(report) => report,
        Err(e) => {
            set_error(e.to_string());
            return std::ptr::null_mut();
        }
    };
    let components: Vec<serde_json::Value> = report
        .components
        .iter()
        .map(|(comp, c)| {
            serde_json::json!({
                "nodes": comp.nodes.iter().map(|v| v.index()).collect::<Vec<_>>(),
                "core": comp.core.iter().map(|v| v.index()).collect::<Vec<_>>(),
                "verdict": c.kind().as_str(),
                "solved_nodes": c
                    .solved_nodes
                    .iter()
                    .map(|v| comp.origin(*v).index())
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    record["decomposition"] = serde_json::json!({
        "combined": report.combined.as_str(),
        "components": components,
    });
    to_owned_c_string(record.to_string())
}

/// Runs the G-criterion check: 1 identifiable, 0 not, negative error code
/// otherwise (cyclic input or more than 7 nodes).
///
/// # Safety
/// `graph` must be a live handle from [`htc_graph_parse`].
#[no_mangle]
pub unsafe extern "C" fn htc_gc_identifiable(graph: *const HtcGraph) -> c_int {
    let Some(g) = graph.as_ref() else {
        set_error("null graph handle".into());
        return -HTC_ERR_ARGUMENT;
    };
    match gc_identifiable(&g.inner) {
        Ok((ok, _)) => c_int::from(ok),
        Err(e) => {
            set_error(e.to_string());
            -code_of(&e)
        }
    }
}

/// Returns the calling thread's last error message, or null if none was
/// recorded. The caller owns the string.
///
/// # Safety
/// The returned string must be released with [`htc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn htc_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Releases a string allocated by this library. Null is a no-op.
///
/// # Safety
/// `s` must be null or a string returned by this library that has not been
/// freed yet.
#[no_mangle]
pub unsafe extern "C" fn htc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
