// SPDX-License-Identifier: Apache-2.0

//! C ABI for the sfrviz engine.
//!
//! Objects are opaque handles created by `*_load`, `*_render` and
//! `sfrviz_number` and released with the matching `*_free`. Every call
//! returns an `SfrvizStatus`; on failure `sfrviz_last_error` gives a
//! message for the calling thread. Strings returned through out-parameters
//! are owned by the caller and released with `sfrviz_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sfrviz_core::svg::render_svg;
use sfrviz_core::{
    default_view, load_graph, number, render_view, sfr_number, GraphWarning, LayoutExport, NodeId,
    OrderedDigraph, RenderedView, SfrResult, Traversal, ViewState,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SfrvizStatus {
    Ok = 0,
    NullPointer = 1,
    MalformedGraph = 2,
    InvalidGroup = 3,
    NotFound = 4,
    Unreachable = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SfrvizTraversal {
    Sfr = 0,
    Dfs = 1,
}

/// Placement and scoring of one visible node.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SfrvizCell {
    pub sfr: u32,
    pub lane: u32,
    pub depth: u32,
    pub width: u32,
    pub score: u32,
    pub x: f64,
    pub y: f64,
}

/// A loaded control-flow graph.
pub struct SfrvizGraph {
    graph: OrderedDigraph,
    warnings: Vec<GraphWarning>,
}

/// A node numbering of a graph.
pub struct SfrvizNumbering {
    numbering: SfrResult,
}

/// A rendered view of a graph.
pub struct SfrvizView {
    rendered: RenderedView,
    export: LayoutExport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: SfrvizStatus, msg: impl AsRef<str>) -> SfrvizStatus {
    set_error(msg.as_ref());
    status
}

/// Runs `f`, turning panics into `Internal`.
fn guard(f: impl FnOnce() -> SfrvizStatus) -> SfrvizStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(SfrvizStatus::Internal, "internal error"),
    }
}

macro_rules! deref {
    ($p:expr, $name:literal) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => return fail(SfrvizStatus::NullPointer, concat!($name, " is null")),
        }
    };
}

macro_rules! out {
    ($p:expr, $name:literal) => {
        match unsafe { $p.as_mut() } {
            Some(v) => v,
            None => return fail(SfrvizStatus::NullPointer, concat!($name, " is null")),
        }
    };
}

/// Message for the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sfrviz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn sfrviz_status_message(status: SfrvizStatus) -> *const c_char {
    let s: &'static CStr = match status {
        SfrvizStatus::Ok => c"ok",
        SfrvizStatus::NullPointer => c"null pointer argument",
        SfrvizStatus::MalformedGraph => c"malformed graph document",
        SfrvizStatus::InvalidGroup => c"invalid grouping",
        SfrvizStatus::NotFound => c"node not found",
        SfrvizStatus::Unreachable => c"node is unreachable from the root",
        SfrvizStatus::Internal => c"internal error",
    };
    s.as_ptr()
}

/// Parses a JSON graph document of `len` bytes.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_graph_load(data: *const u8, len: usize, out: *mut *mut SfrvizGraph) -> SfrvizStatus {
    guard(|| {
        let out = out!(out, "out");
        *out = ptr::null_mut();
        if data.is_null() {
            return fail(SfrvizStatus::NullPointer, "data is null");
        }
        let bytes = unsafe { std::slice::from_raw_parts(data, len) };
        match load_graph(bytes) {
            Ok(loaded) => {
                *out = Box::into_raw(Box::new(SfrvizGraph { graph: loaded.graph, warnings: loaded.warnings }));
                SfrvizStatus::Ok
            }
            Err(e) => fail(SfrvizStatus::MalformedGraph, e.to_string()),
        }
    })
}

/// # Safety
/// `graph` must be null or a handle from `sfrviz_graph_load` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_graph_free(graph: *mut SfrvizGraph) {
    if !graph.is_null() {
        drop(unsafe { Box::from_raw(graph) });
    }
}

/// # Safety
/// `graph` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_graph_node_count(graph: *const SfrvizGraph, out: *mut usize) -> SfrvizStatus {
    guard(|| {
        let g = deref!(graph, "graph");
        *out!(out, "out") = g.graph.len();
        SfrvizStatus::Ok
    })
}

/// Number of warnings (duplicate edges, unreachable nodes) found on load.
///
/// # Safety
/// `graph` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_graph_warning_count(graph: *const SfrvizGraph, out: *mut usize) -> SfrvizStatus {
    guard(|| {
        let g = deref!(graph, "graph");
        *out!(out, "out") = g.warnings.len();
        SfrvizStatus::Ok
    })
}

/// Numbers the graph with the given traversal.
///
/// # Safety
/// `graph` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_number(
    graph: *const SfrvizGraph,
    traversal: SfrvizTraversal,
    out: *mut *mut SfrvizNumbering,
) -> SfrvizStatus {
    guard(|| {
        let out = out!(out, "out");
        *out = ptr::null_mut();
        let g = deref!(graph, "graph");
        let t = match traversal {
            SfrvizTraversal::Sfr => Traversal::Sfr,
            SfrvizTraversal::Dfs => Traversal::Dfs,
        };
        *out = Box::into_raw(Box::new(SfrvizNumbering { numbering: number(&g.graph, t) }));
        SfrvizStatus::Ok
    })
}

/// The number of `node`, starting at 1 for the root.
///
/// # Safety
/// `numbering` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_numbering_get(
    numbering: *const SfrvizNumbering,
    node: u64,
    out: *mut u32,
) -> SfrvizStatus {
    guard(|| {
        let n = deref!(numbering, "numbering");
        let out = out!(out, "out");
        *out = 0;
        let id = NodeId(node);
        if n.numbering.index().ix(id).is_none() {
            return fail(SfrvizStatus::NotFound, format!("unknown node {node}"));
        }
        match n.numbering.number(id) {
            Some(k) => {
                *out = k;
                SfrvizStatus::Ok
            }
            None => fail(SfrvizStatus::Unreachable, format!("node {node} is unreachable from the root")),
        }
    })
}

/// # Safety
/// `numbering` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_numbering_free(numbering: *mut SfrvizNumbering) {
    if !numbering.is_null() {
        drop(unsafe { Box::from_raw(numbering) });
    }
}

/// Lays out the graph. With `grouped` the default grouping is applied,
/// otherwise every node is drawn.
///
/// # Safety
/// `graph` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_view_render(graph: *const SfrvizGraph, grouped: bool, out: *mut *mut SfrvizView) -> SfrvizStatus {
    guard(|| {
        let out = out!(out, "out");
        *out = ptr::null_mut();
        let g = deref!(graph, "graph");
        let view = if grouped { default_view(&g.graph, &sfr_number(&g.graph)) } else { ViewState::new() };
        match render_view(&g.graph, &view) {
            Ok(rendered) => {
                let export = LayoutExport::build(&rendered, 0, &g.warnings);
                *out = Box::into_raw(Box::new(SfrvizView { rendered, export }));
                SfrvizStatus::Ok
            }
            Err(e) => fail(SfrvizStatus::InvalidGroup, e.to_string()),
        }
    })
}

/// # Safety
/// `view` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_view_free(view: *mut SfrvizView) {
    if !view.is_null() {
        drop(unsafe { Box::from_raw(view) });
    }
}

/// Number of drawn (reachable, visible) nodes.
///
/// # Safety
/// `view` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_view_node_count(view: *const SfrvizView, out: *mut usize) -> SfrvizStatus {
    guard(|| {
        let v = deref!(view, "view");
        *out!(out, "out") = v.export.nodes.len();
        SfrvizStatus::Ok
    })
}

/// Cell of a visible node. Collapsed groups are addressed by their
/// super-node id.
///
/// # Safety
/// `view` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_view_cell(view: *const SfrvizView, node: u64, out: *mut SfrvizCell) -> SfrvizStatus {
    guard(|| {
        let v = deref!(view, "view");
        let out = out!(out, "out");
        *out = SfrvizCell::default();
        let r = &v.rendered;
        let id = NodeId(node);
        let Some(ix) = r.graph().ix(id) else {
            return fail(SfrvizStatus::NotFound, format!("unknown node {node}"));
        };
        let (Some(cell), Some(sfr)) = (r.layout.cell_ix(ix), r.sfr.number_ix(ix)) else {
            return fail(SfrvizStatus::Unreachable, format!("node {node} is unreachable from the root"));
        };
        let (x, y) = cell.position();
        *out = SfrvizCell {
            sfr,
            lane: cell.lane,
            depth: cell.depth,
            width: cell.width,
            score: r.scores.score_ix(ix),
            x,
            y,
        };
        SfrvizStatus::Ok
    })
}

/// # Safety
/// `view` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_view_is_reducible(view: *const SfrvizView, out: *mut bool) -> SfrvizStatus {
    guard(|| {
        let v = deref!(view, "view");
        *out!(out, "out") = v.rendered.reducible;
        SfrvizStatus::Ok
    })
}

/// Deepest loop nesting in the view.
///
/// # Safety
/// `view` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_view_max_loop_depth(view: *const SfrvizView, out: *mut u32) -> SfrvizStatus {
    guard(|| {
        let v = deref!(view, "view");
        *out!(out, "out") = v.rendered.forest.max_depth;
        SfrvizStatus::Ok
    })
}

fn give_string(s: String, out: &mut *mut c_char) -> SfrvizStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            SfrvizStatus::Ok
        }
        Err(_) => fail(SfrvizStatus::Internal, "output contains a NUL byte"),
    }
}

/// Canonical layout export JSON. Free with `sfrviz_string_free`.
///
/// # Safety
/// `view` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_view_layout_json(view: *const SfrvizView, out: *mut *mut c_char) -> SfrvizStatus {
    guard(|| {
        let out = out!(out, "out");
        *out = ptr::null_mut();
        let v = deref!(view, "view");
        give_string(v.export.to_json(), out)
    })
}

/// SVG drawing of the view. Free with `sfrviz_string_free`.
///
/// # Safety
/// `view` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_view_svg(view: *const SfrvizView, out: *mut *mut c_char) -> SfrvizStatus {
    guard(|| {
        let out = out!(out, "out");
        *out = ptr::null_mut();
        let v = deref!(view, "view");
        give_string(render_svg(&v.export), out)
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sfrviz_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
