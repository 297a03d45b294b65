//! C interface to the `ternbfs` search.
//!
//! Graphs and runs are opaque heap handles released with their `_free`
//! function. Every fallible call returns a [`TbfsStatus`]; the message of
//! the last failure on the calling thread is available from
//! [`tbfs_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ternbfs::bfs::Record;
use ternbfs::digits::Backend;
use ternbfs::error::Error;
use ternbfs::graph::gen::{self, Kind, Spec};
use ternbfs::graph::io::{self, Format, GraphError};
use ternbfs::graph::Graph;
use ternbfs::harness::{reference_bfs, run, verify_run, Metrics, RunConfig};
use ternbfs::pow3::Pow3Mode;
use ternbfs::store::CheckLevel;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbfsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Verification = 5,
    Internal = 6,
    Panic = 7,
    BufferTooSmall = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbfsFormat {
    Edgelist = 0,
    Dimacs = 1,
    Csr = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbfsKind {
    Gnm = 0,
    Path = 1,
    Star = 2,
    Grid = 3,
    DRegular = 4,
    DegreeSorted = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbfsBackend {
    Packed = 0,
    Spill = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbfsPow3 {
    Table = 0,
    Strided = 1,
    Squaring = 2,
}

/// Search options. `stride` is used only with `TBFS_POW3_STRIDED`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TbfsConfig {
    pub backend: TbfsBackend,
    pub pow3: TbfsPow3,
    pub stride: usize,
    pub audit: bool,
}

/// One output record; `parent` is 0 for a root.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TbfsRecord {
    pub vertex: u32,
    pub parent: u32,
    pub distance: u32,
}

/// Headline numbers of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TbfsSummary {
    pub n: usize,
    pub m: usize,
    pub succinct: bool,
    pub peak_bits: u64,
    pub min_color_bits: u64,
    pub extra_bits: i64,
    /// 0 when the plain store was used.
    pub extra_bound: u64,
    pub roots: u64,
    pub max_distance: u32,
    pub wall_time_ms: f64,
}

/// A loaded or generated graph.
pub struct TbfsGraph {
    graph: Graph,
}

/// The records and metrics of one search.
pub struct TbfsRun {
    order: Vec<u32>,
    records: Vec<Record>,
    metrics: Metrics,
    metrics_json: Vec<u8>,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn fail(status: TbfsStatus, msg: impl AsRef<str>) -> TbfsStatus {
    set_error(msg.as_ref());
    status
}

fn status_of(e: &Error) -> TbfsStatus {
    match e {
        Error::Input(_) => TbfsStatus::InvalidArgument,
        Error::Graph(GraphError::Io(_)) | Error::Io(_) => TbfsStatus::Io,
        Error::Graph(_) => TbfsStatus::Parse,
        Error::Verification(_) => TbfsStatus::Verification,
        Error::Internal(_) => TbfsStatus::Internal,
    }
}

fn from_error(e: Error) -> TbfsStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `f`, turning a panic into `TBFS_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> TbfsStatus) -> TbfsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == TbfsStatus::Ok {
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
            fail(TbfsStatus::Panic, msg)
        }
    }
}

/// Copies `bytes` plus a terminating NUL into `buf`; `needed` receives the
/// full size either way.
unsafe fn copy_out(bytes: &[u8], buf: *mut c_char, cap: usize, needed: *mut usize) -> TbfsStatus {
    if !needed.is_null() {
        *needed = bytes.len() + 1;
    }
    if cap < bytes.len() + 1 {
        return fail(TbfsStatus::BufferTooSmall, format!("need {} bytes", bytes.len() + 1));
    }
    if buf.is_null() {
        return fail(TbfsStatus::NullPointer, "buf is null");
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, bytes.len());
    *buf.add(bytes.len()) = 0;
    TbfsStatus::Ok
}

fn boxed<T>(value: T, out: *mut *mut T) -> TbfsStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    TbfsStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tbfs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error message of this thread into `buf`.
///
/// # Safety
/// `buf` must be writable for `cap` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn tbfs_last_error(buf: *mut c_char, cap: usize, needed: *mut usize) -> TbfsStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    copy_out(&msg, buf, cap, needed)
}

/// Reads a graph file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tbfs_graph_load(
    path: *const c_char,
    format: TbfsFormat,
    directed: bool,
    out: *mut *mut TbfsGraph,
) -> TbfsStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(TbfsStatus::NullPointer, "path or out is null");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(TbfsStatus::InvalidArgument, "path is not UTF-8");
        };
        let format = match format {
            TbfsFormat::Edgelist => Format::Edgelist,
            TbfsFormat::Dimacs => Format::Dimacs,
            TbfsFormat::Csr => Format::Csr,
        };
        match io::load(Path::new(path), format, directed) {
            Ok(graph) => boxed(TbfsGraph { graph }, out),
            Err(e) => from_error(e.into()),
        }
    })
}

/// Builds a graph from `m` pairs stored as `edges[2i], edges[2i+1]`, with
/// vertices numbered from 1.
///
/// # Safety
/// `edges` must hold `2·m` values (may be null when `m` is 0); `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tbfs_graph_from_edges(
    n: usize,
    edges: *const u32,
    m: usize,
    directed: bool,
    out: *mut *mut TbfsGraph,
) -> TbfsStatus {
    guard(|| {
        if out.is_null() || (edges.is_null() && m > 0) {
            return fail(TbfsStatus::NullPointer, "edges or out is null");
        }
        if n >= u32::MAX as usize {
            return fail(TbfsStatus::InvalidArgument, "too many vertices");
        }
        let flat = if m == 0 { &[][..] } else { std::slice::from_raw_parts(edges, 2 * m) };
        let pairs: Vec<(u32, u32)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        if let Some(&(u, v)) = pairs.iter().find(|&&(u, v)| u == 0 || v == 0 || u as usize > n || v as usize > n) {
            return fail(TbfsStatus::InvalidArgument, format!("edge ({u}, {v}) out of range 1..={n}"));
        }
        boxed(TbfsGraph { graph: Graph::from_edges(n, &pairs, directed) }, out)
    })
}

/// Generates a synthetic graph; `m` is the edge count, or the degree for
/// `TBFS_KIND_D_REGULAR`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tbfs_graph_generate(
    kind: TbfsKind,
    n: usize,
    m: usize,
    seed: u64,
    directed: bool,
    out: *mut *mut TbfsGraph,
) -> TbfsStatus {
    guard(|| {
        if out.is_null() {
            return fail(TbfsStatus::NullPointer, "out is null");
        }
        let kind = match kind {
            TbfsKind::Gnm => Kind::Gnm,
            TbfsKind::Path => Kind::Path,
            TbfsKind::Star => Kind::Star,
            TbfsKind::Grid => Kind::Grid,
            TbfsKind::DRegular => Kind::DRegular,
            TbfsKind::DegreeSorted => Kind::DegreeSorted,
        };
        match gen::generate(&Spec { kind, n, m, seed, directed }) {
            Ok(graph) => boxed(TbfsGraph { graph }, out),
            Err(e) => fail(TbfsStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn tbfs_graph_vertices(g: *const TbfsGraph) -> usize {
    g.as_ref().map_or(0, |g| g.graph.n())
}

/// Edge count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn tbfs_graph_edges(g: *const TbfsGraph) -> usize {
    g.as_ref().map_or(0, |g| g.graph.m())
}

/// # Safety
/// `g` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn tbfs_graph_free(g: *mut TbfsGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Packed backend, full power table, no audit.
#[no_mangle]
pub extern "C" fn tbfs_config_default() -> TbfsConfig {
    TbfsConfig {
        backend: TbfsBackend::Packed,
        pow3: TbfsPow3::Table,
        stride: 2,
        audit: false,
    }
}

/// Searches `g` from the vertices of `order` in turn (identity when
/// `order` is null). Bound violations found by the instrumentation fail
/// with `TBFS_STATUS_INTERNAL` and no run is returned.
///
/// # Safety
/// `g` must be live, `order` null or `order_len` readable values, `config`
/// null (defaults) or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tbfs_run(
    g: *const TbfsGraph,
    order: *const u32,
    order_len: usize,
    config: *const TbfsConfig,
    out: *mut *mut TbfsRun,
) -> TbfsStatus {
    guard(|| {
        let (Some(g), false) = (g.as_ref(), out.is_null()) else {
            return fail(TbfsStatus::NullPointer, "graph or out is null");
        };
        let n = g.graph.n();
        let order: Vec<u32> = if order.is_null() {
            (1..=n as u32).collect()
        } else {
            std::slice::from_raw_parts(order, order_len).to_vec()
        };
        let c = config.as_ref().copied().unwrap_or_else(|| tbfs_config_default());
        let cfg = RunConfig {
            backend: match c.backend {
                TbfsBackend::Packed => Backend::Packed,
                TbfsBackend::Spill => Backend::Spill,
            },
            pow3: match c.pow3 {
                TbfsPow3::Table => Pow3Mode::Full,
                TbfsPow3::Strided => Pow3Mode::Strided(c.stride),
                TbfsPow3::Squaring => Pow3Mode::Squaring,
            },
            audit: c.audit,
            check: if c.audit { CheckLevel::Touched } else { CheckLevel::Off },
        };
        let mut records = Vec::with_capacity(n);
        let metrics = match run(&g.graph, &order, cfg, &mut records) {
            Ok(m) => m,
            Err(e) => return from_error(e),
        };
        let violations = metrics.violations();
        if !violations.is_empty() {
            return fail(TbfsStatus::Internal, violations.join("; "));
        }
        let metrics_json = serde_json::to_vec(&metrics).expect("metrics serialize");
        boxed(
            TbfsRun {
                order,
                records,
                metrics,
                metrics_json,
            },
            out,
        )
    })
}

/// Number of records, which is the vertex count.
///
/// # Safety
/// `r` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn tbfs_run_record_count(r: *const TbfsRun) -> usize {
    r.as_ref().map_or(0, |r| r.records.len())
}

/// Copies records `start .. start+cap` in output order; `written` receives
/// the number copied.
///
/// # Safety
/// `r` must be live, `buf` writable for `cap` records, `written` writable.
#[no_mangle]
pub unsafe extern "C" fn tbfs_run_records(
    r: *const TbfsRun,
    start: usize,
    buf: *mut TbfsRecord,
    cap: usize,
    written: *mut usize,
) -> TbfsStatus {
    guard(|| {
        let Some(r) = r.as_ref() else {
            return fail(TbfsStatus::NullPointer, "run is null");
        };
        if written.is_null() || (buf.is_null() && cap > 0) {
            return fail(TbfsStatus::NullPointer, "buf or written is null");
        }
        let rest = r.records.get(start..).unwrap_or(&[]);
        let k = rest.len().min(cap);
        for (i, rec) in rest[..k].iter().enumerate() {
            *buf.add(i) = TbfsRecord {
                vertex: rec.v,
                parent: rec.parent.unwrap_or(0),
                distance: rec.dist,
            };
        }
        *written = k;
        TbfsStatus::Ok
    })
}

/// # Safety
/// `r` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tbfs_run_summary(r: *const TbfsRun, out: *mut TbfsSummary) -> TbfsStatus {
    guard(|| {
        let (Some(r), false) = (r.as_ref(), out.is_null()) else {
            return fail(TbfsStatus::NullPointer, "run or out is null");
        };
        let m = &r.metrics;
        *out = TbfsSummary {
            n: m.n,
            m: m.m,
            succinct: m.succinct,
            peak_bits: m.peak_bits,
            min_color_bits: m.min_color_bits,
            extra_bits: m.extra_bits,
            extra_bound: m.extra_bound.unwrap_or(0),
            roots: m.run.roots,
            max_distance: m.run.max_distance,
            wall_time_ms: m.wall_time_ms,
        };
        TbfsStatus::Ok
    })
}

/// The full metrics document as NUL-terminated JSON.
///
/// # Safety
/// `r` must be live, `buf` writable for `cap` bytes, `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn tbfs_run_metrics_json(
    r: *const TbfsRun,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> TbfsStatus {
    guard(|| match r.as_ref() {
        Some(r) => copy_out(&r.metrics_json, buf, cap, needed),
        None => fail(TbfsStatus::NullPointer, "run is null"),
    })
}

/// Checks the records of `r` against a reference search of `g`.
///
/// # Safety
/// `r` and `g` must be live, and `g` the graph `r` was computed on.
#[no_mangle]
pub unsafe extern "C" fn tbfs_run_verify(r: *const TbfsRun, g: *const TbfsGraph) -> TbfsStatus {
    guard(|| {
        let (Some(r), Some(g)) = (r.as_ref(), g.as_ref()) else {
            return fail(TbfsStatus::NullPointer, "run or graph is null");
        };
        if g.graph.n() != r.order.len() {
            return fail(TbfsStatus::InvalidArgument, "graph does not match the run");
        }
        let report = verify_run(&g.graph, &r.records, &reference_bfs(&g.graph, &r.order));
        match report.first_discrepancy {
            None if report.pass => TbfsStatus::Ok,
            Some(d) => fail(TbfsStatus::Verification, format!("vertex {}: {}", d.vertex, d.reason)),
            None => fail(TbfsStatus::Verification, "records do not match"),
        }
    })
}

/// # Safety
/// `r` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn tbfs_run_free(r: *mut TbfsRun) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
