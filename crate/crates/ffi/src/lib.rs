//! C interface to `dchsbm`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns a [`DchsbmStatus`]; the message of
//! the most recent failure on the calling thread is available from [`dchsbm_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dchsbm::clustering::{kmeans_rows, misclustering, threshold_cluster, KmeansOptions};
use dchsbm::model::{sample_scalable, validate, Affinity, Edge, Hypergraph, ModelParams, MAX_EDGE_SIZE};
use dchsbm::projection::weighted_adjacency;
use dchsbm::seed::stream_seed;
use dchsbm::spectral::{leading_eigenpairs, row_normalize, ZERO_ROW_EPS};
use dchsbm::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DchsbmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

/// Clustering algorithm selector for [`dchsbm_cluster`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DchsbmAlgorithm {
    Kmeans = 0,
    Threshold = 1,
}

/// Opaque hypergraph handle.
pub struct DchsbmHypergraph(Hypergraph);

/// Opaque model handle.
pub struct DchsbmModel(ModelParams);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DchsbmStatus {
    match e {
        Error::Parse { .. } => DchsbmStatus::Parse,
        Error::Io(_) => DchsbmStatus::Io,
        e if e.is_numerical() => DchsbmStatus::Numerical,
        _ => DchsbmStatus::InvalidArgument,
    }
}

struct Failure(DchsbmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DchsbmStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(DchsbmStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DchsbmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DchsbmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            DchsbmStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller promises `len` readable elements
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: caller promises a writable location or null
    unsafe { p.as_mut() }.ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: caller passes a live handle from this library or null
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. The pointer stays valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dchsbm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses the text hypergraph format (`n <n> edges <count>` header, one line of 1-based node
/// ids per hyperedge).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dchsbm_hypergraph_parse(
    text: *const c_char,
    out: *mut *mut DchsbmHypergraph,
) -> DchsbmStatus {
    guard(|| {
        let out = unsafe { self::out(out, "out") }?;
        if text.is_null() {
            return Err(null("text"));
        }
        let s = unsafe { CStr::from_ptr(text) }
            .to_str()
            .map_err(|_| invalid("text is not UTF-8"))?;
        let h = Hypergraph::from_text(s, MAX_EDGE_SIZE)?;
        *out = Box::into_raw(Box::new(DchsbmHypergraph(h)));
        Ok(())
    })
}

/// Builds a hypergraph from `edge_count` hyperedges stored back to back in `nodes`
/// (0-based ids), the i-th having `sizes[i]` entries.
///
/// # Safety
/// `sizes` must hold `edge_count` values and `nodes` their sum; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dchsbm_hypergraph_new(
    n: usize,
    nodes: *const usize,
    sizes: *const usize,
    edge_count: usize,
    out: *mut *mut DchsbmHypergraph,
) -> DchsbmStatus {
    guard(|| {
        let out = unsafe { self::out(out, "out") }?;
        let sizes = unsafe { slice(sizes, edge_count, "sizes") }?;
        let total = sizes
            .iter()
            .try_fold(0usize, |a, &s| a.checked_add(s))
            .ok_or_else(|| invalid("sizes overflow"))?;
        let nodes = unsafe { slice(nodes, total, "nodes") }?;
        let mut edges = Vec::with_capacity(edge_count);
        let mut at = 0;
        for &s in sizes {
            edges.push(Edge::from_nodes(&nodes[at..at + s]));
            at += s;
        }
        let h = Hypergraph::new(n, edges, MAX_EDGE_SIZE)?;
        *out = Box::into_raw(Box::new(DchsbmHypergraph(h)));
        Ok(())
    })
}

/// Releases a hypergraph. Null is ignored.
///
/// # Safety
/// `h` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dchsbm_hypergraph_free(h: *mut DchsbmHypergraph) {
    if !h.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(h) });
    }
}

/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dchsbm_hypergraph_node_count(
    h: *const DchsbmHypergraph,
    out: *mut usize,
) -> DchsbmStatus {
    guard(|| {
        *unsafe { self::out(out, "out") }? = unsafe { handle(h, "hypergraph") }?.0.n();
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dchsbm_hypergraph_edge_count(
    h: *const DchsbmHypergraph,
    out: *mut usize,
) -> DchsbmStatus {
    guard(|| {
        *unsafe { self::out(out, "out") }? = unsafe { handle(h, "hypergraph") }?.0.edges().len();
        Ok(())
    })
}

/// Writes hyperdegrees into `degrees`, which must have room for the node count.
///
/// # Safety
/// `h` must be a live handle and `degrees` hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn dchsbm_hypergraph_degrees(
    h: *const DchsbmHypergraph,
    degrees: *mut u64,
    len: usize,
) -> DchsbmStatus {
    guard(|| {
        let h = &unsafe { handle(h, "hypergraph") }?.0;
        if len != h.n() {
            return Err(invalid(format!("buffer holds {len} values, need {}", h.n())));
        }
        if degrees.is_null() {
            return Err(null("degrees"));
        }
        // SAFETY: checked non-null, caller promises `len` values
        let buf = unsafe { std::slice::from_raw_parts_mut(degrees, len) };
        buf.copy_from_slice(&h.hyperdegrees());
        Ok(())
    })
}

/// Serialises to the text format. Free the result with [`dchsbm_string_free`].
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dchsbm_hypergraph_to_text(
    h: *const DchsbmHypergraph,
    out: *mut *mut c_char,
) -> DchsbmStatus {
    guard(|| {
        let out = unsafe { self::out(out, "out") }?;
        let text = unsafe { handle(h, "hypergraph") }?.0.to_text();
        *out = CString::new(text).map_err(|_| invalid("interior NUL"))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dchsbm_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Planted-partition model, validated on creation. `labels` are 0-based in `[0, k)`, `theta` has `n` entries summing
/// to the block size within each block, `alpha` has `max_size - 1` entries for sizes
/// `2..=max_size`.
///
/// # Safety
/// Arrays must hold the stated number of values; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn dchsbm_model_planted(
    n: usize,
    k: usize,
    max_size: usize,
    p: f64,
    q: f64,
    labels: *const usize,
    theta: *const f64,
    alpha: *const f64,
    out: *mut *mut DchsbmModel,
) -> DchsbmStatus {
    guard(|| {
        let out = unsafe { self::out(out, "out") }?;
        if max_size < 2 {
            return Err(invalid("max_size must be at least 2"));
        }
        let labels = unsafe { slice(labels, n, "labels") }?.to_vec();
        let theta = unsafe { slice(theta, n, "theta") }?.to_vec();
        let alpha = unsafe { slice(alpha, max_size - 1, "alpha") }?.to_vec();
        let params = ModelParams::new(k, max_size, labels, theta, Affinity::Planted { p, q, alpha })?;
        validate(&params).into_result()?;
        *out = Box::into_raw(Box::new(DchsbmModel(params)));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `m` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dchsbm_model_free(m: *mut DchsbmModel) {
    if !m.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Probability of the hyperedge with the given 0-based nodes (any order, repeats allowed).
///
/// # Safety
/// `m` must be a live handle, `nodes` hold `len` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn dchsbm_model_edge_probability(
    m: *const DchsbmModel,
    nodes: *const usize,
    len: usize,
    out: *mut f64,
) -> DchsbmStatus {
    guard(|| {
        let out = unsafe { self::out(out, "out") }?;
        let m = &unsafe { handle(m, "model") }?.0;
        let nodes = unsafe { slice(nodes, len, "nodes") }?;
        if let Some(&v) = nodes.iter().find(|&&v| v >= m.n) {
            return Err(invalid(format!("node {v} out of range for n = {}", m.n)));
        }
        *out = m.edge_probability(&Edge::from_nodes(nodes))?;
        Ok(())
    })
}

/// Draws a hypergraph from the model.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dchsbm_sample(
    m: *const DchsbmModel,
    seed: u64,
    out: *mut *mut DchsbmHypergraph,
) -> DchsbmStatus {
    guard(|| {
        let out = unsafe { self::out(out, "out") }?;
        let h = sample_scalable(&unsafe { handle(m, "model") }?.0, seed)?;
        *out = Box::into_raw(Box::new(DchsbmHypergraph(h)));
        Ok(())
    })
}

/// Spectral clustering into `k` groups; writes 0-based labels into `labels` (`len` = node
/// count).
///
/// # Safety
/// `h` must be a live handle and `labels` hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn dchsbm_cluster(
    h: *const DchsbmHypergraph,
    k: usize,
    algorithm: DchsbmAlgorithm,
    seed: u64,
    labels: *mut usize,
    len: usize,
) -> DchsbmStatus {
    guard(|| {
        let h = &unsafe { handle(h, "hypergraph") }?.0;
        if len != h.n() {
            return Err(invalid(format!("buffer holds {len} values, need {}", h.n())));
        }
        if labels.is_null() {
            return Err(null("labels"));
        }
        if k == 0 || k > h.n() {
            return Err(invalid(format!("k must be in 1..={}", h.n())));
        }
        let a = weighted_adjacency(h);
        let emb = leading_eigenpairs(&a, k, 1e-10, stream_seed(seed, "eigen", &[]))?;
        let (ustar, _) = row_normalize(&emb.u, ZERO_ROW_EPS);
        let result = match algorithm {
            DchsbmAlgorithm::Kmeans => kmeans_rows(
                &ustar,
                k,
                &KmeansOptions::default(),
                stream_seed(seed, "kmeans", &[]),
            ),
            DchsbmAlgorithm::Threshold => threshold_cluster(&ustar, k),
        };
        // SAFETY: checked non-null, caller promises `len` values
        unsafe { std::slice::from_raw_parts_mut(labels, len) }.copy_from_slice(&result.labels);
        Ok(())
    })
}

/// Misclustered nodes between two labelings in `[0, k)` under the best label permutation.
///
/// # Safety
/// `g` and `g_prime` must hold `n` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn dchsbm_misclustering(
    g: *const usize,
    g_prime: *const usize,
    n: usize,
    k: usize,
    out: *mut usize,
) -> DchsbmStatus {
    guard(|| {
        let out = unsafe { self::out(out, "out") }?;
        let g = unsafe { slice(g, n, "g") }?;
        let gp = unsafe { slice(g_prime, n, "g_prime") }?;
        if g.iter().chain(gp).any(|&l| l >= k) {
            return Err(invalid(format!("labels must lie in [0, {k})")));
        }
        *out = misclustering(g, gp, k);
        Ok(())
    })
}
