//! C ABI over `branchkit`.
//!
//! Graphs and replicate sets cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns a [`BkStatus`]; on failure a message is kept per thread and can be
//! read with [`bk_last_error_message`]. Panics never unwind into C; they are
//! reported as [`BkStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use branchkit::estimator::{self, reproduction_number, thresholds, EpiParams, EstimatorConfig};
use branchkit::generators::{erdos_renyi, pareto_configuration, preferential_attachment, ParetoConfig};
use branchkit::ingest::load_graph;
use branchkit::noise::replicate;
use branchkit::rng::tag;
use branchkit::{Error, Graph, NoiseParams, ReplicateSet, Seed};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DataError = 3,
    NonConvergence = 4,
    Io = 5,
    Panic = 6,
}

/// Opaque graph handle.
pub struct BkGraph(Graph);

/// Opaque handle to a set of replicate observations on one vertex set.
pub struct BkReplicates(ReplicateSet);

/// Estimator settings. A NaN `alpha0` starts the fixed point from `û₂`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct BkEstimatorConfig {
    pub alpha0: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub n_bootstrap: usize,
    pub confidence_level: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct BkEstimate {
    pub n: usize,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub delta_hat: f64,
    pub kappa_hat: f64,
    pub variance_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub alpha_ci_lo: f64,
    pub alpha_ci_hi: f64,
    pub beta_ci_lo: f64,
    pub beta_ci_hi: f64,
    pub iterations: usize,
    /// Number of estimator warnings (clamped radicands, extra replicates).
    pub n_warnings: usize,
}

/// A derived quantity with its delta-method variance and interval. All
/// fields are NaN when the quantity does not exist.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct BkDerived {
    pub value: f64,
    pub variance: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct BkThresholds {
    pub subcritical: bool,
    pub percolation: BkDerived,
    pub epidemic: BkDerived,
    pub immunization: BkDerived,
}

const MISSING: BkDerived = BkDerived { value: f64::NAN, variance: f64::NAN, ci_lo: f64::NAN, ci_hi: f64::NAN };

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BkStatus {
    match e {
        Error::InvalidParameter(_) | Error::UnachievableTarget { .. } | Error::DenseInfeasible { .. } => {
            BkStatus::InvalidParameter
        }
        Error::Divergence { .. } | Error::SingularIterate(_) | Error::InvalidRegion { .. } | Error::NonPositiveK3(_) => {
            BkStatus::NonConvergence
        }
        Error::Io(_) => BkStatus::Io,
        _ => BkStatus::DataError,
    }
}

/// Runs `f`, recording the error message and mapping errors and panics to
/// status codes.
fn guard<F: FnOnce() -> Result<(), (BkStatus, String)>>(f: F) -> BkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BkStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside branchkit".into());
            BkStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, (BkStatus, String)>;
}

impl<T> OrStatus<T> for branchkit::Result<T> {
    fn or_status(self) -> Result<T, (BkStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (BkStatus, String) {
    (BkStatus::NullPointer, format!("{what} is NULL"))
}

/// # Safety
/// `p` is NULL or points to a live `T`.
unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (BkStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `out` is NULL or valid for writes.
unsafe fn put<T>(out: *mut T, value: T) -> Result<(), (BkStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Graph on `n` vertices with edges `(src[k], dst[k])`, `k < m`.
///
/// # Safety
/// `src` and `dst` point to `m` readable values (either may be NULL when
/// `m == 0`); `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bk_graph_from_edges(
    n: usize,
    src: *const u32,
    dst: *const u32,
    m: usize,
    out: *mut *mut BkGraph,
) -> BkStatus {
    guard(|| {
        let (s, d) = if m == 0 {
            (&[][..], &[][..])
        } else {
            if src.is_null() || dst.is_null() {
                return Err(null("edge array"));
            }
            (std::slice::from_raw_parts(src, m), std::slice::from_raw_parts(dst, m))
        };
        let g = Graph::from_edges(n, s.iter().zip(d).map(|(&a, &b)| (a as usize, b as usize))).or_status()?;
        put(out, Box::into_raw(Box::new(BkGraph(g))))
    })
}

unsafe fn put_graph(out: *mut *mut BkGraph, g: branchkit::Result<Graph>) -> Result<(), (BkStatus, String)> {
    let g = g.or_status()?;
    put(out, Box::into_raw(Box::new(BkGraph(g))))
}

/// Erdős–Rényi graph drawn from the `GENERATE` stream of `seed`.
///
/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bk_graph_erdos_renyi(n: usize, p: f64, seed: u64, out: *mut *mut BkGraph) -> BkStatus {
    guard(|| put_graph(out, erdos_renyi(n, p, Seed::new(seed).derive(tag::GENERATE))))
}

/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bk_graph_preferential_attachment(
    n: usize,
    m: usize,
    seed: u64,
    out: *mut *mut BkGraph,
) -> BkStatus {
    guard(|| put_graph(out, preferential_attachment(n, m, Seed::new(seed).derive(tag::GENERATE))))
}

/// Erased configuration model on truncated-Pareto degrees with the given
/// shape and target mean degree.
///
/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bk_graph_pareto(
    n: usize,
    zeta: f64,
    mean_degree: f64,
    seed: u64,
    out: *mut *mut BkGraph,
) -> BkStatus {
    guard(|| {
        let g = ParetoConfig::with_mean_degree(n, zeta, mean_degree)
            .and_then(|cfg| pareto_configuration(n, &cfg, Seed::new(seed).derive(tag::GENERATE)));
        put_graph(out, g)
    })
}

/// Reads a canonical or labeled edge list. A negative `weight_threshold`
/// disables thresholding.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bk_graph_read(path: *const c_char, weight_threshold: f64, out: *mut *mut BkGraph) -> BkStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (BkStatus::InvalidParameter, "path is not UTF-8".to_owned()))?;
        let t = (weight_threshold >= 0.0).then_some(weight_threshold);
        put_graph(out, load_graph(Path::new(path), t).map(|lg| lg.graph))
    })
}

/// # Safety
/// `g` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bk_graph_free(g: *mut BkGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn bk_graph_num_vertices(g: *const BkGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_vertices())
}

/// # Safety
/// `g` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn bk_graph_num_edges(g: *const BkGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_edges())
}

/// `Σd² / Σd`, 0 for an edgeless graph.
///
/// # Safety
/// `g` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bk_graph_branching_factor(g: *const BkGraph, out: *mut f64) -> BkStatus {
    guard(|| put(out, deref(g, "graph")?.0.branching_factor()))
}

/// `k` independent noisy observations of `g`. A negative `alpha` selects the
/// edge-unbiased rate for `beta`.
///
/// # Safety
/// `g` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bk_replicates_perturb(
    g: *const BkGraph,
    alpha: f64,
    beta: f64,
    k: usize,
    seed: u64,
    out: *mut *mut BkReplicates,
) -> BkStatus {
    guard(|| {
        let g = &deref(g, "graph")?.0;
        let p = if alpha < 0.0 { NoiseParams::edge_unbiased(g, beta) } else { NoiseParams::new(alpha, beta) }.or_status()?;
        let reps = replicate(g, p, k, Seed::new(seed)).or_status()?;
        put(out, Box::into_raw(Box::new(BkReplicates(reps))))
    })
}

/// Copies `k` graphs into a replicate set. The graph handles stay owned by
/// the caller.
///
/// # Safety
/// `graphs` points to `k` live handles; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bk_replicates_from_graphs(
    graphs: *const *const BkGraph,
    k: usize,
    out: *mut *mut BkReplicates,
) -> BkStatus {
    guard(|| {
        if graphs.is_null() {
            return Err(null("graph array"));
        }
        let gs = std::slice::from_raw_parts(graphs, k)
            .iter()
            .map(|&g| deref(g, "graph").map(|g| g.0.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let reps = ReplicateSet::new(gs).or_status()?;
        put(out, Box::into_raw(Box::new(BkReplicates(reps))))
    })
}

/// # Safety
/// `r` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn bk_replicates_len(r: *const BkReplicates) -> usize {
    r.as_ref().map_or(0, |r| r.0.len())
}

/// # Safety
/// `r` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bk_replicates_free(r: *mut BkReplicates) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

#[no_mangle]
pub extern "C" fn bk_estimator_config_default() -> BkEstimatorConfig {
    let d = EstimatorConfig::default();
    BkEstimatorConfig {
        alpha0: f64::NAN,
        epsilon: d.epsilon,
        max_iterations: d.max_iterations,
        n_bootstrap: d.n_bootstrap,
        confidence_level: d.confidence_level,
    }
}

impl From<&BkEstimatorConfig> for EstimatorConfig {
    fn from(c: &BkEstimatorConfig) -> Self {
        EstimatorConfig {
            alpha0: (!c.alpha0.is_nan()).then_some(c.alpha0),
            epsilon: c.epsilon,
            max_iterations: c.max_iterations,
            n_bootstrap: c.n_bootstrap,
            confidence_level: c.confidence_level,
        }
    }
}

/// Error rates, κ̂ and their intervals from the first three replicates.
/// A NULL `cfg` uses the defaults.
///
/// # Safety
/// `r` is a live handle; `cfg` is NULL or readable; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bk_estimate(
    r: *const BkReplicates,
    cfg: *const BkEstimatorConfig,
    seed: u64,
    out: *mut BkEstimate,
) -> BkStatus {
    guard(|| {
        let reps = &deref(r, "replicates")?.0;
        let cfg = cfg.as_ref().map_or_else(EstimatorConfig::default, EstimatorConfig::from);
        let e = estimator::estimate(reps, &cfg, Seed::new(seed)).or_status()?;
        let [lo, hi] = e.ci.unwrap_or([f64::NAN; 2]);
        let [alo, ahi] = e.alpha_ci.unwrap_or([f64::NAN; 2]);
        let [blo, bhi] = e.beta_ci.unwrap_or([f64::NAN; 2]);
        put(
            out,
            BkEstimate {
                n: e.n,
                alpha_hat: e.alpha_hat,
                beta_hat: e.beta_hat,
                delta_hat: e.delta_hat,
                kappa_hat: e.kappa_hat,
                variance_hat: e.variance_hat.unwrap_or(f64::NAN),
                ci_lo: lo,
                ci_hi: hi,
                alpha_ci_lo: alo,
                alpha_ci_hi: ahi,
                beta_ci_lo: blo,
                beta_ci_hi: bhi,
                iterations: e.iterations,
                n_warnings: e.warnings.len(),
            },
        )
    })
}

fn derived(d: Option<estimator::Derived>) -> BkDerived {
    d.map_or(MISSING, |d| BkDerived { value: d.value, variance: d.variance, ci_lo: d.ci[0], ci_hi: d.ci[1] })
}

/// `R₀ = θ(κ-1)/(θ+γ)` with its delta-method interval.
///
/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bk_reproduction_number(
    kappa: f64,
    var_kappa: f64,
    theta: f64,
    gamma: f64,
    level: f64,
    out: *mut BkDerived,
) -> BkStatus {
    guard(|| {
        let p = EpiParams::new(theta, gamma, 1.0).or_status()?;
        let r = reproduction_number(kappa, var_kappa, &p, level).or_status()?;
        put(out, BkDerived { value: r.r0, variance: r.var_r0, ci_lo: r.ci[0], ci_hi: r.ci[1] })
    })
}

/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bk_thresholds(
    kappa: f64,
    var_kappa: f64,
    lambda: f64,
    level: f64,
    out: *mut BkThresholds,
) -> BkStatus {
    guard(|| {
        let t = thresholds(kappa, var_kappa, lambda, level).or_status()?;
        put(
            out,
            BkThresholds {
                subcritical: t.subcritical,
                percolation: derived(t.percolation),
                epidemic: derived(t.epidemic),
                immunization: derived(t.immunization),
            },
        )
    })
}
