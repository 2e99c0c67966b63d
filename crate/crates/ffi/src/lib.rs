//! C ABI over `spatial-aoi`.
//!
//! Topologies are opaque heap handles created by `aoi_topology_*` and
//! released with [`aoi_topology_free`]. Every fallible call returns an
//! [`AoiStatus`]; on failure [`aoi_last_error_message`] describes the error
//! for the calling thread. Output arrays are caller-allocated and must hold
//! one entry per node.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use spatial_aoi::sim::{self, SimConfig};
use spatial_aoi::{expected_aoi, AoiError, Policy, SolverConfig, Topology};

/// Opaque network geometry.
pub struct AoiTopology(Topology);

/// Result codes. Values 2 to 4 match the command line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AoiStatus {
    Ok = 0,
    NullPointer = 1,
    Usage = 2,
    NoConvergence = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AoiPolicyKind {
    /// Weighted sum; `weights` may be null for unit weights.
    Ews = 0,
    MinMax = 1,
    ProportionalFair = 2,
    TopologyAgnostic = 3,
    /// Uniform attempt probability; `aloha_p <= 0` selects `1/N`.
    Aloha = 4,
}

/// Convergence details of [`aoi_solve`]. Closed-form policies report
/// `converged = true`, `sweeps = 0` and `residual = 0`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AoiSolveInfo {
    pub residual: f64,
    pub sweeps: usize,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &AoiError) -> AoiStatus {
    match err.exit_code() {
        3 => AoiStatus::NoConvergence,
        4 => AoiStatus::Io,
        _ => AoiStatus::Usage,
    }
}

fn guard(f: impl FnOnce() -> Result<(), AoiStatus>) -> AoiStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AoiStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            AoiStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, AoiStatus>;
}

impl<T> OrStatus<T> for spatial_aoi::Result<T> {
    fn or_status(self) -> Result<T, AoiStatus> {
        self.map_err(|e| {
            set_error(e.to_string());
            status_of(&e)
        })
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), AoiStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(AoiStatus::NullPointer);
    }
    Ok(())
}

unsafe fn topology<'a>(t: *const AoiTopology) -> Result<&'a Topology, AoiStatus> {
    non_null(t, "topology")?;
    Ok(&(*t).0)
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], AoiStatus> {
    non_null(p, what)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], AoiStatus> {
    non_null(p, what)?;
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn check_len(n: usize, t: &Topology) -> Result<(), AoiStatus> {
    if n != t.len() {
        set_error(format!("array length {n} does not match {} nodes", t.len()));
        return Err(AoiStatus::Usage);
    }
    Ok(())
}

unsafe fn emit(out: *mut *mut AoiTopology, t: Topology) -> Result<(), AoiStatus> {
    *out = Box::into_raw(Box::new(AoiTopology(t)));
    Ok(())
}

/// Creates a topology from `n` normalized distances in `(0, 1]`.
///
/// # Safety
/// `distances` must point to `n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aoi_topology_new(
    distances: *const f64,
    n: usize,
    beta: f64,
    theta: f64,
    out: *mut *mut AoiTopology,
) -> AoiStatus {
    guard(|| {
        non_null(out, "out")?;
        let d = slice(distances, n, "distances")?.to_vec();
        emit(out, Topology::new(d, beta, theta).or_status()?)
    })
}

/// Samples `n` nodes uniformly in the unit disk (`beta = 2`, `theta = 1`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aoi_topology_sample(n: usize, seed: u64, out: *mut *mut AoiTopology) -> AoiStatus {
    guard(|| {
        non_null(out, "out")?;
        emit(out, Topology::sample_uniform_disk(n, seed).or_status()?)
    })
}

/// Reads a topology JSON file `{"beta", "theta", "distances"}`.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aoi_topology_read_json(path: *const c_char, out: *mut *mut AoiTopology) -> AoiStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(path, "path")?;
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            set_error("path is not valid UTF-8".into());
            return Err(AoiStatus::Usage);
        };
        emit(out, Topology::read_json(Path::new(path)).or_status()?)
    })
}

/// Releases a topology. Null is ignored.
///
/// # Safety
/// `t` must come from an `aoi_topology_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn aoi_topology_free(t: *mut AoiTopology) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aoi_topology_len(t: *const AoiTopology) -> usize {
    if t.is_null() {
        0
    } else {
        (*t).0.len()
    }
}

/// `d_ij = r_j^beta / (r_i^beta theta)`.
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aoi_interference_ratio(t: *const AoiTopology, i: usize, j: usize, out: *mut f64) -> AoiStatus {
    guard(|| {
        let t = topology(t)?;
        non_null(out, "out")?;
        *out = t.interference_ratio(i, j).or_status()?;
        Ok(())
    })
}

fn policy_from(probs: &[f64]) -> Result<Policy, AoiStatus> {
    Policy::new(probs.to_vec(), "ffi").or_status()
}

/// Per-node success probabilities of the policy `probs`.
///
/// # Safety
/// `probs` and `tau_out` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn aoi_success_probabilities(
    t: *const AoiTopology,
    probs: *const f64,
    n: usize,
    tau_out: *mut f64,
) -> AoiStatus {
    guard(|| {
        let t = topology(t)?;
        check_len(n, t)?;
        let policy = policy_from(slice(probs, n, "probs")?)?;
        let tau = spatial_aoi::channel::success_probabilities(t, &policy).or_status()?;
        slice_mut(tau_out, n, "tau_out")?.copy_from_slice(&tau);
        Ok(())
    })
}

/// Per-node expected AoI `1 / tau_i` (infinite where `tau_i = 0`).
///
/// # Safety
/// `probs` and `aoi_out` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn aoi_expected_aoi(t: *const AoiTopology, probs: *const f64, n: usize, aoi_out: *mut f64) -> AoiStatus {
    guard(|| {
        let t = topology(t)?;
        check_len(n, t)?;
        let policy = policy_from(slice(probs, n, "probs")?)?;
        let aoi = expected_aoi(t, &policy).or_status()?;
        slice_mut(aoi_out, n, "aoi_out")?.copy_from_slice(aoi.values());
        Ok(())
    })
}

/// Computes a policy of the given kind with default solver settings and
/// writes its `n` probabilities to `probs_out`. `info_out` may be null.
///
/// # Safety
/// `weights` must be null or hold `n` doubles; `probs_out` must hold `n`.
#[no_mangle]
pub unsafe extern "C" fn aoi_solve(
    t: *const AoiTopology,
    kind: AoiPolicyKind,
    weights: *const f64,
    aloha_p: f64,
    probs_out: *mut f64,
    n: usize,
    info_out: *mut AoiSolveInfo,
) -> AoiStatus {
    guard(|| {
        let t = topology(t)?;
        check_len(n, t)?;
        let out = slice_mut(probs_out, n, "probs_out")?;
        let cfg = SolverConfig::default();
        let mut info = AoiSolveInfo { residual: 0.0, sweeps: 0, converged: true };
        let probs = match kind {
            AoiPolicyKind::Ews | AoiPolicyKind::MinMax | AoiPolicyKind::ProportionalFair => {
                let report = match kind {
                    AoiPolicyKind::Ews => {
                        let w = if weights.is_null() { vec![1.0; n] } else { slice(weights, n, "weights")?.to_vec() };
                        spatial_aoi::solve_ews(t, &w, &cfg)
                    }
                    AoiPolicyKind::MinMax => spatial_aoi::solve_mm(t, &cfg),
                    _ => spatial_aoi::solve_pf(t, &cfg),
                }
                .or_status()?;
                info = AoiSolveInfo { residual: report.residual, sweeps: report.sweeps, converged: report.converged };
                report.policy.probs
            }
            AoiPolicyKind::TopologyAgnostic => spatial_aoi::solvers::ta_policy(t).or_status()?.probs,
            AoiPolicyKind::Aloha => {
                let p = (aloha_p > 0.0).then_some(aloha_p);
                sim::baseline_aloha(n, p).or_status()?.probs
            }
        };
        out.copy_from_slice(&probs);
        if !info_out.is_null() {
            *info_out = info;
        }
        Ok(())
    })
}

/// Topology-agnostic probability for a node at `radius` in an `n`-node network.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aoi_solve_ta(n: usize, radius: f64, out: *mut f64) -> AoiStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = spatial_aoi::solve_ta(n, radius).or_status()?;
        Ok(())
    })
}

/// Simulates `replications` runs of `horizon` slots and writes the pooled
/// per-node success rate and time-average AoI. Either output may be null.
///
/// # Safety
/// `probs` must hold `n` doubles; non-null outputs must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn aoi_simulate(
    t: *const AoiTopology,
    probs: *const f64,
    n: usize,
    horizon: u64,
    replications: usize,
    seed: u64,
    tau_hat_out: *mut f64,
    aoi_hat_out: *mut f64,
) -> AoiStatus {
    guard(|| {
        let t = topology(t)?;
        check_len(n, t)?;
        let policy = policy_from(slice(probs, n, "probs")?)?;
        let cfg = SimConfig { horizon, replications, seed, record_paths: false };
        let res = sim::run(t, &policy, &cfg).or_status()?;
        if !tau_hat_out.is_null() {
            slice_mut(tau_hat_out, n, "tau_hat_out")?.copy_from_slice(&res.tau_hat);
        }
        if !aoi_hat_out.is_null() {
            slice_mut(aoi_hat_out, n, "aoi_hat_out")?.copy_from_slice(&res.aoi_hat);
        }
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn aoi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn aoi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
