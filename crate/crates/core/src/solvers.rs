//! Optimal transmission policies.
//!
//! Every optimal policy here sits on the Pareto boundary of achievable AoI
//! and is the (clamped) solution of the weighted fixed-point system
//!
//! ```text
//! f_i(p_i) = lambda_i / p_i - sum_{j != i} lambda_j / (1 + d_ji - p_i) = 0
//! ```
//!
//! for some positive weight vector `lambda`. The objectives differ only in how
//! the weights are chosen:
//!
//! * proportional fairness uses `lambda = 1`;
//! * weighted-sum AoI uses `lambda = alpha * h`, where `h` is the AoI the
//!   policy itself produces (an outer fixed point);
//! * min-max AoI uses the weights that equalize every node's AoI, found by
//!   multiplicative dual ascent.
//!
//! `f_i` is strictly decreasing on `(0, 1]` and unbounded as `p_i -> 0`, so each
//! coordinate is located by bisection and clamped to 1 when `f_i(1) >= 0`.

use serde::{Deserialize, Serialize};

use crate::channel::{aoi_of, AoiVector, Policy};
use crate::error::{AoiError, Result};
use crate::topology::Topology;

/// Tolerances and step sizes shared by the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Bound on the fixed-point residual of a converged report.
    pub tol_fixed_point: f64,
    /// Outer-loop tolerance: max policy change (weighted sum) or relative AoI
    /// spread (min-max).
    pub tol_outer: f64,
    /// Cap on the total number of Gauss-Seidel sweeps.
    pub max_sweeps: usize,
    /// Relaxation of the weighted-sum multiplier update, in `(0, 1]`.
    pub damping: f64,
    /// Step of the min-max multiplicative dual update.
    pub mm_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol_fixed_point: 1e-10, tol_outer: 1e-8, max_sweeps: 10_000, damping: 0.5, mm_step: 0.1 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_fixed_point > 0.0 && self.tol_outer > 0.0) {
            return Err(AoiError::usage("solver tolerances must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(AoiError::usage(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.mm_step > 0.0 && self.mm_step.is_finite()) {
            return Err(AoiError::usage(format!("mm_step must be positive, got {}", self.mm_step)));
        }
        if self.max_sweeps == 0 {
            return Err(AoiError::usage("max_sweeps must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of a solve.
///
/// `residual` is measured with the multipliers rescaled so that their largest
/// entry is 1 (the fixed point is invariant to a common scale).
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub policy: Policy,
    pub aoi: AoiVector,
    pub multipliers: Vec<f64>,
    pub residual: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// Outer-loop diagnostic per iteration (residual or relative spread).
    pub trace: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ReportJson {
    policy: Vec<f64>,
    aoi: AoiVector,
    multipliers: Vec<f64>,
    residual: f64,
    sweeps: usize,
    converged: bool,
}

impl Serialize for SolverReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReportJson {
            policy: self.policy.probs.clone(),
            aoi: self.aoi.clone(),
            multipliers: self.multipliers.clone(),
            residual: self.residual,
            sweeps: self.sweeps,
            converged: self.converged,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SolverReport {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ReportJson::deserialize(d)?;
        let policy = Policy::new(raw.policy, "").map_err(serde::de::Error::custom)?;
        Ok(SolverReport {
            policy,
            aoi: raw.aoi,
            multipliers: raw.multipliers,
            residual: raw.residual,
            sweeps: raw.sweeps,
            converged: raw.converged,
            trace: Vec::new(),
        })
    }
}

impl SolverReport {
    /// Common AoI level of a min-max solution: the mean of the (equalized)
    /// per-node values.
    pub fn min_max_value(&self) -> f64 {
        self.aoi.mean()
    }

    /// Indices of nodes whose probability was clamped to 1.
    pub fn clamped(&self) -> Vec<usize> {
        self.policy.probs.iter().enumerate().filter(|(_, p)| **p >= 1.0).map(|(i, _)| i).collect()
    }

    fn trivial(label: &str) -> Self {
        SolverReport {
            policy: Policy { probs: vec![1.0], label: label.to_string() },
            aoi: AoiVector(vec![1.0]),
            multipliers: vec![1.0],
            residual: 0.0,
            sweeps: 0,
            converged: true,
            trace: Vec::new(),
        }
    }
}

fn check_weights(weights: &[f64], n: usize, what: &str) -> Result<()> {
    if weights.len() != n {
        return Err(AoiError::usage(format!("{} {what} for {n} nodes", weights.len())));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(AoiError::usage(format!("{what} must be positive and finite, got {w}")));
    }
    Ok(())
}

fn normalize_max(v: &mut [f64]) {
    let m = v.iter().copied().fold(0.0, f64::max);
    v.iter_mut().for_each(|x| *x /= m);
}

/// `f_i(p)` for the weight vector `lambda`.
pub fn fixed_point_value(topology: &Topology, lambda: &[f64], i: usize, p: f64) -> f64 {
    let interference: f64 = (0..topology.len())
        .filter(|&j| j != i)
        .map(|j| lambda[j] / (1.0 + topology.ratio(j, i) - p))
        .sum();
    lambda[i] / p - interference
}

/// Fixed-point residual of `probs` under weights `lambda` (rescaled to max 1):
/// `|f_i(p_i)|` on unclamped coordinates, `max(0, -f_i(1))` on clamped ones.
pub fn fixed_point_residual(topology: &Topology, lambda: &[f64], probs: &[f64]) -> f64 {
    let mut lambda = lambda.to_vec();
    normalize_max(&mut lambda);
    residual_normalized(topology, &lambda, probs)
}

fn residual_normalized(topology: &Topology, lambda: &[f64], probs: &[f64]) -> f64 {
    probs
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let f = fixed_point_value(topology, lambda, i, p);
            if p >= 1.0 {
                (-f).max(0.0)
            } else {
                f.abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Root of a strictly decreasing `f` on `(lo, hi)` with `f(lo+) > 0 > f(hi)`,
/// refined until the bracket cannot be split further in f64.
fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_hi = f(hi);
    let mut f_lo = f64::INFINITY;
    for _ in 0..2_000 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm > 0.0 {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    if lo > 0.0 && f_lo.abs() < f_hi.abs() {
        lo
    } else {
        hi
    }
}

/// Clamped root of `f_i` for normalized weights.
fn solve_coordinate(topology: &Topology, lambda: &[f64], i: usize, offsets: &mut Vec<(f64, f64)>) -> f64 {
    offsets.clear();
    offsets.extend((0..topology.len()).filter(|&j| j != i).map(|j| (lambda[j], 1.0 + topology.ratio(j, i))));
    let f = |p: f64| lambda[i] / p - offsets.iter().map(|(w, c)| w / (c - p)).sum::<f64>();
    if f(1.0) >= 0.0 {
        1.0
    } else {
        bisect_decreasing(f, 0.0, 1.0)
    }
}

/// Solves coordinate `i` of the proportionally fair policy in isolation.
///
/// The unit-weight system is fully separable, so this equals entry `i` of
/// [`solve_pf`] at `O(N)` cost.
pub fn pf_coordinate(topology: &Topology, i: usize) -> Result<f64> {
    if i >= topology.len() {
        return Err(AoiError::usage(format!("node index {i} out of range")));
    }
    if topology.len() == 1 {
        return Ok(1.0);
    }
    let ones = vec![1.0; topology.len()];
    Ok(solve_coordinate(topology, &ones, i, &mut Vec::new()))
}

struct Inner {
    probs: Vec<f64>,
    residual: f64,
    sweeps: usize,
}

/// Gauss-Seidel sweeps over the coordinates of the weighted fixed point.
/// `lambda` must already be normalized to max 1.
fn pareto_inner(topology: &Topology, lambda: &[f64], start: &[f64], config: &SolverConfig, budget: usize) -> Result<Inner> {
    let n = topology.len();
    let mut probs = start.to_vec();
    let mut scratch = Vec::with_capacity(n);
    let mut trace = Vec::new();
    for sweep in 1..=budget {
        let mut moved = false;
        for i in 0..n {
            let p = solve_coordinate(topology, lambda, i, &mut scratch);
            moved |= p != probs[i];
            probs[i] = p;
        }
        let residual = residual_normalized(topology, lambda, &probs);
        trace.push(residual);
        if residual <= config.tol_fixed_point {
            return Ok(Inner { probs, residual, sweeps: sweep });
        }
        if !moved {
            // A further sweep reproduces the same point.
            break;
        }
    }
    Err(AoiError::NoConvergence {
        solver: "pareto_point",
        residual: trace.last().copied().unwrap_or(f64::NAN),
        sweeps: trace.len(),
        trace,
    })
}

/// Pareto-boundary policy for the weight vector `weights`.
pub fn pareto_point(topology: &Topology, weights: &[f64], config: &SolverConfig) -> Result<SolverReport> {
    config.validate()?;
    let n = topology.len();
    check_weights(weights, n, "weights")?;
    if n == 1 {
        return Ok(SolverReport::trivial("pareto"));
    }
    let mut lambda = weights.to_vec();
    normalize_max(&mut lambda);
    let inner = pareto_inner(topology, &lambda, &vec![1.0 / n as f64; n], config, config.max_sweeps)?;
    let aoi = aoi_of(topology, &inner.probs);
    Ok(SolverReport {
        policy: Policy { probs: inner.probs, label: format!("pareto{weights:?}") },
        aoi,
        multipliers: lambda,
        residual: inner.residual,
        sweeps: inner.sweeps,
        converged: true,
        trace: vec![inner.residual],
    })
}

/// Proportionally fair policy: the unit-weight Pareto point.
pub fn solve_pf(topology: &Topology, config: &SolverConfig) -> Result<SolverReport> {
    let mut report = pareto_point(topology, &vec![1.0; topology.len()], config)?;
    report.policy.label = "pf".to_string();
    Ok(report)
}

/// Minimizes `sum_i alpha_i h_i`.
///
/// Outer fixed point on the multipliers: solve the Pareto point for `lambda`,
/// evaluate its AoI, then relax `lambda` towards `alpha * h` (normalized to
/// max 1). Stops once the policy moves less than `tol_outer` and the
/// multipliers reproduce the policy to `tol_fixed_point`.
pub fn solve_ews(topology: &Topology, alpha: &[f64], config: &SolverConfig) -> Result<SolverReport> {
    config.validate()?;
    let n = topology.len();
    check_weights(alpha, n, "weights")?;
    if n == 1 {
        return Ok(SolverReport::trivial("ews"));
    }
    let mut lambda = alpha.to_vec();
    normalize_max(&mut lambda);
    let mut previous = vec![1.0 / n as f64; n];
    let mut sweeps = 0;
    let mut trace = Vec::new();
    while sweeps < config.max_sweeps {
        let inner = pareto_inner(topology, &lambda, &previous, config, config.max_sweeps - sweeps)?;
        sweeps += inner.sweeps;
        let aoi = aoi_of(topology, &inner.probs);
        if let Some(node) = aoi.values().iter().position(|h| !h.is_finite()) {
            return Err(AoiError::Diverged { solver: "solve_ews", node });
        }
        let mut target: Vec<f64> = alpha.iter().zip(aoi.values()).map(|(a, h)| a * h).collect();
        normalize_max(&mut target);
        let residual = residual_normalized(topology, &target, &inner.probs);
        let change = inner.probs.iter().zip(&previous).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        trace.push(residual);
        if change < config.tol_outer && residual <= config.tol_fixed_point {
            return Ok(SolverReport {
                policy: Policy { probs: inner.probs, label: format!("ews{alpha:?}") },
                aoi,
                multipliers: target,
                residual,
                sweeps,
                converged: true,
                trace,
            });
        }
        for (l, t) in lambda.iter_mut().zip(&target) {
            *l = (1.0 - config.damping) * *l + config.damping * t;
        }
        normalize_max(&mut lambda);
        previous = inner.probs;
    }
    Err(AoiError::NoConvergence {
        solver: "solve_ews",
        residual: trace.last().copied().unwrap_or(f64::NAN),
        sweeps,
        trace,
    })
}

/// Minimizes `max_i h_i`.
///
/// Multiplicative dual ascent on the Pareto weights: nodes whose log-AoI is
/// above the network mean get heavier weights. After each step the weights
/// are rescaled to sum to the mean log-AoI. Stops when
/// `max h - min h < tol_outer * mean h`.
pub fn solve_mm(topology: &Topology, config: &SolverConfig) -> Result<SolverReport> {
    config.validate()?;
    let n = topology.len();
    if n == 1 {
        return Ok(SolverReport::trivial("mm"));
    }
    let mut lambda = vec![1.0; n];
    let mut probs = vec![1.0 / n as f64; n];
    let mut sweeps = 0;
    let mut trace = Vec::new();
    while sweeps < config.max_sweeps {
        let mut normalized = lambda.clone();
        normalize_max(&mut normalized);
        let inner = pareto_inner(topology, &normalized, &probs, config, config.max_sweeps - sweeps)?;
        sweeps += inner.sweeps;
        probs = inner.probs;
        let aoi = aoi_of(topology, &probs);
        if let Some(node) = aoi.values().iter().position(|h| !h.is_finite()) {
            return Err(AoiError::Diverged { solver: "solve_mm", node });
        }
        let mean = aoi.mean();
        let spread = aoi.max() - aoi.min();
        trace.push(spread / mean);
        if spread < config.tol_outer * mean {
            return Ok(SolverReport {
                policy: Policy { probs, label: "mm".to_string() },
                aoi,
                multipliers: lambda,
                residual: inner.residual,
                sweeps,
                converged: true,
                trace,
            });
        }
        let logs: Vec<f64> = aoi.values().iter().map(|h| h.ln()).collect();
        let mean_log = logs.iter().sum::<f64>() / n as f64;
        for (l, lh) in lambda.iter_mut().zip(&logs) {
            *l *= (config.mm_step * (lh - mean_log)).exp();
        }
        let total: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|l| *l *= mean_log / total);
    }
    Err(AoiError::NoConvergence {
        solver: "solve_mm",
        residual: trace.last().copied().unwrap_or(f64::NAN),
        sweeps,
        trace,
    })
}

/// Topology-agnostic probability for a node at `radius` in an `n`-node
/// network (path-loss exponent 2, unit capture threshold).
pub fn solve_ta(n: usize, radius: f64) -> Result<f64> {
    if n < 2 {
        return Err(AoiError::usage("topology-agnostic policy needs at least two nodes"));
    }
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(AoiError::usage(format!("radius must lie in (0, 1], got {radius}")));
    }
    let r2 = radius * radius;
    let mean_share = 1.0 - r2 * (1.0 / r2).ln_1p();
    Ok((1.0 / ((n - 1) as f64 * mean_share)).min(1.0))
}

/// Topology-agnostic policy for every node of `topology`.
pub fn ta_policy(topology: &Topology) -> Result<Policy> {
    if !topology.is_default_channel() {
        return Err(AoiError::usage(format!(
            "topology-agnostic policy requires beta = 2 and theta = 1 (got beta = {}, theta = {})",
            topology.beta(),
            topology.theta()
        )));
    }
    let n = topology.len();
    let probs = topology.distances().iter().map(|&r| solve_ta(n, r)).collect::<Result<Vec<_>>>()?;
    Ok(Policy { probs, label: "ta".to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{objective_value, Objective};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    /// Central-difference gradient of `g` at `p` in coordinate `i`.
    fn partial(g: &dyn Fn(&[f64]) -> f64, p: &[f64], i: usize) -> f64 {
        let h = 1e-6 * p[i].max(1e-3);
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[i] += h;
        b[i] -= h;
        (g(&a) - g(&b)) / (2.0 * h)
    }

    fn weighted_log_aoi<'a>(t: &'a Topology, lambda: &[f64]) -> impl Fn(&[f64]) -> f64 + 'a {
        let lambda = lambda.to_vec();
        move |p: &[f64]| aoi_of(t, p).values().iter().zip(&lambda).map(|(h, l)| l * h.ln()).sum()
    }

    #[test]
    fn pareto_point_examples() {
        let t = Topology::symmetric(2, 0.6).unwrap();
        let r = pareto_point(&t, &[1.0, 1.0], &cfg()).unwrap();
        assert_eq!(r.policy.probs, vec![1.0, 1.0]);

        let r = pareto_point(&t, &[2.0, 1.0], &cfg()).unwrap();
        assert_eq!(r.policy.probs[0], 1.0);
        assert_relative_eq!(r.policy.probs[1], 2.0 / 3.0, max_relative = 1e-12);
        assert!(r.converged && r.residual <= 1e-10);

        for n in [3, 7, 20] {
            let t = Topology::symmetric(n, 0.9).unwrap();
            let r = pareto_point(&t, &vec![1.0; n], &cfg()).unwrap();
            for p in &r.policy.probs {
                assert_relative_eq!(*p, 2.0 / n as f64, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn pareto_point_rejects_bad_weights() {
        let t = Topology::symmetric(2, 0.6).unwrap();
        assert!(matches!(pareto_point(&t, &[1.0, 0.0], &cfg()), Err(AoiError::Usage(_))));
        assert!(matches!(pareto_point(&t, &[1.0], &cfg()), Err(AoiError::Usage(_))));
        let bad = SolverConfig { damping: 0.0, ..cfg() };
        assert!(matches!(pareto_point(&t, &[1.0, 1.0], &bad), Err(AoiError::Usage(_))));
    }

    #[test]
    fn pf_examples() {
        let t = Topology::from_distances(vec![0.5]).unwrap();
        assert_eq!(solve_pf(&t, &cfg()).unwrap().policy.probs, vec![1.0]);

        let t = Topology::from_distances(vec![0.5, 1.0]).unwrap();
        let r = solve_pf(&t, &cfg()).unwrap();
        assert_relative_eq!(r.policy.probs[0], 0.625, max_relative = 1e-12);
        assert_eq!(r.policy.probs[1], 1.0);
        // Unclamped root of node 2 would be 2.5, so f_2(1) > 0.
        assert!(fixed_point_value(&t, &[1.0, 1.0], 1, 1.0) > 0.0);
        assert!(fixed_point_value(&t, &[1.0, 1.0], 0, 0.625).abs() < 1e-12);

        for n in [2, 5, 10, 50] {
            let t = Topology::symmetric(n, 1.0).unwrap();
            for p in solve_pf(&t, &cfg()).unwrap().policy.probs {
                assert!((p - 2.0 / n as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pf_coordinate_matches_full_solve() {
        let t = Topology::sample_uniform_disk(40, 3).unwrap();
        let full = solve_pf(&t, &cfg()).unwrap();
        for i in [0, 13, 39] {
            assert_eq!(pf_coordinate(&t, i).unwrap(), full.policy.probs[i]);
        }
        assert!(pf_coordinate(&t, 40).is_err());
    }

    #[test]
    fn pareto_gradient_vanishes_by_finite_differences() {
        let t = Topology::new(vec![0.2, 0.45, 0.7, 0.95, 0.6], 3.0, 0.7).unwrap();
        let lambda = [0.4, 1.3, 0.9, 2.0, 0.7];
        let r = pareto_point(&t, &lambda, &cfg()).unwrap();
        let g = weighted_log_aoi(&t, &lambda);
        for i in 0..5 {
            let d = partial(&g, &r.policy.probs, i);
            if r.policy.probs[i] < 1.0 {
                assert!(d.abs() < 1e-6, "coordinate {i}: gradient {d}");
            } else {
                assert!(d <= 1e-6, "clamped coordinate {i} could still improve: {d}");
            }
        }
    }

    #[test]
    fn ews_examples() {
        let t = Topology::symmetric(2, 0.3).unwrap();
        let r = solve_ews(&t, &[1.0, 1.0], &cfg()).unwrap();
        assert_eq!(r.policy.probs, vec![1.0, 1.0]);
        assert_eq!(r.aoi.0, vec![2.0, 2.0]);

        let t = Topology::symmetric(10, 1.0).unwrap();
        let r = solve_ews(&t, &[1.0; 10], &cfg()).unwrap();
        for p in &r.policy.probs {
            assert_relative_eq!(*p, 0.2, max_relative = 1e-10);
        }
        assert_relative_eq!(r.aoi.normalized_mean(), 1.0 / (2.0 * 0.9f64.powi(9)), max_relative = 1e-10);
        assert_relative_eq!(r.aoi.normalized_mean(), 1.290_587_396, epsilon = 1e-9);

        let t = Topology::from_distances(vec![0.4]).unwrap();
        let r = solve_ews(&t, &[5.0], &cfg()).unwrap();
        assert_eq!((r.policy.probs.clone(), r.aoi.0.clone()), (vec![1.0], vec![1.0]));
    }

    #[test]
    fn ews_satisfies_kkt_by_finite_differences() {
        let t = Topology::sample_uniform_disk(8, 21).unwrap();
        let alpha = [1.0, 2.0, 0.5, 1.0, 3.0, 1.0, 0.8, 1.5];
        let r = solve_ews(&t, &alpha, &cfg()).unwrap();
        let g = |p: &[f64]| objective_value(&Objective::WeightedSum(alpha.to_vec()), &aoi_of(&t, p)).unwrap();
        let scale = g(&r.policy.probs);
        for i in 0..8 {
            let d = partial(&g, &r.policy.probs, i);
            if r.policy.probs[i] < 1.0 {
                assert!(d.abs() < 1e-5 * scale, "coordinate {i}: gradient {d}");
            } else {
                assert!(d <= 1e-5 * scale);
            }
        }
    }

    #[test]
    fn mm_examples() {
        let t = Topology::symmetric(2, 0.8).unwrap();
        let r = solve_mm(&t, &cfg()).unwrap();
        assert_eq!(r.policy.probs, vec![1.0, 1.0]);
        assert_relative_eq!(r.min_max_value(), 2.0, max_relative = 1e-12);

        let t = Topology::symmetric(10, 0.8).unwrap();
        let r = solve_mm(&t, &cfg()).unwrap();
        for p in &r.policy.probs {
            assert_relative_eq!(*p, 0.2, max_relative = 1e-10);
        }
        assert_relative_eq!(r.min_max_value() / 10.0, 1.0 / (2.0 * 0.9f64.powi(9)), max_relative = 1e-9);

        let t = Topology::sample_uniform_disk(50, 8).unwrap();
        let r = solve_mm(&t, &cfg()).unwrap();
        assert!(r.min_max_value() / 50.0 <= std::f64::consts::E / 2.0 + 0.05);
        let h = r.aoi.values();
        let mean = r.aoi.mean();
        let sd = (h.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / h.len() as f64).sqrt();
        assert!(sd / mean < 1e-4);
    }

    #[test]
    fn mm_beats_random_policies() {
        let t = Topology::sample_uniform_disk(6, 4).unwrap();
        let best = solve_mm(&t, &cfg()).unwrap().aoi.max();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p: Vec<f64> = (0..6).map(|_| rng.gen::<f64>()).collect();
            assert!(aoi_of(&t, &p).max() >= best * (1.0 - 1e-9));
        }
    }

    #[test]
    fn ta_examples() {
        assert_relative_eq!(solve_ta(51, 1.0).unwrap(), 1.0 / (50.0 * (1.0 - 2f64.ln())), max_relative = 1e-14);
        assert_relative_eq!(solve_ta(51, 1.0).unwrap(), 0.065_178, epsilon = 1e-6);
        assert_relative_eq!(solve_ta(51, 0.5).unwrap(), 1.0 / (50.0 * (1.0 - 0.25 * 5f64.ln())), max_relative = 1e-14);
        assert_relative_eq!(solve_ta(51, 0.5).unwrap(), 0.033_464_933, epsilon = 1e-9);
        assert_relative_eq!(solve_ta(11, 1e-9).unwrap(), 0.1, max_relative = 1e-12);
        assert_eq!(solve_ta(2, 1.0).unwrap(), 1.0);
        assert!(solve_ta(1, 0.5).is_err());
        assert!(solve_ta(5, 0.0).is_err());

        let t = Topology::new(vec![0.5, 1.0], 3.0, 1.0).unwrap();
        assert!(ta_policy(&t).is_err());
        let t = Topology::new(vec![0.5, 1.0], 2.0, 2.0).unwrap();
        assert!(ta_policy(&t).is_err());
        let t = Topology::from_distances(vec![0.5]).unwrap();
        assert!(ta_policy(&t).is_err());
    }

    #[test]
    fn serialized_report_has_exact_fields() {
        let t = Topology::from_distances(vec![0.5, 1.0]).unwrap();
        let r = solve_pf(&t, &cfg()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["aoi", "converged", "multipliers", "policy", "residual", "sweeps"]);
        let back: SolverReport = serde_json::from_value(v).unwrap();
        assert_eq!(back.policy.probs, r.policy.probs);
        assert_eq!(back.aoi, r.aoi);
    }

    fn random_instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..9).prop_flat_map(|n| {
            (proptest::collection::vec(0.05f64..=1.0, n), proptest::collection::vec(0.1f64..10.0, n))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn weight_scaling_is_invisible((r, lambda) in random_instance(), c in 0.001f64..1000.0) {
            let t = Topology::from_distances(r).unwrap();
            let a = pareto_point(&t, &lambda, &cfg()).unwrap();
            let scaled: Vec<f64> = lambda.iter().map(|l| l * c).collect();
            let b = pareto_point(&t, &scaled, &cfg()).unwrap();
            for (x, y) in a.policy.probs.iter().zip(&b.policy.probs) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn single_coordinate_moves_never_dominate((r, lambda) in random_instance()) {
            let t = Topology::from_distances(r).unwrap();
            let rep = pareto_point(&t, &lambda, &cfg()).unwrap();
            let base = rep.aoi.values();
            for i in 0..t.len() {
                for eps in [1e-4, -1e-4] {
                    let mut q = rep.policy.probs.clone();
                    q[i] = (q[i] + eps).clamp(0.0, 1.0);
                    let h = aoi_of(&t, &q);
                    let all_better = h.values().iter().zip(base).all(|(a, b)| a < b);
                    prop_assert!(!all_better);
                }
            }
        }

        #[test]
        fn converged_solvers_beat_random_policies((r, alpha) in random_instance(), seed in any::<u64>()) {
            let t = Topology::from_distances(r).unwrap();
            let n = t.len();
            let ews = solve_ews(&t, &alpha, &cfg()).unwrap();
            let mm = solve_mm(&t, &cfg()).unwrap();
            let pf = solve_pf(&t, &cfg()).unwrap();
            let ews_obj = Objective::WeightedSum(alpha.clone());
            let ews_best = objective_value(&ews_obj, &ews.aoi).unwrap();
            let mm_best = objective_value(&Objective::MinMax, &mm.aoi).unwrap();
            let pf_best = objective_value(&Objective::ProportionalFair, &pf.aoi).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..100 {
                let p: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                let h = aoi_of(&t, &p);
                prop_assert!(objective_value(&ews_obj, &h).unwrap() >= ews_best * (1.0 - 1e-9));
                prop_assert!(objective_value(&Objective::MinMax, &h).unwrap() >= mm_best * (1.0 - 1e-9));
                prop_assert!(objective_value(&Objective::ProportionalFair, &h).unwrap() >= pf_best - 1e-9 * pf_best.abs());
            }
        }
    }
}
