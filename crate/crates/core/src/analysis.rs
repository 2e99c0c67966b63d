//! Numerical checks of the structural results and the figure experiments.
//!
//! * [`check_bounds`]: the normalized-AoI chain
//!   `1 <= (1/N^2) sum h^S <= h^MM / N <= e/2` on a given topology.
//! * [`convexity_probe`]: random midpoint tests of elementwise convexity of
//!   `Phi(p, r)` in `p`.
//! * [`trace_pareto_boundary`]: maps weight vectors to boundary points.
//! * [`zpf_statistics`], [`sample_zpf`], [`ta_convergence_experiment`]: the
//!   large-network behaviour of the proportionally fair policy and its
//!   convergence to the topology-agnostic one.
//! * [`figure3`], [`figure4`], [`figure5`]: policy comparisons averaged over
//!   random topologies.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{aoi_of, Policy};
use crate::error::{AoiError, Result};
use crate::format::{row, sig9};
use crate::rng::{self, domain};
use crate::sim::{self, SimConfig};
use crate::solvers::{pareto_point, pf_coordinate, solve_ews, solve_mm, solve_pf, solve_ta, ta_policy, SolverConfig};
use crate::topology::{sample_radii, Topology};

/// Limit of the normalized min-max AoI on the worst-case topology.
pub const E_OVER_TWO: f64 = std::f64::consts::E / 2.0;

/// Relative slack on the upper bounds of [`check_bounds`].
pub const BOUND_SLACK: f64 = 0.01;

/// Absolute tolerance on the lower end of the chain.
pub const BOUND_TOL: f64 = 1e-9;

/// Relative tolerance of [`convexity_probe`].
pub const CONVEXITY_TOL: f64 = 1e-12;

/// `1 / (2 (1 - 1/N)^(N-1))`: normalized min-max AoI of `N` nodes on a circle.
pub fn finite_n_bound(n: usize) -> f64 {
    let n = n as f64;
    1.0 / (2.0 * (1.0 - 1.0 / n).powf(n - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    /// `(1/N^2) sum_i h_i^S` under the symmetric weighted-sum policy.
    pub lower: f64,
    /// `h^MM / N`.
    pub mid: f64,
    /// `e / 2`.
    pub upper: f64,
    /// Symmetric-topology value at this `N`.
    pub finite_n_upper: f64,
    /// `lower >= 1`.
    pub lower_ok: bool,
    /// `lower <= mid`.
    pub chain_ok: bool,
    /// `mid <= finite_n_upper * (1 + slack)`.
    pub finite_ok: bool,
    /// `mid <= e/2 * (1 + slack)`.
    pub limit_ok: bool,
    pub satisfied: bool,
}

/// Evaluates the normalized AoI chain on `topology` (requires `beta = 2`,
/// `theta = 1` and at least two nodes).
pub fn check_bounds(topology: &Topology, config: &SolverConfig) -> Result<BoundReport> {
    if !topology.is_default_channel() {
        return Err(AoiError::usage("bounds hold for beta = 2 and theta = 1 only"));
    }
    let n = topology.len();
    if n < 2 {
        return Err(AoiError::usage("bounds need at least two nodes"));
    }
    let ews = solve_ews(topology, &vec![1.0; n], config)?;
    let mm = solve_mm(topology, config)?;
    let nf = n as f64;
    let lower = ews.aoi.sum() / (nf * nf);
    let mid = mm.min_max_value() / nf;
    let finite_n_upper = finite_n_bound(n);
    let lower_ok = lower >= 1.0 - BOUND_TOL;
    let chain_ok = lower <= mid * (1.0 + BOUND_TOL);
    let finite_ok = mid <= finite_n_upper * (1.0 + BOUND_SLACK);
    let limit_ok = mid <= E_OVER_TWO * (1.0 + BOUND_SLACK);
    Ok(BoundReport {
        n,
        lower,
        mid,
        upper: E_OVER_TWO,
        finite_n_upper,
        lower_ok,
        chain_ok,
        finite_ok,
        limit_ok,
        satisfied: lower_ok && chain_ok && finite_ok && limit_ok,
    })
}

/// A convexity violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityWitness {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub lambda: f64,
    pub node: usize,
    /// `phi_i(lambda p1 + (1 - lambda) p2)`
    pub mixed: f64,
    /// `lambda phi_i(p1) + (1 - lambda) phi_i(p2)`
    pub chord: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityProbe {
    pub trials: usize,
    pub witnesses: Vec<ConvexityWitness>,
}

impl ConvexityProbe {
    pub fn passed(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// Per-node `(mixed, chord)` values for one convex combination.
pub fn convexity_gap(topology: &Topology, p1: &[f64], p2: &[f64], lambda: f64) -> Result<Vec<(f64, f64)>> {
    let n = topology.len();
    if p1.len() != n || p2.len() != n {
        return Err(AoiError::usage("policy length does not match topology"));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(AoiError::usage(format!("mixing weight must lie in [0, 1], got {lambda}")));
    }
    let mix: Vec<f64> = p1.iter().zip(p2).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
    let (h1, h2, hm) = (aoi_of(topology, p1), aoi_of(topology, p2), aoi_of(topology, &mix));
    Ok((0..n)
        .map(|i| {
            let chord = if lambda == 1.0 {
                h1.0[i]
            } else if lambda == 0.0 {
                h2.0[i]
            } else {
                lambda * h1.0[i] + (1.0 - lambda) * h2.0[i]
            };
            (hm.0[i], chord)
        })
        .collect())
}

/// Draws `trials` random `(p1, p2, lambda)` triples with `p` uniform on
/// `(0, 1]^N` and records every node where the mixed policy's AoI exceeds
/// the chord by more than [`CONVEXITY_TOL`] (relative).
pub fn convexity_probe(topology: &Topology, trials: usize, seed: u64) -> Result<ConvexityProbe> {
    if trials == 0 {
        return Err(AoiError::usage("convexity probe needs at least one trial"));
    }
    let n = topology.len();
    let found: Vec<Vec<ConvexityWitness>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(seed, &[domain::CONVEXITY, n as u64, k as u64]);
            let mut draw = || (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect::<Vec<f64>>();
            let (p1, p2) = (draw(), draw());
            let lambda: f64 = rng.gen();
            let gaps = convexity_gap(topology, &p1, &p2, lambda).expect("valid sizes");
            gaps.into_iter()
                .enumerate()
                .filter(|(_, (mixed, chord))| *mixed > chord * (1.0 + CONVEXITY_TOL))
                .map(|(node, (mixed, chord))| ConvexityWitness { p1: p1.clone(), p2: p2.clone(), lambda, node, mixed, chord })
                .collect()
        })
        .collect();
    Ok(ConvexityProbe { trials, witnesses: found.into_iter().flatten().collect() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub weights: Vec<f64>,
    pub policy: Vec<f64>,
    pub aoi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub points: Vec<TracePoint>,
    /// `(grid index, message)` for weight vectors whose solve failed.
    pub failures: Vec<(usize, String)>,
    /// Two-node topologies only: whether `h_2` is non-increasing in `h_1`.
    pub monotone: Option<bool>,
}

/// Log-spaced two-node weight grid `(ratio, 1)` with `ratio` running from
/// `hi` down to `lo`.
pub fn ratio_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<Vec<f64>>> {
    if !(lo > 0.0 && hi >= lo && count >= 2) {
        return Err(AoiError::usage("ratio grid needs 0 < lo <= hi and at least two points"));
    }
    let (a, b) = (hi.ln(), lo.ln());
    Ok((0..count)
        .map(|k| {
            let x = a + (b - a) * k as f64 / (count - 1) as f64;
            vec![x.exp(), 1.0]
        })
        .collect())
}

/// Solves the Pareto point of every weight vector in `grid`.
pub fn trace_pareto_boundary(topology: &Topology, grid: &[Vec<f64>], config: &SolverConfig) -> Result<BoundaryTrace> {
    if grid.iter().any(|w| w.iter().any(|x| x.is_nan() || *x <= 0.0)) {
        return Err(AoiError::usage("every weight in the grid must be strictly positive"));
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for (k, weights) in grid.iter().enumerate() {
        match pareto_point(topology, weights, config) {
            Ok(rep) => points.push(TracePoint { weights: weights.clone(), policy: rep.policy.probs, aoi: rep.aoi.0 }),
            Err(e) => failures.push((k, e.to_string())),
        }
    }
    let monotone = (topology.len() == 2).then(|| {
        let mut pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.aoi[0], p.aoi[1])).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        pairs.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12))
    });
    Ok(BoundaryTrace { points, failures, monotone })
}

pub fn trace_csv(trace: &BoundaryTrace) -> String {
    let n = trace.points.first().map_or(0, |p| p.aoi.len());
    let mut header: Vec<String> = Vec::new();
    header.extend((0..n).map(|i| format!("lambda_{i}")));
    header.extend((0..n).map(|i| format!("p_{i}")));
    header.extend((0..n).map(|i| format!("h_{i}")));
    let mut csv = row(header);
    for p in &trace.points {
        csv.push_str(&row(p.weights.iter().chain(&p.policy).chain(&p.aoi).map(|x| sig9(*x))));
    }
    csv
}

/// Mean and variance of one interferer's term `1 / (1 + r_i^2 / R_j^2)` in
/// the proportionally fair fixed point, for `R_j` uniform in the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZpfMoments {
    pub mean: f64,
    pub variance: f64,
}

pub fn zpf_statistics(radius: f64) -> Result<ZpfMoments> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(AoiError::usage(format!("radius must lie in (0, 1], got {radius}")));
    }
    let a = radius * radius;
    let tail = a * (1.0 / a).ln_1p();
    Ok(ZpfMoments { mean: 1.0 - tail, variance: 1.0 - 1.0 / (1.0 + a) - tail * tail })
}

/// Draws of `Z = 1 / p^PF` for a probe node at a fixed radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZpfSample {
    pub radius: f64,
    pub n: usize,
    pub z_values: Vec<f64>,
}

impl ZpfSample {
    pub fn mean(&self) -> f64 {
        self.z_values.iter().sum::<f64>() / self.z_values.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.z_values.iter().map(|z| (z - m).powi(2)).sum::<f64>() / (self.z_values.len() as f64 - 1.0)
    }

    /// Share of draws where the probe's probability was clamped to 1.
    pub fn clamp_fraction(&self) -> f64 {
        self.z_values.iter().filter(|z| **z <= 1.0).count() as f64 / self.z_values.len() as f64
    }
}

/// Topology with node 0 at `radius` and `n - 1` uniform-disk interferers
/// drawn from the stream `(seed, n, index)`.
pub fn probe_topology(n: usize, radius: f64, seed: u64, index: u64) -> Result<Topology> {
    if n < 2 {
        return Err(AoiError::usage("probe experiments need at least two nodes"));
    }
    let mut rng = rng::stream(seed, &[domain::PROBE, n as u64, index]);
    let mut distances = Vec::with_capacity(n);
    distances.push(radius);
    distances.extend(sample_radii(&mut rng, n - 1));
    Topology::from_distances(distances)
}

/// `samples` independent draws of `1 / p^PF` for a probe node at `radius`.
pub fn sample_zpf(n: usize, radius: f64, samples: usize, seed: u64) -> Result<ZpfSample> {
    if samples < 2 {
        return Err(AoiError::usage("need at least two samples"));
    }
    let z_values = (0..samples as u64)
        .into_par_iter()
        .map(|k| probe_topology(n, radius, seed, k).and_then(|t| pf_coordinate(&t, 0)).map(|p| 1.0 / p))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ZpfSample { radius, n, z_values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaDeviationRow {
    pub n: usize,
    pub samples: usize,
    pub failures: usize,
    pub median: f64,
    pub p95: f64,
    pub p_ta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaConvergence {
    pub probe_radius: f64,
    pub rows: Vec<TaDeviationRow>,
    /// Least-squares slope of `ln median` against `ln N`.
    pub slope: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    // Linear interpolation between order statistics.
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Least-squares slope of `y` on `x`.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// For each network size, compares the exact proportionally fair probability
/// of a probe node at `probe_radius` with the topology-agnostic one over
/// `samples` random placements of the other nodes.
pub fn ta_convergence_experiment(sizes: &[usize], samples: usize, probe_radius: f64, seed: u64) -> Result<TaConvergence> {
    if sizes.len() < 2 {
        return Err(AoiError::usage("need at least two network sizes"));
    }
    if let Some(n) = sizes.iter().find(|n| **n < 10) {
        return Err(AoiError::usage(format!("network sizes must be at least 10, got {n}")));
    }
    if samples == 0 {
        return Err(AoiError::usage("need at least one sample per size"));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let p_ta = solve_ta(n, probe_radius)?;
        let outcomes: Vec<Result<f64>> = (0..samples as u64)
            .into_par_iter()
            .map(|k| probe_topology(n, probe_radius, seed, k).and_then(|t| pf_coordinate(&t, 0)))
            .collect();
        let failures = outcomes.iter().filter(|o| o.is_err()).count();
        let mut dev: Vec<f64> = outcomes.into_iter().flatten().map(|p| (p - p_ta).abs()).collect();
        if dev.is_empty() {
            return Err(AoiError::usage(format!("every sample failed at N = {n}")));
        }
        dev.sort_by(f64::total_cmp);
        rows.push(TaDeviationRow { n, samples, failures, median: quantile(&dev, 0.5), p95: quantile(&dev, 0.95), p_ta });
    }
    let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.median.ln()).collect();
    Ok(TaConvergence { probe_radius, rows, slope: regression_slope(&x, &y) })
}

pub fn ta_convergence_csv(result: &TaConvergence) -> String {
    let mut csv = row(["n", "samples", "failures", "p_ta", "median_abs_dev", "p95_abs_dev"]);
    for r in &result.rows {
        csv.push_str(&row([
            r.n.to_string(),
            r.samples.to_string(),
            r.failures.to_string(),
            sig9(r.p_ta),
            sig9(r.median),
            sig9(r.p95),
        ]));
    }
    csv
}

/// Policies compared in the figure experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Ews,
    Mm,
    Pf,
    Ta,
    Aloha,
}

impl PolicyKind {
    pub const OPTIMIZED: [PolicyKind; 4] = [PolicyKind::Ews, PolicyKind::Mm, PolicyKind::Pf, PolicyKind::Ta];
    pub const ALL: [PolicyKind; 5] = [PolicyKind::Ews, PolicyKind::Mm, PolicyKind::Pf, PolicyKind::Ta, PolicyKind::Aloha];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Ews => "ews",
            PolicyKind::Mm => "mm",
            PolicyKind::Pf => "pf",
            PolicyKind::Ta => "ta",
            PolicyKind::Aloha => "aloha",
        }
    }

    /// Policy of this kind on `topology`. Weighted sum uses unit weights;
    /// ALOHA uses `aloha_p` (default `1/N`).
    pub fn policy(self, topology: &Topology, config: &SolverConfig, aloha_p: Option<f64>) -> Result<Policy> {
        let n = topology.len();
        Ok(match self {
            PolicyKind::Ews => solve_ews(topology, &vec![1.0; n], config)?.policy,
            PolicyKind::Mm => solve_mm(topology, config)?.policy,
            PolicyKind::Pf => solve_pf(topology, config)?.policy,
            PolicyKind::Ta => ta_policy(topology)?,
            PolicyKind::Aloha => sim::baseline_aloha(n, aloha_p)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure3Row {
    pub n: usize,
    pub topologies: usize,
    pub failures: usize,
    /// Network-average normalized AoI `(1/N^2) sum h_i` per policy, in
    /// [`PolicyKind::OPTIMIZED`] order.
    pub normalized_aoi: Vec<f64>,
    pub finite_n_bound: f64,
}

/// Network-average normalized AoI against `N`. Each sample draws
/// `max(sizes)` radii once and uses the first `N` of them, so networks grow
/// by adding nodes.
pub fn figure3(sizes: &[usize], topologies: usize, seed: u64, config: &SolverConfig) -> Result<Vec<Figure3Row>> {
    if sizes.is_empty() || topologies == 0 {
        return Err(AoiError::usage("figure 3 needs sizes and at least one topology"));
    }
    if let Some(n) = sizes.iter().find(|n| **n < 2) {
        return Err(AoiError::usage(format!("network sizes must be at least 2, got {n}")));
    }
    let max_n = *sizes.iter().max().expect("non-empty");
    let per_sample: Vec<Vec<Option<Vec<f64>>>> = (0..topologies as u64)
        .into_par_iter()
        .map(|s| {
            let full = Topology::sample_uniform_disk_keyed(max_n, seed, s).expect("valid size");
            sizes
                .iter()
                .map(|&n| {
                    let t = Topology::from_distances(full.distances()[..n].to_vec()).expect("prefix is valid");
                    PolicyKind::OPTIMIZED
                        .iter()
                        .map(|k| k.policy(&t, config, None).map(|p| aoi_of(&t, &p.probs).normalized_mean()))
                        .collect::<Result<Vec<f64>>>()
                        .ok()
                })
                .collect()
        })
        .collect();
    Ok(sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let ok: Vec<&Vec<f64>> = per_sample.iter().filter_map(|s| s[k].as_ref()).collect();
            let m = ok.len() as f64;
            let normalized_aoi =
                (0..PolicyKind::OPTIMIZED.len()).map(|c| ok.iter().map(|v| v[c]).sum::<f64>() / m).collect();
            Figure3Row { n, topologies, failures: topologies - ok.len(), normalized_aoi, finite_n_bound: finite_n_bound(n) }
        })
        .collect())
}

pub fn figure3_csv(rows: &[Figure3Row]) -> String {
    let mut csv = row(["n", "topologies", "failures", "ews", "mm", "pf", "ta", "finite_n_bound", "upper_bound"]);
    for r in rows {
        let mut fields = vec![r.n.to_string(), r.topologies.to_string(), r.failures.to_string()];
        fields.extend(r.normalized_aoi.iter().map(|x| sig9(*x)));
        fields.push(sig9(r.finite_n_bound));
        fields.push(sig9(E_OVER_TWO));
        csv.push_str(&row(fields));
    }
    csv
}

/// Radius intervals `(lo, hi]` used to pool nodes across random topologies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusBuckets(pub Vec<(f64, f64)>);

impl RadiusBuckets {
    /// `count` equal-width buckets covering `(0, 1]`.
    pub fn uniform(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(AoiError::usage("need at least one radius bucket"));
        }
        let w = 1.0 / count as f64;
        Ok(RadiusBuckets((0..count).map(|k| (k as f64 * w, if k + 1 == count { 1.0 } else { (k + 1) as f64 * w })).collect()))
    }

    pub fn find(&self, r: f64) -> Option<usize> {
        self.0.iter().position(|(lo, hi)| r > *lo && r <= *hi)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-bucket node averages for each policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketTable {
    pub buckets: RadiusBuckets,
    pub policies: Vec<PolicyKind>,
    /// Nodes that fell in each bucket (summed over topologies).
    pub counts: Vec<usize>,
    /// `values[b][k]`: mean over bucket `b` for policy `policies[k]`.
    pub values: Vec<Vec<f64>>,
    /// Simulated counterpart of `values`, when a simulation was requested.
    pub simulated: Option<Vec<Vec<f64>>>,
    pub failures: usize,
}

impl BucketTable {
    pub fn column(&self, kind: PolicyKind) -> Option<usize> {
        self.policies.iter().position(|k| *k == kind)
    }

    pub fn to_csv(&self) -> String {
        let mut header = vec!["r_lo".to_string(), "r_hi".to_string(), "nodes".to_string()];
        header.extend(self.policies.iter().map(|k| k.name().to_string()));
        if self.simulated.is_some() {
            header.extend(self.policies.iter().map(|k| format!("{}_sim", k.name())));
        }
        let mut csv = row(header);
        for (b, (lo, hi)) in self.buckets.0.iter().enumerate() {
            let mut fields = vec![sig9(*lo), sig9(*hi), self.counts[b].to_string()];
            fields.extend(self.values[b].iter().map(|x| sig9(*x)));
            if let Some(sim) = &self.simulated {
                fields.extend(sim[b].iter().map(|x| sig9(*x)));
            }
            csv.push_str(&row(fields));
        }
        csv
    }
}

/// What a bucket table averages per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeMetric {
    Probability,
    NormalizedAoi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketExperiment {
    pub n: usize,
    pub topologies: usize,
    pub buckets: RadiusBuckets,
    pub policies: Vec<PolicyKind>,
    pub aloha_p: Option<f64>,
    pub seed: u64,
    pub solver: SolverConfig,
    /// Also simulate every policy on every topology.
    pub sim: Option<SimConfig>,
}

impl BucketExperiment {
    pub fn new(n: usize, topologies: usize, seed: u64) -> Result<Self> {
        Ok(BucketExperiment {
            n,
            topologies,
            buckets: RadiusBuckets::uniform(8)?,
            policies: PolicyKind::ALL.to_vec(),
            aloha_p: None,
            seed,
            solver: SolverConfig::default(),
            sim: None,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 || self.topologies == 0 {
            return Err(AoiError::usage("bucket experiments need N >= 2 and at least one topology"));
        }
        if self.policies.is_empty() || self.buckets.is_empty() {
            return Err(AoiError::usage("bucket experiments need policies and buckets"));
        }
        if let Some(s) = &self.sim {
            s.validate()?;
        }
        Ok(())
    }

    fn run(&self, metric: NodeMetric) -> Result<BucketTable> {
        self.validate()?;
        let nb = self.buckets.len();
        let np = self.policies.len();
        type Sample = (Vec<f64>, Vec<Vec<f64>>, Option<Vec<Vec<f64>>>);
        let samples: Vec<Option<Sample>> = (0..self.topologies as u64)
            .into_par_iter()
            .map(|s| -> Option<Sample> {
                let t = Topology::sample_uniform_disk_keyed(self.n, self.seed, s).expect("valid size");
                let policies: Vec<Policy> =
                    self.policies.iter().map(|k| k.policy(&t, &self.solver, self.aloha_p)).collect::<Result<_>>().ok()?;
                let nf = self.n as f64;
                let analytic = policies
                    .iter()
                    .map(|p| match metric {
                        NodeMetric::Probability => p.probs.clone(),
                        NodeMetric::NormalizedAoi => aoi_of(&t, &p.probs).0.iter().map(|h| h / nf).collect(),
                    })
                    .collect();
                let simulated = self.sim.map(|cfg| {
                    policies
                        .iter()
                        .enumerate()
                        .map(|(k, p)| {
                            let cfg = SimConfig { seed: stream_seed(cfg.seed, s, k), record_paths: false, ..cfg };
                            let res = sim::run(&t, p, &cfg).expect("validated config");
                            res.aoi_hat.iter().map(|h| h / nf).collect()
                        })
                        .collect()
                });
                Some((t.distances().to_vec(), analytic, simulated))
            })
            .collect();
        let mut counts = vec![0usize; nb];
        let mut sums = vec![vec![0.0; np]; nb];
        let mut sim_sums = self.sim.map(|_| vec![vec![0.0; np]; nb]);
        let mut failures = 0;
        for sample in &samples {
            let Some((radii, analytic, simulated)) = sample else {
                failures += 1;
                continue;
            };
            for (i, r) in radii.iter().enumerate() {
                let Some(b) = self.buckets.find(*r) else { continue };
                counts[b] += 1;
                for k in 0..np {
                    sums[b][k] += analytic[k][i];
                    if let (Some(acc), Some(sim)) = (sim_sums.as_mut(), simulated.as_ref()) {
                        acc[b][k] += sim[k][i];
                    }
                }
            }
        }
        let average = |table: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            table
                .into_iter()
                .zip(&counts)
                .map(|(row, c)| row.into_iter().map(|x| if *c > 0 { x / *c as f64 } else { f64::NAN }).collect())
                .collect()
        };
        Ok(BucketTable {
            buckets: self.buckets.clone(),
            policies: self.policies.clone(),
            values: average(sums),
            simulated: sim_sums.map(average),
            counts,
            failures,
        })
    }
}

fn stream_seed(seed: u64, sample: u64, policy: usize) -> u64 {
    use rand::RngCore;
    rng::stream(seed, &[domain::INSTANCE, sample, policy as u64]).next_u64()
}

/// Mean transmission probability per radius bucket.
pub fn figure4(experiment: &BucketExperiment) -> Result<BucketTable> {
    experiment.run(NodeMetric::Probability)
}

/// Mean normalized AoI `h_i / N` per radius bucket (analytic, and simulated
/// when `experiment.sim` is set).
pub fn figure5(experiment: &BucketExperiment) -> Result<BucketTable> {
    experiment.run(NodeMetric::NormalizedAoi)
}
