//! Slot-level Monte Carlo simulation of the random access network.
//!
//! Each slot every node transmits independently with its policy probability
//! and draws a fresh Rayleigh power gain `K^2 ~ Exp(1)`. A transmitter is
//! received when `r_i^-b K_i^2 > theta * sum_{other transmitters} r_j^-b K_j^2`.
//! Noise is neglected, so a lone transmitter is always received.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::channel::{aoi_of, taus, Policy};
use crate::error::{AoiError, Result};
use crate::format::{row, sig9};
use crate::rng::{self, domain};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Slots per replication.
    pub horizon: u64,
    pub replications: usize,
    pub seed: u64,
    /// Keep the per-slot AoI of every node for the first replication.
    pub record_paths: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { horizon: 100_000, replications: 10, seed: 1, record_paths: false }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(AoiError::usage("simulation horizon must be at least one slot"));
        }
        if self.replications == 0 {
            return Err(AoiError::usage("simulation needs at least one replication"));
        }
        Ok(())
    }
}

/// Empirical per-node statistics pooled over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// Fraction of slots in which the node was received.
    pub tau_hat: Vec<f64>,
    /// `(1/T) sum_t A_i(t)`, averaged over replications.
    pub aoi_hat: Vec<f64>,
    /// 95% half-widths across replications (`NaN` with a single replication).
    pub ci_tau: Vec<f64>,
    pub ci_aoi: Vec<f64>,
    /// `paths[i][t]`: AoI of node `i` after slot `t + 1` in replication 0.
    pub paths: Option<Vec<Vec<u32>>>,
    pub horizon: u64,
    pub replications: usize,
}

/// Reusable buffers for [`step_slot_into`].
#[derive(Debug, Default)]
pub struct SlotScratch {
    transmitters: Vec<(usize, f64)>,
}

/// One slot: returns which nodes were received.
pub fn step_slot<R: Rng>(topology: &Topology, policy: &Policy, rng: &mut R) -> Result<Vec<bool>> {
    policy.check_against(topology)?;
    let mut success = vec![false; topology.len()];
    step_slot_into(topology, &policy.probs, rng, &mut SlotScratch::default(), &mut success);
    Ok(success)
}

/// Allocation-free slot step. `success` must have one entry per node.
pub fn step_slot_into<R: Rng>(
    topology: &Topology,
    probs: &[f64],
    rng: &mut R,
    scratch: &mut SlotScratch,
    success: &mut [bool],
) {
    let w = topology.path_powers();
    let tx = &mut scratch.transmitters;
    tx.clear();
    for (j, &p) in probs.iter().enumerate() {
        if rng.gen::<f64>() < p {
            let gain: f64 = rng.sample(Exp1);
            tx.push((j, gain / w[j]));
        }
    }
    success.iter_mut().for_each(|s| *s = false);
    let theta = topology.theta();
    for (k, &(i, power)) in tx.iter().enumerate() {
        // Interference summed without node i itself, so that at theta >= 1
        // two receptions in one slot are impossible even under rounding.
        let interference: f64 = tx.iter().enumerate().filter(|(m, _)| *m != k).map(|(_, (_, q))| q).sum();
        success[i] = power > theta * interference;
    }
}

struct Replication {
    successes: Vec<u64>,
    age_sum: Vec<u64>,
    paths: Option<Vec<Vec<u32>>>,
}

fn run_replication(topology: &Topology, probs: &[f64], config: &SimConfig, index: usize) -> Replication {
    let n = topology.len();
    let mut rng = rng::stream(config.seed, &[domain::SIMULATION, index as u64]);
    let mut scratch = SlotScratch::default();
    let mut success = vec![false; n];
    let mut age = vec![1u64; n];
    let mut successes = vec![0u64; n];
    let mut age_sum = vec![0u64; n];
    let mut paths = (config.record_paths && index == 0).then(|| vec![Vec::with_capacity(config.horizon as usize); n]);
    for _ in 0..config.horizon {
        step_slot_into(topology, probs, &mut rng, &mut scratch, &mut success);
        for i in 0..n {
            if success[i] {
                age[i] = 1;
                successes[i] += 1;
            } else {
                age[i] += 1;
            }
            age_sum[i] += age[i];
        }
        if let Some(paths) = paths.as_mut() {
            for (path, a) in paths.iter_mut().zip(&age) {
                path.push(u32::try_from(*a).unwrap_or(u32::MAX));
            }
        }
    }
    Replication { successes, age_sum, paths }
}

fn mean_and_half_width(samples: &[f64]) -> (f64, f64) {
    let r = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / r;
    if samples.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
    let t = StudentsT::new(0.0, 1.0, r - 1.0).expect("dof >= 1").inverse_cdf(0.975);
    (mean, t * (var / r).sqrt())
}

/// Simulates `config.replications` independent runs of `config.horizon` slots.
///
/// Replication `k` draws from the stream keyed by `(seed, k)`, and results are
/// combined in replication order, so the output does not depend on the
/// number of worker threads.
pub fn run(topology: &Topology, policy: &Policy, config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    policy.check_against(topology)?;
    let reps: Vec<Replication> = (0..config.replications)
        .into_par_iter()
        .map(|k| run_replication(topology, &policy.probs, config, k))
        .collect();
    let n = topology.len();
    let t = config.horizon as f64;
    let mut out = SimResult {
        tau_hat: Vec::with_capacity(n),
        aoi_hat: Vec::with_capacity(n),
        ci_tau: Vec::with_capacity(n),
        ci_aoi: Vec::with_capacity(n),
        paths: None,
        horizon: config.horizon,
        replications: config.replications,
    };
    for i in 0..n {
        let tau: Vec<f64> = reps.iter().map(|r| r.successes[i] as f64 / t).collect();
        let aoi: Vec<f64> = reps.iter().map(|r| r.age_sum[i] as f64 / t).collect();
        let (tau_mean, tau_ci) = mean_and_half_width(&tau);
        let (aoi_mean, aoi_ci) = mean_and_half_width(&aoi);
        out.tau_hat.push(tau_mean);
        out.aoi_hat.push(aoi_mean);
        out.ci_tau.push(tau_ci);
        out.ci_aoi.push(aoi_ci);
    }
    out.paths = reps.into_iter().next().and_then(|r| r.paths);
    Ok(out)
}

/// Uniform slotted-ALOHA policy; `p_common` defaults to `1/n`.
pub fn baseline_aloha(n: usize, p_common: Option<f64>) -> Result<Policy> {
    if n == 0 {
        return Err(AoiError::usage("baseline policy needs at least one node"));
    }
    let p = p_common.unwrap_or(1.0 / n as f64);
    Policy::new(vec![p; n], format!("aloha(p={p})"))
}

pub const SIM_CSV_HEADER: &str = "node_id,r,p,tau_analytic,tau_hat,aoi_analytic,aoi_hat,ci_tau,ci_aoi\n";

/// Per-node comparison of simulated and analytic statistics.
pub fn sim_csv(topology: &Topology, policy: &Policy, result: &SimResult) -> Result<String> {
    policy.check_against(topology)?;
    let tau = taus(topology, &policy.probs);
    let aoi = aoi_of(topology, &policy.probs);
    let mut csv = String::from(SIM_CSV_HEADER);
    for i in 0..topology.len() {
        csv.push_str(&row([
            i.to_string(),
            sig9(topology.distances()[i]),
            sig9(policy.probs[i]),
            sig9(tau[i]),
            sig9(result.tau_hat[i]),
            sig9(aoi.0[i]),
            sig9(result.aoi_hat[i]),
            sig9(result.ci_tau[i]),
            sig9(result.ci_aoi[i]),
        ]));
    }
    Ok(csv)
}

/// AoI sample paths of replication 0 as `slot,node_0,node_1,...`.
pub fn paths_csv(result: &SimResult) -> Option<String> {
    let paths = result.paths.as_ref()?;
    let mut csv = String::from("slot");
    for i in 0..paths.len() {
        csv.push_str(&format!(",node_{i}"));
    }
    csv.push('\n');
    for t in 0..result.horizon as usize {
        csv.push_str(&row(std::iter::once((t + 1).to_string()).chain(paths.iter().map(|p| p[t].to_string()))));
    }
    Some(csv)
}
