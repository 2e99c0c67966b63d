//! Analytic capture-model quantities.
//!
//! With Rayleigh fading marginalized out, node `i` is received in a slot with
//! probability `tau_i = p_i * prod_{j != i} (1 - p_j / (1 + d_ij))`, and its
//! time-average expected AoI is `h_i = 1 / tau_i`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{AoiError, Result};
use crate::topology::Topology;

/// Above this many nodes the interference product is accumulated in log space.
pub const LOG_SPACE_THRESHOLD: usize = 64;

/// Per-node transmission probabilities plus a provenance label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub probs: Vec<f64>,
    #[serde(default)]
    pub label: String,
}

impl Policy {
    pub fn new(probs: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && **p <= 1.0)) {
            return Err(AoiError::usage(format!("transmission probability of node {i} must lie in [0, 1], got {p}")));
        }
        Ok(Policy { probs, label: label.into() })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn check_against(&self, topology: &Topology) -> Result<()> {
        if self.len() != topology.len() {
            return Err(AoiError::usage(format!(
                "policy has {} entries but topology has {} nodes",
                self.len(),
                topology.len()
            )));
        }
        Ok(())
    }
}

/// Time-average expected AoI per node, in slots. `+inf` marks a node that is
/// never received.
#[derive(Debug, Clone, PartialEq)]
pub struct AoiVector(pub Vec<f64>);

impl AoiVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|h| h.is_finite())
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(1/N^2) * sum_i h_i`, the network-average normalized AoI.
    pub fn normalized_mean(&self) -> f64 {
        self.mean() / self.len() as f64
    }
}

// JSON has no infinity; unbounded AoI is written as `null`.
impl Serialize for AoiVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|h| h.is_finite().then_some(*h)))
    }
}

impl<'de> Deserialize<'de> for AoiVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(AoiVector(raw.into_iter().map(|h| h.unwrap_or(f64::INFINITY)).collect()))
    }
}

/// Probability that node `i` is received in a slot.
pub fn success_probability(topology: &Topology, policy: &Policy, i: usize) -> Result<f64> {
    policy.check_against(topology)?;
    if i >= topology.len() {
        return Err(AoiError::usage(format!("node index {i} out of range")));
    }
    Ok(tau(topology, &policy.probs, i))
}

/// `tau` for every node.
pub fn success_probabilities(topology: &Topology, policy: &Policy) -> Result<Vec<f64>> {
    policy.check_against(topology)?;
    Ok(taus(topology, &policy.probs))
}

pub(crate) fn taus(topology: &Topology, probs: &[f64]) -> Vec<f64> {
    (0..topology.len()).map(|i| tau(topology, probs, i)).collect()
}

pub(crate) fn tau(topology: &Topology, probs: &[f64], i: usize) -> f64 {
    let n = topology.len();
    let p_i = probs[i];
    if p_i == 0.0 {
        return 0.0;
    }
    let w = topology.path_powers();
    let scale = w[i] * topology.theta();
    // p_j / (1 + d_ij) = p_j * w_i theta / (w_i theta + w_j)
    let factor = |j: usize| probs[j] * scale / (scale + w[j]);
    if n > LOG_SPACE_THRESHOLD {
        let log_sum: f64 = (0..n).filter(|&j| j != i).map(|j| (-factor(j)).ln_1p()).sum();
        p_i * log_sum.exp()
    } else {
        (0..n).filter(|&j| j != i).fold(p_i, |acc, j| acc * (1.0 - factor(j)))
    }
}

/// `h = Phi(p, r)`: elementwise `1 / tau_i`.
pub fn expected_aoi(topology: &Topology, policy: &Policy) -> Result<AoiVector> {
    policy.check_against(topology)?;
    Ok(aoi_of(topology, &policy.probs))
}

pub(crate) fn aoi_of(topology: &Topology, probs: &[f64]) -> AoiVector {
    AoiVector(taus(topology, probs).into_iter().map(|t| if t > 0.0 { 1.0 / t } else { f64::INFINITY }).collect())
}

/// Network objectives over an AoI vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "weights")]
pub enum Objective {
    /// `sum_i alpha_i h_i`
    WeightedSum(Vec<f64>),
    /// `max_i h_i`
    MinMax,
    /// `sum_i log h_i`
    ProportionalFair,
}

impl Objective {
    pub fn value(&self, aoi: &AoiVector) -> Result<f64> {
        objective_value(self, aoi)
    }
}

pub fn objective_value(kind: &Objective, aoi: &AoiVector) -> Result<f64> {
    let h = aoi.values();
    match kind {
        Objective::WeightedSum(alpha) => {
            if alpha.len() != h.len() {
                return Err(AoiError::usage(format!("{} weights for {} nodes", alpha.len(), h.len())));
            }
            if let Some(a) = alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
                return Err(AoiError::usage(format!("weights must be positive, got {a}")));
            }
            Ok(alpha.iter().zip(h).map(|(a, h)| a * h).sum())
        }
        Objective::MinMax => Ok(aoi.max()),
        Objective::ProportionalFair => Ok(h.iter().map(|h| h.ln()).sum()),
    }
}
