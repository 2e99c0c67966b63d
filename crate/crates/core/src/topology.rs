//! Node placement relative to the base station.
//!
//! Only the distances matter to the channel model, so a topology is a vector
//! of normalized radii in `(0, 1]` together with the path-loss exponent and
//! the capture threshold.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AoiError, Result};
use crate::rng::{self, domain};

pub const DEFAULT_BETA: f64 = 2.0;
pub const DEFAULT_THETA: f64 = 1.0;

/// Wire form of a topology file: `{"beta": .., "theta": .., "distances": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TopologyFile {
    beta: f64,
    theta: f64,
    distances: Vec<f64>,
}

/// Immutable network geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TopologyFile", into = "TopologyFile")]
pub struct Topology {
    distances: Vec<f64>,
    beta: f64,
    theta: f64,
    /// `r_i^beta`, cached at construction.
    #[serde(skip)]
    powers: Vec<f64>,
}

impl TryFrom<TopologyFile> for Topology {
    type Error = AoiError;

    fn try_from(file: TopologyFile) -> Result<Self> {
        Topology::new(file.distances, file.beta, file.theta)
    }
}

impl From<Topology> for TopologyFile {
    fn from(t: Topology) -> Self {
        TopologyFile { beta: t.beta, theta: t.theta, distances: t.distances }
    }
}

impl Topology {
    pub fn new(distances: Vec<f64>, beta: f64, theta: f64) -> Result<Self> {
        if distances.is_empty() {
            return Err(AoiError::usage("topology needs at least one node"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(AoiError::usage(format!("path-loss exponent must be positive, got {beta}")));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(AoiError::usage(format!("capture threshold must be positive, got {theta}")));
        }
        if let Some((i, r)) = distances.iter().enumerate().find(|(_, r)| !(**r > 0.0 && **r <= 1.0)) {
            return Err(AoiError::usage(format!("distance of node {i} must lie in (0, 1], got {r}")));
        }
        let powers: Vec<f64> = distances.iter().map(|r| r.powf(beta)).collect();
        if let Some(i) = powers.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(AoiError::usage(format!("r^beta underflows for node {i}")));
        }
        Ok(Topology { distances, beta, theta, powers })
    }

    /// Topology with the default channel (`beta = 2`, `theta = 1`).
    pub fn from_distances(distances: Vec<f64>) -> Result<Self> {
        Self::new(distances, DEFAULT_BETA, DEFAULT_THETA)
    }

    /// Same radii under a different channel.
    pub fn with_channel(&self, beta: f64, theta: f64) -> Result<Self> {
        Self::new(self.distances.clone(), beta, theta)
    }

    /// `n` nodes, all at `radius` from the base station.
    pub fn symmetric(n: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(AoiError::usage(format!("radius must lie in (0, 1], got {radius}")));
        }
        Self::from_distances(vec![radius; n])
    }

    /// `n` nodes placed uniformly at random in the unit disk, so each radius
    /// has CDF `r^2`.
    pub fn sample_uniform_disk(n: usize, seed: u64) -> Result<Self> {
        Self::sample_uniform_disk_keyed(n, seed, 0)
    }

    /// Like [`Topology::sample_uniform_disk`], drawing from the sub-stream
    /// `index` of `seed` so that batches of topologies are reproducible.
    pub fn sample_uniform_disk_keyed(n: usize, seed: u64, index: u64) -> Result<Self> {
        if n == 0 {
            return Err(AoiError::usage("cannot sample an empty topology"));
        }
        let mut rng = rng::stream(seed, &[domain::TOPOLOGY, index]);
        Self::from_distances(sample_radii(&mut rng, n))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serializes")
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `r_i^beta` for every node.
    pub fn path_powers(&self) -> &[f64] {
        &self.powers
    }

    /// True when the channel is the one the topology-agnostic results assume.
    pub fn is_default_channel(&self) -> bool {
        self.beta == DEFAULT_BETA && self.theta == DEFAULT_THETA
    }

    /// `d_ij = r_j^beta / (r_i^beta * theta)`; node `j` interferes with `i`
    /// through the factor `1 - p_j / (1 + d_ij)`.
    pub fn interference_ratio(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.len();
        if i >= n || j >= n {
            return Err(AoiError::usage(format!("node index out of range ({i}, {j}) for {n} nodes")));
        }
        if i == j {
            return Err(AoiError::usage("interference ratio needs two distinct nodes"));
        }
        Ok(self.ratio(i, j))
    }

    /// Unchecked form of [`Topology::interference_ratio`] for hot loops.
    #[inline]
    pub(crate) fn ratio(&self, i: usize, j: usize) -> f64 {
        self.powers[j] / (self.powers[i] * self.theta)
    }
}

/// `n` radii with CDF `r^2` on `(0, 1]`.
pub(crate) fn sample_radii<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    // 1 - U maps [0, 1) onto (0, 1], keeping r = 0 out of the support.
    (0..n).map(|_| (1.0 - rng.gen::<f64>()).sqrt()).collect()
}
