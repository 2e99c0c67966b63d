//! Age-of-information optimal random access for spatially distributed nodes.
//!
//! Nodes at normalized distances `r_i` from a base station transmit fresh
//! status updates in slotted time with probability `p_i`. Reception follows a
//! Rayleigh-fading SIR capture model. The crate provides
//!
//! * [`topology`]: node geometry and random placements,
//! * [`channel`]: closed-form success probabilities and expected AoI,
//! * [`solvers`]: weighted-sum, min-max, proportionally fair and
//!   topology-agnostic policies,
//! * [`sim`]: a slot-level Monte Carlo simulator,
//! * [`analysis`]: bound checks, convexity probes, boundary tracing and
//!   large-network statistics,
//! * [`experiment`]: the reproducible experiment runner behind the CLI.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod format;
pub mod rng;
pub mod sim;
pub mod solvers;
pub mod topology;

pub use channel::{expected_aoi, objective_value, success_probability, AoiVector, Objective, Policy};
pub use error::{AoiError, Result};
pub use solvers::{pareto_point, solve_ews, solve_mm, solve_pf, solve_ta, SolverConfig, SolverReport};
pub use topology::Topology;
