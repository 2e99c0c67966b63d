//! Experiment specifications and the artifact writer used by the CLI.
//!
//! A run writes its CSV/JSON outputs into `output_dir` together with
//! `manifest.json`, which lists the inputs, the crate version, the wall time
//! and a SHA-256 of every artifact. CSV contents depend only on the spec, so
//! reruns are byte-identical. When a solve or simulation fails the runner
//! writes `diagnostic.json` instead and returns the error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{self, BucketExperiment, PolicyKind, RadiusBuckets};
use crate::channel::{aoi_of, taus, Policy};
use crate::error::{AoiError, Result};
use crate::format::{row, sig9};
use crate::sim::{self, SimConfig};
use crate::solvers::{pareto_point, solve_ews, solve_mm, solve_pf, ta_policy, SolverConfig, SolverReport};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Simulate,
    Bounds,
    Figure3,
    Figure4,
    Figure5,
    Pareto,
    TaConvergence,
}

impl Command {
    fn needs_topology(self) -> bool {
        matches!(self, Command::Solve | Command::Simulate | Command::Bounds | Command::Pareto)
    }
}

/// Where the network comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologySource {
    /// JSON file `{"beta", "theta", "distances"}`.
    File(PathBuf),
    /// `n` uniform-disk nodes; `seed` defaults to the experiment seed.
    Sample { n: usize, seed: Option<u64> },
    Symmetric { n: usize, radius: f64 },
}

impl TopologySource {
    pub fn load(&self, master_seed: u64) -> Result<Topology> {
        match self {
            TopologySource::File(path) => Topology::read_json(path),
            TopologySource::Sample { n, seed } => Topology::sample_uniform_disk(*n, seed.unwrap_or(master_seed)),
            TopologySource::Symmetric { n, radius } => Topology::symmetric(*n, *radius),
        }
    }

    fn node_count(&self) -> Option<usize> {
        match self {
            TopologySource::File(_) => None,
            TopologySource::Sample { n, .. } | TopologySource::Symmetric { n, .. } => Some(*n),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PolicySpec {
    Ews {
        /// Node weights; all ones when absent.
        #[serde(default)]
        alpha: Option<Vec<f64>>,
    },
    Mm,
    #[default]
    Pf,
    Ta,
    Aloha {
        /// Common attempt probability; `1/N` when absent.
        #[serde(default)]
        p: Option<f64>,
    },
}

impl PolicySpec {
    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicySpec::Ews { .. } => PolicyKind::Ews,
            PolicySpec::Mm => PolicyKind::Mm,
            PolicySpec::Pf => PolicyKind::Pf,
            PolicySpec::Ta => PolicyKind::Ta,
            PolicySpec::Aloha { .. } => PolicyKind::Aloha,
        }
    }

    /// Solver report for the optimized kinds, `None` for closed-form ones.
    pub fn solve(&self, topology: &Topology, config: &SolverConfig) -> Result<(Policy, Option<SolverReport>)> {
        let report = match self {
            PolicySpec::Ews { alpha } => {
                let alpha = alpha.clone().unwrap_or_else(|| vec![1.0; topology.len()]);
                solve_ews(topology, &alpha, config)?
            }
            PolicySpec::Mm => solve_mm(topology, config)?,
            PolicySpec::Pf => solve_pf(topology, config)?,
            PolicySpec::Ta => return Ok((ta_policy(topology)?, None)),
            PolicySpec::Aloha { p } => return Ok((sim::baseline_aloha(topology.len(), *p)?, None)),
        };
        Ok((report.policy.clone(), Some(report)))
    }
}

/// Per-command knobs. Absent values take command-specific defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentParams {
    /// Network sizes for `figure3` and `ta-convergence`.
    pub sizes: Option<Vec<usize>>,
    /// Random topologies per size (figures).
    pub topologies: usize,
    /// Equal-width radius buckets (figures 4 and 5).
    pub buckets: usize,
    /// Probe-node samples per size (`ta-convergence`).
    pub samples: usize,
    pub probe_radius: f64,
    /// Explicit weight vectors for `pareto`; a log-spaced two-node ratio
    /// grid is used when absent.
    pub weights: Option<Vec<Vec<f64>>>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_points: usize,
    /// Add simulated columns to `figure5`.
    pub simulate: bool,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            sizes: None,
            topologies: 100,
            buckets: 8,
            samples: 200,
            probe_radius: 1.0,
            weights: None,
            ratio_min: 1e-3,
            ratio_max: 1e3,
            ratio_points: 61,
            simulate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub command: Command,
    #[serde(default)]
    pub topology_source: Option<TopologySource>,
    #[serde(default)]
    pub policy_kind: PolicySpec,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub params: ExperimentParams,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

const FIG3_SIZES: [usize; 6] = [5, 10, 20, 50, 100, 200];
const TA_SIZES: [usize; 5] = [25, 50, 100, 200, 400];

impl ExperimentSpec {
    pub fn new(command: Command, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentSpec {
            command,
            topology_source: None,
            policy_kind: PolicySpec::default(),
            sim: SimConfig::default(),
            solver: SolverConfig::default(),
            params: ExperimentParams::default(),
            output_dir: output_dir.into(),
            seed: default_seed(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.command.needs_topology() && self.topology_source.is_none() {
            return Err(AoiError::usage(format!("{:?} needs a topology source", self.command)));
        }
        if matches!(self.command, Command::Figure4 | Command::Figure5) {
            match self.topology_source.as_ref().and_then(TopologySource::node_count) {
                Some(n) if n >= 2 => {}
                _ => return Err(AoiError::usage("figure 4/5 need a sampled topology source with n >= 2")),
            }
        }
        if self.command == Command::Simulate || (self.command == Command::Figure5 && self.params.simulate) {
            self.sim.validate()?;
        }
        if self.params.topologies == 0 || self.params.buckets == 0 {
            return Err(AoiError::usage("topologies and buckets must be positive"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(AoiError::usage("output directory must not be empty"));
        }
        Ok(())
    }

    fn bucket_experiment(&self) -> Result<BucketExperiment> {
        let n = self.topology_source.as_ref().and_then(TopologySource::node_count).expect("validated");
        Ok(BucketExperiment {
            buckets: RadiusBuckets::uniform(self.params.buckets)?,
            aloha_p: match self.policy_kind {
                PolicySpec::Aloha { p } => p,
                _ => None,
            },
            solver: self.solver,
            sim: self.params.simulate.then_some(self.sim),
            ..BucketExperiment::new(n, self.params.topologies, self.seed)?
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: ExperimentSpec,
    pub seed: u64,
    pub version: String,
    pub threads: usize,
    pub wall_time_secs: f64,
    pub artifacts: Vec<ArtifactEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Outputs {
    dir: PathBuf,
    artifacts: Vec<ArtifactEntry>,
}

impl Outputs {
    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let bytes = contents.as_ref();
        std::fs::write(self.dir.join(name), bytes)?;
        self.artifacts.push(ArtifactEntry { file: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }
}

/// `node_id,r,p,tau,aoi` for a policy on a topology.
pub fn policy_csv(topology: &Topology, policy: &Policy) -> String {
    let tau = taus(topology, &policy.probs);
    let aoi = aoi_of(topology, &policy.probs);
    let mut csv = row(["node_id", "r", "p", "tau", "aoi"]);
    for (i, r) in topology.distances().iter().enumerate() {
        csv.push_str(&row([i.to_string(), sig9(*r), sig9(policy.probs[i]), sig9(tau[i]), sig9(aoi.0[i])]));
    }
    csv
}

#[derive(Serialize)]
struct ClosedFormPolicy<'a> {
    policy: &'a [f64],
    aoi: crate::channel::AoiVector,
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    command: Command,
    error: String,
    exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual_trace: Option<&'a [f64]>,
}

fn write_diagnostic(dir: &Path, command: Command, err: &AoiError) -> std::io::Result<()> {
    let (solver, residual_trace) = match err {
        AoiError::NoConvergence { solver, trace, .. } => (Some(*solver), Some(trace.as_slice())),
        AoiError::Diverged { solver, .. } => (Some(*solver), None),
        _ => (None, None),
    };
    let diag = Diagnostic { command, error: err.to_string(), exit_code: err.exit_code(), solver, residual_trace };
    std::fs::write(dir.join("diagnostic.json"), serde_json::to_string_pretty(&diag).expect("serializes") + "\n")
}

/// Runs `spec` and returns its manifest. Usage errors are returned before
/// anything is written.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Manifest> {
    spec.validate()?;
    std::fs::create_dir_all(&spec.output_dir)?;
    let started = Instant::now();
    let mut out = Outputs { dir: spec.output_dir.clone(), artifacts: Vec::new() };
    if let Err(err) = execute(spec, &mut out) {
        if !matches!(err, AoiError::Io(_)) {
            write_diagnostic(&spec.output_dir, spec.command, &err)?;
        }
        return Err(err);
    }
    let manifest = Manifest {
        spec: spec.clone(),
        seed: spec.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads: rayon::current_num_threads(),
        wall_time_secs: started.elapsed().as_secs_f64(),
        artifacts: out.artifacts,
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(spec.output_dir.join("manifest.json"), text)?;
    Ok(manifest)
}

fn execute(spec: &ExperimentSpec, out: &mut Outputs) -> Result<()> {
    let topology = || spec.topology_source.as_ref().expect("validated").load(spec.seed);
    match spec.command {
        Command::Solve => {
            let t = topology()?;
            let (policy, report) = spec.policy_kind.solve(&t, &spec.solver)?;
            match report {
                Some(report) => out.write_json("policy.json", &report)?,
                None => out.write_json("policy.json", &ClosedFormPolicy { policy: &policy.probs, aoi: aoi_of(&t, &policy.probs) })?,
            }
            out.write("policy.csv", policy_csv(&t, &policy))?;
        }
        Command::Simulate => {
            let t = topology()?;
            let (policy, _) = spec.policy_kind.solve(&t, &spec.solver)?;
            let result = sim::run(&t, &policy, &spec.sim)?;
            out.write("sim.csv", sim::sim_csv(&t, &policy, &result)?)?;
            if let Some(paths) = sim::paths_csv(&result) {
                out.write("paths.csv", paths)?;
            }
        }
        Command::Bounds => {
            let report = analysis::check_bounds(&topology()?, &spec.solver)?;
            let mut csv = row(["n", "lower", "mid", "finite_n_upper", "upper", "satisfied"]);
            csv.push_str(&row([
                report.n.to_string(),
                sig9(report.lower),
                sig9(report.mid),
                sig9(report.finite_n_upper),
                sig9(report.upper),
                report.satisfied.to_string(),
            ]));
            out.write("bounds.csv", csv)?;
            out.write_json("bounds.json", &report)?;
        }
        Command::Figure3 => {
            let sizes = spec.params.sizes.clone().unwrap_or_else(|| FIG3_SIZES.to_vec());
            let rows = analysis::figure3(&sizes, spec.params.topologies, spec.seed, &spec.solver)?;
            out.write("fig3.csv", analysis::figure3_csv(&rows))?;
        }
        Command::Figure4 => {
            let mut exp = spec.bucket_experiment()?;
            exp.policies = PolicyKind::OPTIMIZED.to_vec();
            exp.sim = None;
            out.write("fig4.csv", analysis::figure4(&exp)?.to_csv())?;
        }
        Command::Figure5 => {
            out.write("fig5.csv", analysis::figure5(&spec.bucket_experiment()?)?.to_csv())?;
        }
        Command::Pareto => {
            let t = topology()?;
            let grid = match &spec.params.weights {
                Some(w) => w.clone(),
                None if t.len() == 2 => {
                    analysis::ratio_grid(spec.params.ratio_min, spec.params.ratio_max, spec.params.ratio_points)?
                }
                None => return Err(AoiError::usage("pareto on more than two nodes needs explicit weights")),
            };
            if let Some(w) = grid.iter().find(|w| w.len() != t.len()) {
                return Err(AoiError::usage(format!("weight vector has {} entries for {} nodes", w.len(), t.len())));
            }
            let trace = analysis::trace_pareto_boundary(&t, &grid, &spec.solver)?;
            out.write("pareto.csv", analysis::trace_csv(&trace))?;
            if let Some((k, _)) = trace.failures.first() {
                // Surface the first failing weight vector with its full error.
                return pareto_point(&t, &grid[*k], &spec.solver).map(|_| ());
            }
        }
        Command::TaConvergence => {
            let sizes = spec.params.sizes.clone().unwrap_or_else(|| TA_SIZES.to_vec());
            let result =
                analysis::ta_convergence_experiment(&sizes, spec.params.samples, spec.params.probe_radius, spec.seed)?;
            out.write("ta_convergence.csv", analysis::ta_convergence_csv(&result))?;
            out.write_json("ta_convergence.json", &result)?;
        }
    }
    Ok(())
}
