//! Command line runner for solver, simulation and figure experiments.
//!
//! Every subcommand builds an [`ExperimentSpec`], either from `--config` or
//! from defaults, applies the flag overrides and writes its artifacts plus
//! `manifest.json` into `--out`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spatial_aoi::experiment::{run_experiment, Command, ExperimentSpec, PolicySpec, TopologySource};
use spatial_aoi::AoiError;

#[derive(Parser, Debug)]
#[command(name = "spatial-aoi", version, about = "Age-of-information random access experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Compute a policy for one topology.
    Solve(CommonArgs),
    /// Simulate a policy slot by slot.
    Simulate(CommonArgs),
    /// Check the normalized AoI bound chain on one topology.
    Bounds(CommonArgs),
    /// Network-average normalized AoI against network size.
    Figure3(CommonArgs),
    /// Mean transmission probability against distance.
    Figure4(CommonArgs),
    /// Mean normalized AoI against distance, with baseline ALOHA.
    Figure5(CommonArgs),
    /// Trace the Pareto boundary over a weight grid.
    Pareto(CommonArgs),
    /// Deviation of the proportionally fair policy from the topology-agnostic one.
    TaConvergence(CommonArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PolicyArg {
    Ews,
    Mm,
    Pf,
    Ta,
    Aloha,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Experiment spec in JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,

    /// Topology JSON file.
    #[arg(long, conflicts_with_all = ["sample", "symmetric"])]
    topology: Option<PathBuf>,
    /// Sample this many nodes uniformly in the unit disk.
    #[arg(long, conflicts_with = "symmetric")]
    sample: Option<usize>,
    /// Place this many nodes at a common radius (see --radius).
    #[arg(long, requires = "radius")]
    symmetric: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,

    /// Weighted-sum node weights.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Common ALOHA attempt probability (default 1/N).
    #[arg(long)]
    aloha_p: Option<f64>,

    /// Slots per simulation replication.
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Seed of the simulation streams.
    #[arg(long)]
    sim_seed: Option<u64>,
    #[arg(long)]
    record_paths: bool,

    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    topologies: Option<usize>,
    #[arg(long)]
    buckets: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    probe_radius: Option<f64>,
    /// Add simulated columns to figure 5.
    #[arg(long)]
    simulate: bool,

    #[arg(long)]
    tol_fixed_point: Option<f64>,
    #[arg(long)]
    tol_outer: Option<f64>,
    #[arg(long)]
    max_sweeps: Option<usize>,
    #[arg(long)]
    damping: Option<f64>,
}

impl Cmd {
    fn split(self) -> (Command, CommonArgs) {
        match self {
            Cmd::Solve(a) => (Command::Solve, a),
            Cmd::Simulate(a) => (Command::Simulate, a),
            Cmd::Bounds(a) => (Command::Bounds, a),
            Cmd::Figure3(a) => (Command::Figure3, a),
            Cmd::Figure4(a) => (Command::Figure4, a),
            Cmd::Figure5(a) => (Command::Figure5, a),
            Cmd::Pareto(a) => (Command::Pareto, a),
            Cmd::TaConvergence(a) => (Command::TaConvergence, a),
        }
    }
}

fn build_spec(command: Command, args: &CommonArgs) -> Result<ExperimentSpec, AoiError> {
    let mut spec = match &args.config {
        Some(path) => {
            let mut spec = ExperimentSpec::from_json(&std::fs::read_to_string(path)?)?;
            spec.command = command;
            spec
        }
        None => ExperimentSpec::new(command, "out"),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(out) = &args.out {
        spec.output_dir = out.clone();
    }
    if let Some(path) = &args.topology {
        spec.topology_source = Some(TopologySource::File(path.clone()));
    } else if let Some(n) = args.sample {
        spec.topology_source = Some(TopologySource::Sample { n, seed: None });
    } else if let (Some(n), Some(radius)) = (args.symmetric, args.radius) {
        spec.topology_source = Some(TopologySource::Symmetric { n, radius });
    }
    if let Some(kind) = args.policy {
        spec.policy_kind = match kind {
            PolicyArg::Ews => PolicySpec::Ews { alpha: None },
            PolicyArg::Mm => PolicySpec::Mm,
            PolicyArg::Pf => PolicySpec::Pf,
            PolicyArg::Ta => PolicySpec::Ta,
            PolicyArg::Aloha => PolicySpec::Aloha { p: None },
        };
    }
    match &mut spec.policy_kind {
        PolicySpec::Ews { alpha } if args.alpha.is_some() => alpha.clone_from(&args.alpha),
        PolicySpec::Aloha { p } if args.aloha_p.is_some() => *p = args.aloha_p,
        _ => {}
    }
    // Figure 5 reads the ALOHA probability even when another policy is selected.
    if command == Command::Figure5 && args.aloha_p.is_some() {
        spec.policy_kind = PolicySpec::Aloha { p: args.aloha_p };
    }
    let sim = &mut spec.sim;
    sim.horizon = args.horizon.unwrap_or(sim.horizon);
    sim.replications = args.replications.unwrap_or(sim.replications);
    sim.seed = args.sim_seed.unwrap_or(sim.seed);
    sim.record_paths |= args.record_paths;
    let params = &mut spec.params;
    if args.sizes.is_some() {
        params.sizes.clone_from(&args.sizes);
    }
    params.topologies = args.topologies.unwrap_or(params.topologies);
    params.buckets = args.buckets.unwrap_or(params.buckets);
    params.samples = args.samples.unwrap_or(params.samples);
    params.probe_radius = args.probe_radius.unwrap_or(params.probe_radius);
    params.simulate |= args.simulate;
    let solver = &mut spec.solver;
    solver.tol_fixed_point = args.tol_fixed_point.unwrap_or(solver.tol_fixed_point);
    solver.tol_outer = args.tol_outer.unwrap_or(solver.tol_outer);
    solver.max_sweeps = args.max_sweeps.unwrap_or(solver.max_sweeps);
    solver.damping = args.damping.unwrap_or(solver.damping);
    Ok(spec)
}

fn run(cli: Cli) -> Result<(), AoiError> {
    let (command, args) = cli.command.split();
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(AoiError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| AoiError::Usage(e.to_string()))?;
    }
    let spec = build_spec(command, &args)?;
    let manifest = run_experiment(&spec)?;
    for a in &manifest.artifacts {
        println!("{}", spec.output_dir.join(&a.file).display());
    }
    println!("{}", spec.output_dir.join("manifest.json").display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("spatial-aoi: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
