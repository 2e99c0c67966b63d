//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.
//!
//! `cargo test -p spatial-aoi --test acceptance`

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use spatial_aoi::analysis::{
    check_bounds, convexity_probe, figure3, figure5, finite_n_bound, sample_zpf, ta_convergence_experiment,
    zpf_statistics, BucketExperiment, PolicyKind, RadiusBuckets, E_OVER_TWO,
};
use spatial_aoi::sim::{self, SimConfig};
use spatial_aoi::{solve_ews, solve_mm, solve_pf, SolverConfig, SolverReport, Topology};

const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

/// `tau_i` straight from the product formula, independent of the library.
fn tau_oracle(r: &[f64], beta: f64, theta: f64, p: &[f64], i: usize) -> f64 {
    let mut t = p[i];
    for j in 0..r.len() {
        if j != i {
            let d = r[j].powf(beta) / (r[i].powf(beta) * theta);
            t *= 1.0 - p[j] / (1.0 + d);
        }
    }
    t
}

fn criterion_1() -> Outcome {
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    for n in [2, 5, 10, 50] {
        for radius in [0.3, 1.0] {
            let rep = solve_pf(&Topology::symmetric(n, radius).unwrap(), &cfg).unwrap();
            for p in &rep.policy.probs {
                worst = worst.max((p - (2.0 / n as f64).min(1.0)).abs());
            }
        }
    }
    outcome(worst <= 1e-8, format!("max |p - 2/N| = {worst:.2e} (tol 1e-8)"))
}

fn criterion_2() -> Outcome {
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    let mut max_value: f64 = 0.0;
    for n in [2, 3, 5, 10, 20, 50, 100] {
        let rep = solve_mm(&Topology::symmetric(n, 0.8).unwrap(), &cfg).unwrap();
        let value = rep.aoi.max() / n as f64;
        worst = worst.max((value / finite_n_bound(n) - 1.0).abs());
        max_value = max_value.max(value);
    }
    outcome(
        worst <= 1e-6 && max_value <= E_OVER_TWO,
        format!("max rel err vs 1/(2(1-1/N)^(N-1)) = {worst:.2e}, max h/N = {max_value:.6} <= {E_OVER_TWO:.6}"),
    )
}

fn criterion_3() -> Outcome {
    let cfg = SolverConfig::default();
    let mut failures = Vec::new();
    let mut extremes = (f64::INFINITY, 0.0f64);
    for n in [10, 50, 100] {
        let reports: Vec<_> = (0..100u64)
            .into_par_iter()
            .map(|s| check_bounds(&Topology::sample_uniform_disk_keyed(n, SEED, s).unwrap(), &cfg))
            .collect();
        for (s, rep) in reports.into_iter().enumerate() {
            match rep {
                Ok(b) => {
                    extremes = (extremes.0.min(b.lower), extremes.1.max(b.mid));
                    let ok = b.lower >= 1.0 - 1e-9 && b.lower <= b.mid && b.mid <= E_OVER_TWO * 1.01;
                    if !ok {
                        failures.push(format!("N={n} sample {s}: {b:?}"));
                    }
                }
                Err(e) => failures.push(format!("N={n} sample {s}: {e}")),
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "300 topologies, min lower = {:.6}, max h^MM/N = {:.6}, violations = {} {}",
            extremes.0,
            extremes.1,
            failures.len(),
            failures.first().map(String::as_str).unwrap_or("")
        ),
    )
}

fn criterion_4() -> Outcome {
    let cfg = SolverConfig::default();
    let horizon = 1_000_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let instances: Vec<(Topology, u64)> = (0..20u64)
        .map(|k| {
            let n = rng.gen_range(2..=10);
            (Topology::sample_uniform_disk_keyed(n, SEED + 4, k).unwrap(), rng.gen())
        })
        .collect();
    let checks: Vec<(f64, f64, usize, usize)> = instances
        .par_iter()
        .map(|(t, sim_seed)| {
            let policy = solve_pf(t, &cfg).unwrap().policy;
            let res = sim::run(t, &policy, &SimConfig { horizon, replications: 1, seed: *sim_seed, record_paths: false })
                .unwrap();
            let mut worst_z: f64 = 0.0;
            let mut worst_aoi: f64 = 0.0;
            let mut aoi_checked = 0;
            for i in 0..t.len() {
                let tau = tau_oracle(t.distances(), t.beta(), t.theta(), &policy.probs, i);
                let se = (tau * (1.0 - tau) / horizon as f64).sqrt();
                worst_z = worst_z.max((res.tau_hat[i] - tau).abs() / se);
                if res.tau_hat[i] * horizon as f64 >= 1e4 {
                    aoi_checked += 1;
                    worst_aoi = worst_aoi.max((res.aoi_hat[i] * res.tau_hat[i] - 1.0).abs());
                }
            }
            (worst_z, worst_aoi, aoi_checked, t.len())
        })
        .collect();
    let worst_z = checks.iter().map(|c| c.0).fold(0.0, f64::max);
    let worst_aoi = checks.iter().map(|c| c.1).fold(0.0, f64::max);
    let nodes: usize = checks.iter().map(|c| c.3).sum();
    let aoi_nodes: usize = checks.iter().map(|c| c.2).sum();
    outcome(
        worst_z <= 3.0 && worst_aoi < 0.02,
        format!(
            "{nodes} nodes: max |tau_hat - tau| = {worst_z:.2} SE (limit 3); \
             {aoi_nodes} nodes with tau_hat*T >= 1e4: max |aoi_hat*tau_hat - 1| = {worst_aoi:.2e} (limit 0.02)"
        ),
    )
}

/// `max |f_i(p_i)|` over unclamped coordinates and `max(0, -f_i(1))` over
/// clamped ones, with multipliers rescaled to max 1.
fn kkt_residual(t: &Topology, rep: &SolverReport) -> f64 {
    let r = t.distances();
    let (beta, theta) = (t.beta(), t.theta());
    let top = rep.multipliers.iter().copied().fold(0.0, f64::max);
    let lambda: Vec<f64> = rep.multipliers.iter().map(|x| x / top).collect();
    let p = &rep.policy.probs;
    (0..r.len())
        .map(|i| {
            let mut f = lambda[i] / p[i];
            for j in 0..r.len() {
                if j != i {
                    let d_ji = r[i].powf(beta) / (r[j].powf(beta) * theta);
                    f -= lambda[j] / (1.0 + d_ji - p[i]);
                }
            }
            if p[i] >= 1.0 {
                (-f).max(0.0)
            } else {
                f.abs()
            }
        })
        .fold(0.0, f64::max)
}

fn criterion_5() -> Outcome {
    let cfg = SolverConfig::default();
    let results: Vec<Result<(bool, f64), String>> = (0..300u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ k);
            let n = rng.gen_range(2..=20);
            let r: Vec<f64> = (0..n).map(|_| (1.0 - rng.gen::<f64>()).sqrt()).collect();
            let beta = [2.0, 2.0, 3.0, 4.0][k as usize % 4];
            let theta = [1.0, 0.5, 2.0][(k / 3) as usize % 3];
            let t = Topology::new(r, beta, theta).unwrap();
            let rep = match k % 3 {
                0 => {
                    let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
                    solve_ews(&t, &alpha, &cfg)
                }
                1 => solve_mm(&t, &cfg),
                _ => solve_pf(&t, &cfg),
            }
            .map_err(|e| format!("instance {k}: {e}"))?;
            Ok((rep.converged, kkt_residual(&t, &rep)))
        })
        .collect();
    let errors: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let converged: Vec<f64> = results.iter().filter_map(|r| r.as_ref().ok()).filter(|c| c.0).map(|c| c.1).collect();
    let worst = converged.iter().copied().fold(0.0, f64::max);
    outcome(
        worst <= 1e-8 && errors.is_empty(),
        format!(
            "{} of 300 converged, max residual = {worst:.2e} (tol 1e-8), solver errors = {}",
            converged.len(),
            errors.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut witnesses = 0;
    for (k, n) in [2usize, 5, 20].into_iter().enumerate() {
        let t = Topology::sample_uniform_disk_keyed(n, SEED + 6, k as u64).unwrap();
        witnesses += convexity_probe(&t, 10_000, SEED).unwrap().witnesses.len();
    }
    outcome(witnesses == 0, format!("3 x 10^4 trials, {witnesses} witnesses at 1e-12 relative"))
}

fn criterion_7() -> Outcome {
    let rows = figure3(&[50], 100, SEED, &SolverConfig::default()).unwrap();
    let v = &rows[0].normalized_aoi;
    let col = |k: PolicyKind| v[PolicyKind::OPTIMIZED.iter().position(|x| *x == k).unwrap()];
    let (ews, mm, pf) = (col(PolicyKind::Ews), col(PolicyKind::Mm), col(PolicyKind::Pf));
    let gap = (pf - ews).abs() / ews;
    outcome(
        rows[0].failures == 0 && ews < 1.3592 && mm < 1.3592 && pf < 1.3592 && gap < 0.02,
        format!("N=50, 100 topologies: EWS {ews:.6}, MM {mm:.6}, PF {pf:.6} (< 1.3592); |PF-EWS|/EWS = {gap:.2e} (< 0.02)"),
    )
}

fn criterion_8() -> Outcome {
    let res = ta_convergence_experiment(&[25, 50, 100, 200, 400], 200, 1.0, SEED).unwrap();
    let medians: Vec<String> = res.rows.iter().map(|r| format!("{}:{:.2e}", r.n, r.median)).collect();
    outcome(
        (-1.8..=-1.2).contains(&res.slope),
        format!("log-log slope = {:.3} (band [-1.8, -1.2]); medians {}", res.slope, medians.join(" ")),
    )
}

fn criterion_9() -> Outcome {
    let n = 200;
    let mut ok = true;
    let mut parts = Vec::new();
    for radius in [0.5, 1.0] {
        let m = zpf_statistics(radius).unwrap();
        let s = sample_zpf(n, radius, 2000, SEED).unwrap();
        let (mean_target, var_target) = (n as f64 * m.mean, n as f64 * m.variance);
        let mean_err = (s.mean() / mean_target - 1.0).abs();
        let var_err = (s.variance() / var_target - 1.0).abs();
        let clamp = s.clamp_fraction();
        ok &= mean_err < 0.05 && var_err < 0.10 && clamp < 1e-3;
        parts.push(format!(
            "r={radius}: mean {:.3} vs {:.3} ({:.1}%), var {:.3} vs {:.3} ({:.1}%), clamped {clamp}",
            s.mean(),
            mean_target,
            100.0 * mean_err,
            s.variance(),
            var_target,
            100.0 * var_err
        ));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let n = 50;
    let sim = SimConfig { horizon: 100_000, replications: 1, seed: SEED, record_paths: false };
    let run = |aloha_p: Option<f64>| {
        let exp = BucketExperiment {
            buckets: RadiusBuckets(vec![(0.0, 0.2), (0.9, 1.0)]),
            policies: vec![PolicyKind::Aloha, PolicyKind::Mm],
            aloha_p,
            sim: Some(sim),
            ..BucketExperiment::new(n, 50, SEED).unwrap()
        };
        let table = figure5(&exp).unwrap();
        let s = table.simulated.unwrap();
        (s[1][0] / s[0][0], s[1][1] / s[0][1], table.counts)
    };
    // Uniform attempt probability 2/N, the symmetric-network optimum.
    let (aloha, mm, counts) = run(Some(2.0 / n as f64));
    let (aloha_1n, _, _) = run(None);
    outcome(
        aloha >= 2.0 && (0.95..=1.05).contains(&mm),
        format!(
            "nodes (r<0.2, r>0.9) = {counts:?}; ALOHA p=2/N far/near = {aloha:.3} (>= 2), MM = {mm:.4} ([0.95, 1.05]); \
             for reference ALOHA p=1/N gives {aloha_1n:.3}"
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        ("symmetric PF exactness", criterion_1, Duration::from_secs(1)),
        ("finite-N min-max value", criterion_2, Duration::from_secs(10)),
        ("bound chain on random topologies", criterion_3, Duration::from_secs(300)),
        ("analytic/simulation agreement", criterion_4, Duration::from_secs(300)),
        ("fixed-point residuals", criterion_5, Duration::from_secs(120)),
        ("convexity probe", criterion_6, Duration::from_secs(60)),
        ("PF as proxy at N=50", criterion_7, Duration::from_secs(600)),
        ("TA convergence rate", criterion_8, Duration::from_secs(900)),
        ("Z^PF asymptotics", criterion_9, Duration::from_secs(900)),
        ("spatial unfairness contrast", criterion_10, Duration::from_secs(600)),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, (name, check, limit)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let pass = result.passed && elapsed <= *limit;
        failed += usize::from(!pass);
        println!(
            "criterion {id:>2} {} {name}: {} [{:.2}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
