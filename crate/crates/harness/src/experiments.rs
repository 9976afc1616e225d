//! Experiment drivers. Each size of the schedule runs as its own chain
//! (chain index = position in the schedule), in parallel.

use std::sync::Arc;

use rayon::prelude::*;
use rcm_core::events::EventPredicate;
use rcm_core::exact::{event_probabilities, two_point};
use rcm_core::lattice::{build_box, build_cover_box, build_rect, BoundaryKind, BoundaryPartition, Coord, FiniteGraph};
use rcm_core::mc::{estimate, estimate_with, ChainState, Estimate, RunConfig};
use rcm_core::unionfind::UnionFind;
use rcm_core::ModelParams;

use crate::config::{Experiment, ExperimentConfig, Mode};
use crate::error::Result;
use crate::report::{Report, Row};

/// Estimates of `events` under the configured mode; exact values carry a zero
/// standard error.
fn probabilities(
    g: FiniteGraph,
    xi: BoundaryPartition,
    params: ModelParams,
    events: &[EventPredicate],
    mode: Mode,
    run: &RunConfig,
    seed: u64,
    chain: u64,
) -> Result<Vec<Estimate>> {
    match mode {
        Mode::Exact => Ok(event_probabilities(&g, params, &xi, events)?
            .into_iter()
            .map(|p| exact_estimate(p, seed))
            .collect()),
        Mode::MonteCarlo => {
            let mut state = ChainState::new(Arc::new(g), xi, params, seed, chain)?;
            Ok(estimate(&mut state, events, run, None)?.estimates)
        }
    }
}

fn exact_estimate(mean: f64, seed: u64) -> Estimate {
    Estimate {
        mean,
        std_error: 0.0,
        n_samples: 0,
        n_batches: 0,
        seed,
    }
}

fn events(g: &FiniteGraph, ids: &[String]) -> Result<Vec<EventPredicate>> {
    Ok(ids.iter().map(|id| EventPredicate::parse(id, g)).collect::<rcm_core::Result<_>>()?)
}

/// `Σ_{x ∈ Λ_n} φ[0 ↔ x]` on `Λ_n` with boundary condition `bc`. In Monte
/// Carlo mode this is the mean size of the origin cluster with the boundary
/// blocks wired together.
pub fn susceptibility(n: u32, params: ModelParams, bc: BoundaryKind, mode: Mode, run: &RunConfig, seed: u64, chain: u64) -> Result<Estimate> {
    let g = build_box(n);
    let xi = BoundaryPartition::standard(&g, bc)?;
    let origin = g.vertex_at(Coord::site(0, 0)).expect("origin lies in every box");
    match mode {
        Mode::Exact => {
            let mut sum = 0.0;
            for x in 0..g.num_vertices() {
                sum += two_point(&g, params, &xi, origin, x)?;
            }
            Ok(exact_estimate(sum, seed))
        }
        Mode::MonteCarlo => {
            let mut base = UnionFind::new(g.num_vertices());
            for block in xi.nontrivial_blocks() {
                for &v in &block[1..] {
                    base.union(block[0], v);
                }
            }
            let mut uf = base.clone();
            let mut state = ChainState::new(Arc::new(g), xi, params, seed, chain)?;
            let observe = |s: &ChainState, out: &mut [f64]| {
                uf.copy_from(&base);
                for (e, &[u, v]) in s.graph().edges().iter().enumerate() {
                    if s.config().is_open(e) {
                        uf.union(u, v);
                    }
                }
                out[0] = uf.set_size(origin) as f64;
            };
            Ok(estimate_with(&mut state, 1, run, observe, None)?.estimates[0])
        }
    }
}

fn width(cfg: &ExperimentConfig, n: u32) -> i32 {
    ((cfg.alpha * n as f64).round() as i32).max(1)
}

fn rows_for(cfg: &ExperimentConfig, n: u32, chain: u64) -> Result<Vec<Row>> {
    let params = ModelParams::new(cfg.p_value(), cfg.q)?;
    let run = cfg.run_config();
    let row = |quantity: String, est: Estimate| Row {
        experiment: cfg.experiment.name().to_string(),
        n,
        quantity,
        mean: est.mean,
        std_err: est.std_error,
        seed: cfg.seed,
    };
    let single = |g: FiniteGraph, id: String, quantity: &str| -> Result<Row> {
        let xi = BoundaryPartition::standard(&g, cfg.bc)?;
        let evs = events(&g, &[id])?;
        let est = probabilities(g, xi, params, &evs, cfg.mode, &run, cfg.seed, chain)?;
        Ok(row(quantity.to_string(), est[0]))
    };
    let ni = n as i32;
    Ok(match cfg.experiment {
        Experiment::DecayFree => {
            let arm = single(build_box(2 * n), format!("onearm:{n}"), "one_arm")?;
            let rate = Row {
                quantity: "rate".into(),
                mean: -arm.mean.ln() / n as f64,
                std_err: arm.std_err / (arm.mean * n as f64),
                ..arm.clone()
            };
            vec![arm, rate]
        }
        Experiment::CrossingFree => {
            let w = width(cfg, n);
            vec![single(build_rect(0, 0, w, ni)?, format!("Ch:0,0:{w},{n}"), "crossing")?]
        }
        Experiment::Annulus => vec![single(build_box(cfg.ratio * n), format!("annulus:0,0:{n}"), "circuit")?],
        Experiment::CrossingUniform => {
            let w = width(cfg, n);
            let g = build_rect(-ni, -ni, w + ni, 2 * ni)?;
            vec![single(g, format!("Ch:0,0:{w},{n}"), "crossing")?]
        }
        Experiment::SpiralDecay => {
            let g = build_cover_box(n, cfg.height)?;
            let xi = BoundaryPartition::standard(&g, cfg.bc)?;
            let ids: Vec<String> = cfg.ks.iter().map(|k| format!("conn:0,0,0:0,0,-{k}")).collect();
            let evs = events(&g, &ids)?;
            probabilities(g, xi, params, &evs, cfg.mode, &run, cfg.seed, chain)?
                .into_iter()
                .zip(&cfg.ks)
                .map(|(est, k)| row(format!("two_point_k{k}"), est))
                .collect()
        }
        Experiment::Susceptibility => {
            let est = susceptibility(n, params, cfg.bc, cfg.mode, &run, cfg.seed, chain)?;
            vec![row("chi".into(), est)]
        }
    })
}

/// Runs every size of the schedule and assembles the report in schedule order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let per_size: Vec<Result<Vec<Row>>> = cfg
        .sizes
        .par_iter()
        .enumerate()
        .map(|(i, &n)| rows_for(cfg, n, i as u64))
        .collect();
    let mut rows = Vec::new();
    for r in per_size {
        rows.extend(r?);
    }
    Ok(Report::new(cfg.hash(), rows))
}
