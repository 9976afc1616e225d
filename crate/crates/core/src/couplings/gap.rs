use std::sync::Arc;

use crate::error::{Error, Result};
use crate::events::EventPredicate;
use crate::exact::event_probability;
use crate::lattice::{build_box, BoundaryKind, BoundaryPartition, FiniteGraph};
use crate::mc::{estimate_chains, ChainState, RunConfig};
use crate::model::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GapMode {
    Exact,
    /// `chains` independent chains per boundary condition.
    MonteCarlo { config: RunConfig, chains: u64, seed: u64 },
}

/// Relative gap `|φ^ξ[A] − φ^ψ[A]| / φ^ξ[A]` with the two probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapEstimate {
    pub gap: f64,
    /// Zero in exact mode; delta-method error otherwise.
    pub std_error: f64,
    pub xi: f64,
    pub psi: f64,
}

pub fn mixing_gap(
    g: &FiniteGraph,
    event: &EventPredicate,
    xi: &BoundaryPartition,
    psi: &BoundaryPartition,
    params: ModelParams,
    mode: GapMode,
) -> Result<GapEstimate> {
    let (a, b, sa, sb) = match mode {
        GapMode::Exact => (
            event_probability(g, params, xi, event)?,
            event_probability(g, params, psi, event)?,
            0.0,
            0.0,
        ),
        GapMode::MonteCarlo { config, chains, seed } => {
            let graph = Arc::new(g.clone());
            let events = std::slice::from_ref(event);
            let run = |partition: &BoundaryPartition, stream: u64| {
                estimate_chains(
                    chains,
                    |c| ChainState::new(graph.clone(), partition.clone(), params, seed, stream * chains + c),
                    events,
                    &config,
                )
                .map(|e| e[0])
            };
            let ea = run(xi, 0)?;
            let eb = run(psi, 1)?;
            (ea.mean, eb.mean, ea.std_error, eb.std_error)
        }
    };
    if a == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let gap = (a - b).abs() / a;
    let std_error = ((b / (a * a) * sa).powi(2) + (sb / a).powi(2)).sqrt();
    Ok(GapEstimate {
        gap,
        std_error,
        xi: a,
        psi: b,
    })
}

/// [`mixing_gap`] on `Λ_n` for an event of `Λ_k` given by its identifier.
pub fn mixing_gap_box(
    n: u32,
    k: u32,
    event: &str,
    xi: BoundaryKind,
    psi: BoundaryKind,
    params: ModelParams,
    mode: GapMode,
) -> Result<GapEstimate> {
    if k == 0 || 2 * k > n {
        return Err(Error::InvalidRange(format!("need 1 <= k and 2k <= n, got k = {k}, n = {n}")));
    }
    let g = build_box(n);
    let inner = build_box(k);
    EventPredicate::parse(event, &inner)?;
    let predicate = EventPredicate::parse(event, &g)?;
    mixing_gap(
        &g,
        &predicate,
        &BoundaryPartition::standard(&g, xi)?,
        &BoundaryPartition::standard(&g, psi)?,
        params,
        mode,
    )
}
