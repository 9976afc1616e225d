use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{BoundaryPartition, FiniteGraph};
use crate::mc::{estimate_with, ChainState, Estimate, RunConfig, Sampler};
use crate::model::ModelParams;

/// Spin marginals `μ[σ_v = c]` read off the colourings of Swendsen–Wang
/// steps, indexed `[v][c]`. Under wired or Dobrushin conditions the
/// boundary cluster carries colour 0.
pub fn sample_spin_marginals(
    g: Arc<FiniteGraph>,
    xi: BoundaryPartition,
    q: u32,
    p: f64,
    cfg: &RunConfig,
    seed: u64,
) -> Result<Vec<Vec<Estimate>>> {
    if cfg.sampler != Sampler::SwendsenWang {
        return Err(Error::InvalidParams("spin marginals need the Swendsen–Wang sampler".into()));
    }
    let n = g.num_vertices();
    let qs = q as usize;
    let mut state = ChainState::new(g, xi, ModelParams::new(p, q as f64)?, seed, 0)?;
    let run = estimate_with(
        &mut state,
        n * qs,
        cfg,
        |s, out| {
            out.fill(0.0);
            for (v, &c) in s.last_spins().iter().enumerate() {
                out[v * qs + c as usize] = 1.0;
            }
        },
        None,
    )?;
    Ok(run.estimates.chunks(qs).map(|c| c.to_vec()).collect())
}
