use super::ChainState;
use crate::error::{Error, Result};
use crate::model::BondConfiguration;

const MATRIX_BUDGET: usize = 10;

/// Transition matrix of the random-scan heat-bath chain (a uniformly chosen
/// unpinned edge is resampled from its conditional law), indexed by
/// configuration masks. Built from the sampler's own conditional
/// probabilities.
pub fn heatbath_transition_matrix(template: &ChainState) -> Result<Vec<Vec<f64>>> {
    let m = template.graph().num_edges();
    if m > MATRIX_BUDGET {
        return Err(Error::TooLarge {
            what: "edges for a transition matrix",
            size: m,
            budget: MATRIX_BUDGET,
        });
    }
    let free: Vec<usize> = (0..m).filter(|&e| template.pinned(e).is_none()).collect();
    let size = 1usize << m;
    let mut matrix = vec![vec![0.0; size]; size];
    let mut state = template.clone();
    for (from, row) in matrix.iter_mut().enumerate() {
        let w = BondConfiguration::from_mask(from as u64, m);
        if (0..m).any(|e| template.pinned(e).is_some_and(|open| w.is_open(e) != open)) {
            row[from] = 1.0;
            continue;
        }
        state.set_config(w)?;
        for &e in &free {
            let prob = state.open_probability(e);
            let open = from | (1 << e);
            let closed = from & !(1 << e);
            row[open] += prob / free.len() as f64;
            row[closed] += (1.0 - prob) / free.len() as f64;
        }
        if free.is_empty() {
            row[from] = 1.0;
        }
    }
    Ok(matrix)
}
