//! Markov chain samplers for the random-cluster measure.
//!
//! Randomness comes from ChaCha8 streams: a chain with seed `s` and index
//! `c` draws from stream `c` of the generator keyed by `s`, consuming one
//! uniform per visited edge in sweep order, then edge order. Cluster steps
//! draw per cluster (in vertex order of the cluster roots) and then per edge.

mod balance;
mod estimate;

pub use balance::heatbath_transition_matrix;
pub use estimate::{
    estimate, estimate_chains, estimate_with, integrated_time, write_estimates, BatchMeans, BurnIn, Estimate, Run,
    RunConfig, Sampler,
};

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::ClusterCounter;
use crate::lattice::{BoundaryPartition, EdgeId, FiniteGraph, VertexId};
use crate::loops::DobrushinDomain;
use crate::model::{BondConfiguration, ModelParams};

/// Scratch space for the two-sided connectivity search.
#[derive(Clone, Debug)]
struct Search {
    stamp: u32,
    mark: Vec<u32>,
    side: Vec<u8>,
    block_mark: Vec<u32>,
    block_side: Vec<u8>,
    queues: [Vec<VertexId>; 2],
}

/// State of one Markov chain.
#[derive(Clone, Debug)]
pub struct ChainState {
    graph: Arc<FiniteGraph>,
    partition: BoundaryPartition,
    params: ModelParams,
    config: BondConfiguration,
    pinned: Vec<Option<bool>>,
    block_of: Vec<Option<u32>>,
    blocks: Vec<Vec<VertexId>>,
    sweeps: u64,
    seed: u64,
    chain: u64,
    rng: ChaCha8Rng,
    search: Search,
    counter: ClusterCounter,
    spins: Vec<u32>,
}

impl ChainState {
    /// Chain started from the all-closed configuration.
    pub fn new(graph: Arc<FiniteGraph>, partition: BoundaryPartition, params: ModelParams, seed: u64, chain: u64) -> Result<Self> {
        partition.check(&graph)?;
        let blocks: Vec<Vec<VertexId>> = partition.nontrivial_blocks().cloned().collect();
        let mut block_of = vec![None; graph.num_vertices()];
        for (i, b) in blocks.iter().enumerate() {
            for &v in b {
                block_of[v] = Some(i as u32);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chain);
        let n = graph.num_vertices();
        Ok(Self {
            counter: ClusterCounter::new(&graph, &partition),
            config: BondConfiguration::closed(graph.num_edges()),
            pinned: vec![None; graph.num_edges()],
            search: Search {
                stamp: 0,
                mark: vec![0; n],
                side: vec![0; n],
                block_mark: vec![0; blocks.len()],
                block_side: vec![0; blocks.len()],
                queues: [Vec::new(), Vec::new()],
            },
            spins: vec![0; n],
            graph,
            partition,
            params,
            block_of,
            blocks,
            sweeps: 0,
            seed,
            chain,
            rng,
        })
    }

    /// Chain on the primal graph of a Dobrushin domain with its wired arc
    /// held open.
    pub fn dobrushin(domain: &DobrushinDomain, params: ModelParams, seed: u64, chain: u64) -> Result<Self> {
        let g = Arc::new(domain.primal().clone());
        let partition = BoundaryPartition::free(&g);
        let mut state = Self::new(g, partition, params, seed, chain)?;
        for &e in domain.wired_edges() {
            state.pin(e, true);
        }
        Ok(state)
    }

    /// Holds edge `e` at `open` for the rest of the run.
    pub fn pin(&mut self, e: EdgeId, open: bool) {
        self.pinned[e] = Some(open);
        self.config.set(e, open);
    }

    pub fn pinned(&self, e: EdgeId) -> Option<bool> {
        self.pinned[e]
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<FiniteGraph> {
        &self.graph
    }

    pub fn partition(&self) -> &BoundaryPartition {
        &self.partition
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn config(&self) -> &BondConfiguration {
        &self.config
    }

    /// Replaces the configuration; pinned edges keep their values.
    pub fn set_config(&mut self, w: BondConfiguration) -> Result<()> {
        if w.len() != self.graph.num_edges() {
            return Err(Error::InvalidConfiguration(format!(
                "configuration has {} edges, graph has {}",
                w.len(),
                self.graph.num_edges()
            )));
        }
        self.config = w;
        self.apply_pins();
        Ok(())
    }

    /// Sets one unpinned edge.
    pub(crate) fn set_edge(&mut self, e: EdgeId, open: bool) {
        if self.pinned[e].is_none() {
            self.config.set(e, open);
        }
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn chain(&self) -> u64 {
        self.chain
    }

    /// Spins drawn by the last Swendsen–Wang step, colours in `0..q`.
    pub fn last_spins(&self) -> &[u32] {
        &self.spins
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen()
    }

    fn apply_pins(&mut self) {
        for (e, pin) in self.pinned.iter().enumerate() {
            if let Some(open) = *pin {
                self.config.set(e, open);
            }
        }
    }

    /// Whether the endpoints of `e` are joined in the configuration with `e`
    /// removed, counting each boundary block as already connected.
    pub fn connected_without(&mut self, e: EdgeId) -> bool {
        let [u, v] = self.graph.endpoints(e);
        if let (Some(a), Some(b)) = (self.block_of[u], self.block_of[v]) {
            if a == b {
                return true;
            }
        }
        let s = &mut self.search;
        s.stamp = s.stamp.wrapping_add(1);
        if s.stamp == 0 {
            s.mark.iter_mut().for_each(|m| *m = 0);
            s.block_mark.iter_mut().for_each(|m| *m = 0);
            s.stamp = 1;
        }
        let stamp = s.stamp;
        s.queues[0].clear();
        s.queues[1].clear();
        let g = &*self.graph;
        let w = &self.config;
        let block_of = &self.block_of;
        let blocks = &self.blocks;
        // Marks `x` for `side`; returns true when the other side got there first.
        let visit = |s: &mut Search, x: VertexId, side: u8| -> bool {
            if s.mark[x] == stamp {
                return s.side[x] != side;
            }
            s.mark[x] = stamp;
            s.side[x] = side;
            s.queues[side as usize].push(x);
            if let Some(b) = block_of[x] {
                let b = b as usize;
                if s.block_mark[b] == stamp {
                    return s.block_side[b] != side;
                }
                s.block_mark[b] = stamp;
                s.block_side[b] = side;
                for &y in &blocks[b] {
                    if s.mark[y] == stamp {
                        if s.side[y] != side {
                            return true;
                        }
                        continue;
                    }
                    s.mark[y] = stamp;
                    s.side[y] = side;
                    s.queues[side as usize].push(y);
                }
            }
            false
        };
        if visit(s, u, 0) || visit(s, v, 1) {
            return true;
        }
        let mut heads = [0usize; 2];
        loop {
            let remaining = [s.queues[0].len() - heads[0], s.queues[1].len() - heads[1]];
            if remaining[0] == 0 || remaining[1] == 0 {
                return false;
            }
            let side = if remaining[0] <= remaining[1] { 0 } else { 1 };
            let x = s.queues[side][heads[side]];
            heads[side] += 1;
            for &f in g.incident(x) {
                if f == e || !w.is_open(f) {
                    continue;
                }
                if visit(s, g.other(f, x), side as u8) {
                    return true;
                }
            }
        }
    }

    /// Probability that `e` is open given every other edge.
    pub fn open_probability(&mut self, e: EdgeId) -> f64 {
        if self.connected_without(e) {
            self.params.p()
        } else {
            self.params.open_if_disconnected()
        }
    }

    /// Resamples `e` from its conditional law using the uniform `u`: open iff
    /// `u` is below the conditional probability. Pinned edges are left alone.
    pub fn heatbath_update_with(&mut self, e: EdgeId, u: f64) {
        if self.pinned[e].is_some() {
            return;
        }
        let prob = self.open_probability(e);
        self.config.set(e, u < prob);
    }

    /// One heat-bath update of `e` with a fresh uniform.
    pub fn heatbath_step(&mut self, e: EdgeId) {
        let u = self.uniform();
        self.heatbath_update_with(e, u);
    }

    /// Heat-bath updates of every edge in index order.
    pub fn heatbath_sweep(&mut self) {
        for e in 0..self.graph.num_edges() {
            self.heatbath_step(e);
        }
        self.sweeps += 1;
    }

    /// Root of every vertex in the current clusters, boundary blocks merged.
    fn cluster_roots(&mut self) -> Vec<usize> {
        let uf = self.counter.load(&self.graph, &self.config);
        (0..self.graph.num_vertices()).map(|v| uf.find(v)).collect()
    }

    /// Chayes–Machta step: clusters are activated with probability `1/q`;
    /// edges inside the active set are resampled as Bernoulli(p), edges
    /// leaving it are closed, the rest are kept.
    pub fn chayes_machta_step(&mut self) -> Result<()> {
        let q = self.params.q();
        if q < 1.0 {
            return Err(Error::InvalidQ(q));
        }
        let roots = self.cluster_roots();
        let mut active: Vec<Option<bool>> = vec![None; roots.len()];
        for &r in &roots {
            if active[r].is_none() {
                active[r] = Some(self.rng.gen::<f64>() * q < 1.0);
            }
        }
        let p = self.params.p();
        for e in 0..self.graph.num_edges() {
            if self.pinned[e].is_some() {
                continue;
            }
            let [u, v] = self.graph.endpoints(e);
            match (active[roots[u]] == Some(true), active[roots[v]] == Some(true)) {
                (true, true) => {
                    let open = self.rng.gen::<f64>() < p;
                    self.config.set(e, open);
                }
                (false, false) => {}
                _ => self.config.set(e, false),
            }
        }
        self.sweeps += 1;
        Ok(())
    }

    /// Swendsen–Wang step for integer `q`: clusters get uniform colours
    /// (the cluster of a single boundary block gets colour 0), then every
    /// edge is open with probability `p` if its endpoints share a colour.
    pub fn swendsen_wang_step(&mut self) -> Result<()> {
        let q = self.params.q();
        if q < 1.0 || q.fract() != 0.0 || q > u32::MAX as f64 {
            return Err(Error::InvalidQ(q));
        }
        let colours = q as u32;
        let roots = self.cluster_roots();
        const UNSET: u32 = u32::MAX;
        let mut colour = vec![UNSET; self.graph.num_vertices()];
        if self.blocks.len() == 1 {
            colour[roots[self.blocks[0][0]]] = 0;
        }
        for v in 0..self.graph.num_vertices() {
            let r = roots[v];
            if colour[r] == UNSET {
                colour[r] = self.rng.gen_range(0..colours);
            }
            self.spins[v] = colour[r];
        }
        let p = self.params.p();
        for e in 0..self.graph.num_edges() {
            if self.pinned[e].is_some() {
                continue;
            }
            let [u, v] = self.graph.endpoints(e);
            let open = self.spins[u] == self.spins[v] && self.rng.gen::<f64>() < p;
            self.config.set(e, open);
        }
        self.sweeps += 1;
        Ok(())
    }

    /// One sweep of the given sampler.
    pub fn sweep(&mut self, sampler: Sampler) -> Result<()> {
        match sampler {
            Sampler::HeatBath => {
                self.heatbath_sweep();
                Ok(())
            }
            Sampler::ChayesMachta => self.chayes_machta_step(),
            Sampler::SwendsenWang => self.swendsen_wang_step(),
        }
    }
}
