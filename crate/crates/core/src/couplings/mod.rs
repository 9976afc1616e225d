//! Monotone couplings of boundary conditions on the box `Λ_n`, mixing-gap
//! measurement and sampled Edwards–Sokal spin marginals.
//!
//! A [`CouplingChain`] runs two heat-bath chains, one with boundary condition
//! `ξ` and one wired, driven by the same uniforms so that the wired chain
//! always dominates. A coupled sample is produced by a revealing pass: edges
//! of `Λ_n \ Λ_k` are visited in the adaptive exploration order of the
//! coupling (lowest edge index first among eligible edges), each updated in
//! both chains with one shared uniform. The unrevealed edges are then visited
//! in index order; on every unrevealed component where both chains induce the
//! same boundary partition the two chains share one draw.

mod gap;
mod spins;

pub use gap::{mixing_gap, mixing_gap_box, GapEstimate, GapMode};
pub use spins::sample_spin_marginals;

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{build_box, BoundaryKind, BoundaryPartition, EdgeId, FiniteGraph, VertexId};
use crate::mc::ChainState;
use crate::model::{BondConfiguration, ModelParams};
use crate::unionfind::UnionFind;

/// Heat-bath sweeps run before a single coupled sample.
pub const DEFAULT_BURN_IN: u64 = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    /// Explores the cluster of the boundary in the wired configuration.
    P,
    /// Explores the dual cluster of the outer face in the `ξ` configuration.
    Q,
}

impl Coupling {
    pub fn name(self) -> &'static str {
        match self {
            Coupling::P => "P",
            Coupling::Q => "Q",
        }
    }
}

/// One coupled sample `(ω_ξ, ω_1)` with its revealing record.
#[derive(Clone, Debug)]
pub struct CoupledPair {
    pub coupling: Coupling,
    pub seed: u64,
    pub xi: BondConfiguration,
    pub wired: BondConfiguration,
    /// Uniform used for each edge in the revealing pass.
    pub uniforms: Vec<f64>,
    /// Edges in the order they were visited.
    pub order: Vec<EdgeId>,
    /// Length of the adaptive part of `order`.
    pub explored: usize,
    /// Primal edges of the outermost circuit (dual-open in `ω_1` for `P`,
    /// open in `ω_ξ` for `Q`) surrounding `Λ_k`, if one exists.
    pub circuit: Option<Vec<EdgeId>>,
    pub monotone_ok: bool,
    /// The circuit is closed (for `P`) or open (for `Q`) in the other
    /// configuration and both agree on every edge inside it.
    pub agree_ok: bool,
}

impl CoupledPair {
    pub fn circuit_found(&self) -> bool {
        self.circuit.is_some()
    }
}

/// Writes the audit log `seed,circuit_found,monotone_ok,agree_ok`.
pub fn write_audit(pairs: &[CoupledPair], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "seed,circuit_found,monotone_ok,agree_ok")?;
    for p in pairs {
        writeln!(out, "{},{},{},{}", p.seed, p.circuit_found(), p.monotone_ok, p.agree_ok)?;
    }
    Ok(())
}

/// The box `Λ_n` with the inner box `Λ_k` and the faces of the square grid.
#[derive(Clone, Debug)]
pub struct Annulus {
    n: i32,
    k: i32,
    graph: Arc<FiniteGraph>,
    edge_faces: Vec<[usize; 2]>,
    face_edges: Vec<Vec<EdgeId>>,
}

impl Annulus {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if k < 1 || k >= n {
            return Err(Error::InvalidRange(format!("need 1 <= k < n, got k = {k}, n = {n}")));
        }
        let graph = Arc::new(build_box(n));
        let (n, k) = (n as i32, k as i32);
        let side = 2 * n as usize;
        let outer = side * side;
        let face = |x: i32, y: i32| {
            if (-n..n).contains(&x) && (-n..n).contains(&y) {
                (y + n) as usize * side + (x + n) as usize
            } else {
                outer
            }
        };
        let mut face_edges = vec![Vec::new(); outer + 1];
        let edge_faces: Vec<[usize; 2]> = graph
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &[u, v])| {
                let (a, b) = (graph.coord(u), graph.coord(v));
                let (x, y) = (a.x.min(b.x) / 2, a.y.min(b.y) / 2);
                let faces = if a.y == b.y { [face(x, y), face(x, y - 1)] } else { [face(x, y), face(x - 1, y)] };
                for f in faces {
                    face_edges[f].push(e);
                }
                faces
            })
            .collect();
        Ok(Self {
            n,
            k,
            graph,
            edge_faces,
            face_edges,
        })
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn n(&self) -> u32 {
        self.n as u32
    }

    pub fn k(&self) -> u32 {
        self.k as u32
    }

    pub fn in_inner(&self, v: VertexId) -> bool {
        let c = self.graph.coord(v);
        c.x.abs() <= 2 * self.k && c.y.abs() <= 2 * self.k
    }

    /// Both endpoints in `Λ_k`.
    pub fn is_inner_edge(&self, e: EdgeId) -> bool {
        let [u, v] = self.graph.endpoints(e);
        self.in_inner(u) && self.in_inner(v)
    }

    fn outer_face(&self) -> usize {
        self.face_edges.len() - 1
    }

    fn other_face(&self, e: EdgeId, f: usize) -> usize {
        let [a, b] = self.edge_faces[e];
        if a == f {
            b
        } else {
            a
        }
    }

    fn touches_inner(&self, e: EdgeId) -> bool {
        let [u, v] = self.graph.endpoints(e);
        self.in_inner(u) || self.in_inner(v)
    }

    /// Vertices joined to the boundary by open edges of `w` outside `Λ_k`.
    fn boundary_cluster(&self, w: &BondConfiguration) -> Vec<bool> {
        let g = &self.graph;
        let mut seen = vec![false; g.num_vertices()];
        let mut stack: Vec<VertexId> = g.boundary().to_vec();
        for &v in &stack {
            seen[v] = true;
        }
        while let Some(v) = stack.pop() {
            for (e, u) in g.neighbors(v) {
                if !seen[u] && w.is_open(e) && !self.is_inner_edge(e) {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// Outermost dual-open circuit of `w` in `Λ_n \ Λ_k` around `Λ_k`, as the
    /// primal edges it crosses, with the edges strictly inside it.
    pub fn dual_circuit(&self, w: &BondConfiguration) -> Option<(Vec<EdgeId>, Vec<EdgeId>)> {
        let g = &self.graph;
        let cluster = self.boundary_cluster(w);
        if (0..g.num_vertices()).any(|v| cluster[v] && self.in_inner(v)) {
            return None;
        }
        let origin = g.vertex_at(crate::lattice::Coord::site(0, 0))?;
        let mut inside = vec![false; g.num_vertices()];
        inside[origin] = true;
        let mut stack = vec![origin];
        while let Some(v) = stack.pop() {
            for (_, u) in g.neighbors(v) {
                if !cluster[u] && !inside[u] {
                    inside[u] = true;
                    stack.push(u);
                }
            }
        }
        let mut circuit = Vec::new();
        let mut interior = Vec::new();
        for (e, &[u, v]) in g.edges().iter().enumerate() {
            match (inside[u], inside[v]) {
                (true, true) => interior.push(e),
                (false, false) => {}
                _ => circuit.push(e),
            }
        }
        Some((circuit, interior))
    }

    /// Outermost open circuit of `w` with vertices outside `Λ_k` surrounding
    /// `Λ_k`, with the edges strictly inside it.
    pub fn open_circuit(&self, w: &BondConfiguration) -> Option<(Vec<EdgeId>, Vec<EdgeId>)> {
        let faces = self.face_edges.len();
        let mut reached = vec![false; faces];
        let outer = self.outer_face();
        reached[outer] = true;
        let mut stack = vec![outer];
        while let Some(f) = stack.pop() {
            for &e in &self.face_edges[f] {
                if w.is_open(e) && !self.touches_inner(e) {
                    continue;
                }
                if self.touches_inner(e) {
                    return None;
                }
                let h = self.other_face(e, f);
                if !reached[h] {
                    reached[h] = true;
                    stack.push(h);
                }
            }
        }
        let mut circuit = Vec::new();
        let mut interior = Vec::new();
        for (e, &[a, b]) in self.edge_faces.iter().enumerate() {
            match (reached[a], reached[b]) {
                (false, false) => interior.push(e),
                (true, true) => {}
                _ => circuit.push(e),
            }
        }
        Some((circuit, interior))
    }
}

/// Two heat-bath chains on `Λ_n`, boundary conditions `ξ` and wired, driven
/// by shared uniforms.
#[derive(Clone, Debug)]
pub struct CouplingChain {
    annulus: Arc<Annulus>,
    xi: ChainState,
    wired: ChainState,
    xi_partition: BoundaryPartition,
    rng: ChaCha8Rng,
    seed: u64,
}

impl CouplingChain {
    /// Both chains start from the all-closed configuration.
    pub fn new(n: u32, k: u32, xi: BoundaryKind, params: ModelParams, seed: u64) -> Result<Self> {
        let annulus = Arc::new(Annulus::new(n, k)?);
        let g = annulus.graph.clone();
        let xi_partition = BoundaryPartition::standard(&g, xi)?;
        Ok(Self {
            xi: ChainState::new(g.clone(), xi_partition.clone(), params, seed, 0)?,
            wired: ChainState::new(g.clone(), BoundaryPartition::wired(&g), params, seed, 1)?,
            xi_partition,
            rng: ChaCha8Rng::seed_from_u64(seed),
            annulus,
            seed,
        })
    }

    pub fn annulus(&self) -> &Annulus {
        &self.annulus
    }

    pub fn xi_config(&self) -> &BondConfiguration {
        self.xi.config()
    }

    pub fn wired_config(&self) -> &BondConfiguration {
        self.wired.config()
    }

    fn update(&mut self, e: EdgeId) -> f64 {
        let u = self.rng.gen::<f64>();
        self.xi.heatbath_update_with(e, u);
        self.wired.heatbath_update_with(e, u);
        u
    }

    /// One sweep of shared-uniform heat-bath updates in edge order.
    pub fn sweep(&mut self) {
        for e in 0..self.annulus.graph.num_edges() {
            self.update(e);
        }
    }

    /// `count` pairs from this chain, `thin` sweeps apart.
    pub fn samples(&mut self, coupling: Coupling, count: usize, thin: u64) -> Vec<CoupledPair> {
        (0..count)
            .map(|_| {
                for _ in 0..thin {
                    self.sweep();
                }
                self.sample(coupling)
            })
            .collect()
    }

    /// Runs a revealing pass and reports the resulting pair.
    pub fn sample(&mut self, coupling: Coupling) -> CoupledPair {
        let m = self.annulus.graph.num_edges();
        let mut uniforms = vec![f64::NAN; m];
        let mut revealed = vec![false; m];
        let mut order = Vec::with_capacity(m);
        match coupling {
            Coupling::P => self.explore_p(&mut revealed, &mut order, &mut uniforms),
            Coupling::Q => self.explore_q(&mut revealed, &mut order, &mut uniforms),
        }
        let explored = order.len();
        self.fill_remainder(&revealed, &mut order, &mut uniforms);
        self.diagnose(coupling, uniforms, order, explored)
    }

    fn explore_p(&mut self, revealed: &mut [bool], order: &mut Vec<EdgeId>, uniforms: &mut [f64]) {
        let a = self.annulus.clone();
        let g = &a.graph;
        let mut reached = vec![false; g.num_vertices()];
        let mut frontier = BTreeSet::new();
        let reach = |v: VertexId, reached: &mut [bool], frontier: &mut BTreeSet<EdgeId>, revealed: &[bool]| {
            reached[v] = true;
            for &e in g.incident(v) {
                if !revealed[e] && !a.is_inner_edge(e) {
                    frontier.insert(e);
                }
            }
        };
        for &v in g.boundary() {
            reach(v, &mut reached, &mut frontier, revealed);
        }
        while let Some(e) = frontier.pop_first() {
            revealed[e] = true;
            order.push(e);
            uniforms[e] = self.update(e);
            if self.wired.config().is_open(e) {
                for v in g.endpoints(e) {
                    if !reached[v] {
                        reach(v, &mut reached, &mut frontier, revealed);
                    }
                }
            }
        }
    }

    fn explore_q(&mut self, revealed: &mut [bool], order: &mut Vec<EdgeId>, uniforms: &mut [f64]) {
        let a = self.annulus.clone();
        let mut reached = vec![false; a.face_edges.len()];
        let mut frontier = BTreeSet::new();
        let reach = |f: usize, reached: &mut [bool], frontier: &mut BTreeSet<EdgeId>, revealed: &[bool]| {
            reached[f] = true;
            for &e in &a.face_edges[f] {
                if !revealed[e] && !a.is_inner_edge(e) {
                    frontier.insert(e);
                }
            }
        };
        reach(a.outer_face(), &mut reached, &mut frontier, revealed);
        while let Some(e) = frontier.pop_first() {
            revealed[e] = true;
            order.push(e);
            uniforms[e] = self.update(e);
            if !self.xi.config().is_open(e) {
                for f in a.edge_faces[e] {
                    if !reached[f] {
                        reach(f, &mut reached, &mut frontier, revealed);
                    }
                }
            }
        }
    }

    /// Block labels, in order of first appearance, that `w` outside `inside`
    /// and the wiring of `partition` induce on `vertices`.
    fn induced_partition(
        &self,
        w: &BondConfiguration,
        partition: &BoundaryPartition,
        inside: &[bool],
        vertices: &[VertexId],
    ) -> Vec<usize> {
        let g = &self.annulus.graph;
        let mut uf = UnionFind::new(g.num_vertices());
        for (e, &[u, v]) in g.edges().iter().enumerate() {
            if !inside[e] && w.is_open(e) {
                uf.union(u, v);
            }
        }
        for block in partition.nontrivial_blocks() {
            for pair in block.windows(2) {
                uf.union(pair[0], pair[1]);
            }
        }
        let mut roots: Vec<usize> = Vec::new();
        vertices
            .iter()
            .map(|&v| {
                let r = uf.find(v);
                roots.iter().position(|&x| x == r).unwrap_or_else(|| {
                    roots.push(r);
                    roots.len() - 1
                })
            })
            .collect()
    }

    fn fill_remainder(&mut self, revealed: &[bool], order: &mut Vec<EdgeId>, uniforms: &mut [f64]) {
        let a = self.annulus.clone();
        let g = &a.graph;
        let m = g.num_edges();
        let mut uf = UnionFind::new(g.num_vertices());
        for (e, &[u, v]) in g.edges().iter().enumerate() {
            if !revealed[e] {
                uf.union(u, v);
            }
        }
        let mut shared = vec![false; m];
        let mut decided: Vec<Option<bool>> = vec![None; g.num_vertices()];
        let wired_partition = BoundaryPartition::wired(g);
        for e in (0..m).filter(|&e| !revealed[e]) {
            let root = uf.find(g.endpoints(e)[0]);
            let share = match decided[root] {
                Some(s) => s,
                None => {
                    let inside: Vec<bool> = (0..m)
                        .map(|f| !revealed[f] && uf.find(g.endpoints(f)[0]) == root)
                        .collect();
                    let vertices: Vec<VertexId> = (0..g.num_vertices()).filter(|&v| uf.find(v) == root).collect();
                    let s = self.induced_partition(self.xi.config(), &self.xi_partition, &inside, &vertices)
                        == self.induced_partition(self.wired.config(), &wired_partition, &inside, &vertices);
                    decided[root] = Some(s);
                    s
                }
            };
            shared[e] = share;
        }
        for e in (0..m).filter(|&e| !revealed[e]) {
            order.push(e);
            if shared[e] {
                let u = self.rng.gen::<f64>();
                self.wired.heatbath_update_with(e, u);
                let open = self.wired.config().is_open(e);
                self.xi.set_edge(e, open);
                uniforms[e] = u;
            } else {
                uniforms[e] = self.update(e);
            }
        }
    }

    fn diagnose(&self, coupling: Coupling, uniforms: Vec<f64>, order: Vec<EdgeId>, explored: usize) -> CoupledPair {
        let xi = self.xi.config().clone();
        let wired = self.wired.config().clone();
        let monotone_ok = xi.le(&wired);
        let found = match coupling {
            Coupling::P => self.annulus.dual_circuit(&wired),
            Coupling::Q => self.annulus.open_circuit(&xi),
        };
        let agree_ok = match &found {
            None => true,
            Some((circuit, interior)) => {
                let circuit_ok = match coupling {
                    Coupling::P => circuit.iter().all(|&e| !xi.is_open(e)),
                    Coupling::Q => circuit.iter().all(|&e| wired.is_open(e)),
                };
                circuit_ok && interior.iter().all(|&e| xi.is_open(e) == wired.is_open(e))
            }
        };
        CoupledPair {
            coupling,
            seed: self.seed,
            xi,
            wired,
            uniforms,
            order,
            explored,
            circuit: found.map(|(c, _)| c),
            monotone_ok,
            agree_ok,
        }
    }
}

fn coupled_sample(
    coupling: Coupling,
    n: u32,
    k: u32,
    xi: BoundaryKind,
    params: ModelParams,
    seed: u64,
) -> Result<CoupledPair> {
    let mut chain = CouplingChain::new(n, k, xi, params, seed)?;
    for _ in 0..DEFAULT_BURN_IN {
        chain.sweep();
    }
    Ok(chain.sample(coupling))
}

/// A `P`-coupled pair from a fresh chain after [`DEFAULT_BURN_IN`] sweeps.
pub fn coupled_sample_p(n: u32, k: u32, xi: BoundaryKind, params: ModelParams, seed: u64) -> Result<CoupledPair> {
    coupled_sample(Coupling::P, n, k, xi, params, seed)
}

/// A `Q`-coupled pair from a fresh chain after [`DEFAULT_BURN_IN`] sweeps.
pub fn coupled_sample_q(n: u32, k: u32, xi: BoundaryKind, params: ModelParams, seed: u64) -> Result<CoupledPair> {
    coupled_sample(Coupling::Q, n, k, xi, params, seed)
}

/// `count` pairs from one chain after [`DEFAULT_BURN_IN`] sweeps, `thin`
/// sweeps apart.
#[allow(clippy::too_many_arguments)]
pub fn coupled_samples(
    coupling: Coupling,
    n: u32,
    k: u32,
    xi: BoundaryKind,
    params: ModelParams,
    seed: u64,
    count: usize,
    thin: u64,
) -> Result<Vec<CoupledPair>> {
    let mut chain = CouplingChain::new(n, k, xi, params, seed)?;
    for _ in 0..DEFAULT_BURN_IN {
        chain.sweep();
    }
    Ok(chain.samples(coupling, count, thin))
}
