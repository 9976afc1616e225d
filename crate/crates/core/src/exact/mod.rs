//! Brute-force enumeration of the random-cluster and Potts measures on small
//! graphs.

mod potts;
mod split;
mod sum;

pub use potts::{coupling_check, potts_enumerate, CouplingReport, PottsBoundary, PottsSummary};
pub use split::horizontal_crossing_probability;
pub use sum::CompensatedSum;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::events::EventPredicate;
use crate::lattice::{BoundaryPartition, DualGraph, EdgeId, FiniteGraph, VertexId};
use crate::model::{BondConfiguration, ModelParams};
use crate::unionfind::UnionFind;

/// Largest number of enumerated edges.
pub const EDGE_BUDGET: usize = 26;
/// Largest number of edges for which the full probability vector is stored.
pub const MEASURE_BUDGET: usize = 22;

const CHUNK_BITS: usize = 10;

/// Cluster counting with a boundary partition pre-applied.
#[derive(Clone, Debug)]
pub(crate) struct ClusterCounter {
    base: UnionFind,
    scratch: UnionFind,
}

impl ClusterCounter {
    pub(crate) fn new(g: &FiniteGraph, xi: &BoundaryPartition) -> Self {
        let mut base = UnionFind::new(g.num_vertices());
        for block in xi.nontrivial_blocks() {
            for &v in &block[1..] {
                base.union(block[0], v);
            }
        }
        let scratch = base.clone();
        Self { base, scratch }
    }

    /// Loads the partition and the open edges of `w` into the scratch forest.
    pub(crate) fn load(&mut self, g: &FiniteGraph, w: &BondConfiguration) -> &mut UnionFind {
        self.scratch.copy_from(&self.base);
        for (e, &[u, v]) in g.edges().iter().enumerate() {
            if w.is_open(e) {
                self.scratch.union(u, v);
            }
        }
        &mut self.scratch
    }

    pub(crate) fn count(&mut self, g: &FiniteGraph, w: &BondConfiguration) -> usize {
        self.load(g, w).components()
    }
}

/// Number of clusters of `w` once every block of `xi` is wired together.
pub fn cluster_count(g: &FiniteGraph, w: &BondConfiguration, xi: &BoundaryPartition) -> Result<usize> {
    xi.check(g)?;
    check_len(g, w)?;
    Ok(ClusterCounter::new(g, xi).count(g, w))
}

fn check_len(g: &FiniteGraph, w: &BondConfiguration) -> Result<()> {
    if w.len() != g.num_edges() {
        return Err(Error::InvalidConfiguration(format!(
            "configuration has {} edges, graph has {}",
            w.len(),
            g.num_edges()
        )));
    }
    Ok(())
}

/// Enumeration of the configurations of a graph in which the `free` edges
/// vary and every other edge stays at its value in `base`.
pub(crate) struct Enumeration<'a> {
    pub graph: &'a FiniteGraph,
    pub partition: &'a BoundaryPartition,
    pub params: ModelParams,
    pub free: Vec<EdgeId>,
    pub base: BondConfiguration,
}

impl<'a> Enumeration<'a> {
    pub(crate) fn full(g: &'a FiniteGraph, params: ModelParams, xi: &'a BoundaryPartition) -> Result<Self> {
        xi.check(g)?;
        Ok(Self {
            graph: g,
            partition: xi,
            params,
            free: (0..g.num_edges()).collect(),
            base: BondConfiguration::closed(g.num_edges()),
        })
    }

    /// Visits every configuration with its unnormalised weight
    /// `p^o (1-p)^c q^k` (`o`, `c` counted over free edges) and returns the
    /// merged accumulator with the partition function. Work is split into
    /// fixed chunks reduced in order, so the result does not depend on the
    /// number of threads.
    pub(crate) fn run<A, I, V>(&self, init: I, visit: V, merge: impl Fn(&mut A, A)) -> Result<(A, f64)>
    where
        A: Send,
        I: Fn() -> A + Sync,
        V: Fn(&mut A, &BondConfiguration, f64) + Sync,
    {
        let m = self.free.len();
        if m > EDGE_BUDGET {
            return Err(Error::TooLarge {
                what: "free edges",
                size: m,
                budget: EDGE_BUDGET,
            });
        }
        let (p, q) = (self.params.p(), self.params.q());
        let pow_p: Vec<f64> = (0..=m).map(|o| p.powi(o as i32)).collect();
        let pow_c: Vec<f64> = (0..=m).map(|c| (1.0 - p).powi(c as i32)).collect();
        let pow_q: Vec<f64> = (0..=self.graph.num_vertices()).map(|k| q.powi(k as i32)).collect();
        let bits = m.min(CHUNK_BITS);
        let chunks = 1u64 << (m - bits);
        let parts: Vec<(A, CompensatedSum)> = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut acc = init();
                let mut z = CompensatedSum::default();
                let mut counter = ClusterCounter::new(self.graph, self.partition);
                let mut w = self.base.clone();
                for low in 0..1u64 << bits {
                    let mask = (chunk << bits) | low;
                    let mut open = 0;
                    for (i, &e) in self.free.iter().enumerate() {
                        let bit = (mask >> i) & 1 == 1;
                        w.set(e, bit);
                        open += bit as usize;
                    }
                    let k = counter.count(self.graph, &w);
                    let weight = pow_p[open] * pow_c[m - open] * pow_q[k];
                    z.add(weight);
                    visit(&mut acc, &w, weight);
                }
                (acc, z)
            })
            .collect();
        let mut total = CompensatedSum::default();
        let mut result: Option<A> = None;
        for (acc, z) in parts {
            total.merge(&z);
            match result.as_mut() {
                None => result = Some(acc),
                Some(r) => merge(r, acc),
            }
        }
        Ok((result.expect("at least one chunk"), total.value()))
    }

    /// Probabilities of a list of predicates under the normalised measure.
    pub(crate) fn probabilities(&self, events: &[&(dyn Fn(&BondConfiguration) -> bool + Sync)]) -> Result<Vec<f64>> {
        let n = events.len();
        let (acc, z) = self.run(
            || vec![CompensatedSum::default(); n],
            |acc, w, weight| {
                for (slot, ev) in acc.iter_mut().zip(events) {
                    if ev(w) {
                        slot.add(weight);
                    }
                }
            },
            |a, b| a.iter_mut().zip(&b).for_each(|(x, y)| x.merge(y)),
        )?;
        Ok(acc.iter().map(|s| s.value() / z).collect())
    }
}

/// `Z = sum over configurations of p^o (1-p)^c q^k`.
pub fn partition_function(g: &FiniteGraph, params: ModelParams, xi: &BoundaryPartition) -> Result<f64> {
    Ok(Enumeration::full(g, params, xi)?.run(|| (), |_, _, _| {}, |_, _| {})?.1)
}

pub fn event_probability(
    g: &FiniteGraph,
    params: ModelParams,
    xi: &BoundaryPartition,
    event: &EventPredicate,
) -> Result<f64> {
    Ok(event_probabilities(g, params, xi, std::slice::from_ref(event))?[0])
}

pub fn event_probabilities(
    g: &FiniteGraph,
    params: ModelParams,
    xi: &BoundaryPartition,
    events: &[EventPredicate],
) -> Result<Vec<f64>> {
    let closures: Vec<Box<dyn Fn(&BondConfiguration) -> bool + Sync>> = events
        .iter()
        .map(|ev| Box::new(move |w: &BondConfiguration| ev.occurs(g, w)) as Box<dyn Fn(&BondConfiguration) -> bool + Sync>)
        .collect();
    let refs: Vec<&(dyn Fn(&BondConfiguration) -> bool + Sync)> = closures.iter().map(|b| b.as_ref()).collect();
    Enumeration::full(g, params, xi)?.probabilities(&refs)
}

/// Matrix of `phi[A_i and A_j]`; the diagonal holds the marginals.
pub fn joint_probabilities(
    g: &FiniteGraph,
    params: ModelParams,
    xi: &BoundaryPartition,
    events: &[EventPredicate],
) -> Result<Vec<Vec<f64>>> {
    let n = events.len();
    let (acc, z) = Enumeration::full(g, params, xi)?.run(
        || vec![CompensatedSum::default(); n * n],
        |acc, w, weight| {
            let hits: Vec<bool> = events.iter().map(|ev| ev.occurs(g, w)).collect();
            for i in 0..n {
                if hits[i] {
                    for j in 0..n {
                        if hits[j] {
                            acc[i * n + j].add(weight);
                        }
                    }
                }
            }
        },
        |a, b| a.iter_mut().zip(&b).for_each(|(x, y)| x.merge(y)),
    )?;
    Ok((0..n).map(|i| (0..n).map(|j| acc[i * n + j].value() / z).collect()).collect())
}

/// Probability that `x` and `y` lie in the same cluster of `w` with `xi` wired.
pub fn two_point(
    g: &FiniteGraph,
    params: ModelParams,
    xi: &BoundaryPartition,
    x: VertexId,
    y: VertexId,
) -> Result<f64> {
    if x >= g.num_vertices() || y >= g.num_vertices() {
        return Err(Error::GeometryOutOfRange(format!("vertices {x}, {y}")));
    }
    if x == y {
        return Ok(1.0);
    }
    let counter = ClusterCounter::new(g, xi);
    let (acc, z) = Enumeration::full(g, params, xi)?.run(
        || (CompensatedSum::default(), counter.clone()),
        |(acc, c), w, weight| {
            if c.load(g, w).same(x, y) {
                acc.add(weight);
            }
        },
        |a, b| a.0.merge(&b.0),
    )?;
    Ok(acc.0.value() / z)
}

/// Probability of every configuration, indexed by its edge mask.
pub fn exact_measure(g: &FiniteGraph, params: ModelParams, xi: &BoundaryPartition) -> Result<Vec<f64>> {
    if g.num_edges() > MEASURE_BUDGET {
        return Err(Error::TooLarge {
            what: "edges for a stored measure",
            size: g.num_edges(),
            budget: MEASURE_BUDGET,
        });
    }
    let (acc, z) = Enumeration::full(g, params, xi)?.run(
        Vec::new,
        |acc: &mut Vec<(u64, f64)>, w, weight| acc.push((w.to_mask(), weight)),
        |a, b| a.extend(b),
    )?;
    let mut out = vec![0.0; 1usize << g.num_edges()];
    for (mask, weight) in acc {
        out[mask as usize] = weight / z;
    }
    Ok(out)
}

/// The dual configuration (`e*` open iff `e` closed) and dual parameters.
pub fn dual_transform(
    w: &BondConfiguration,
    dual: &DualGraph,
    params: ModelParams,
) -> Result<(BondConfiguration, ModelParams)> {
    if dual.edge_map.len() != w.len() {
        return Err(Error::NoDual(format!(
            "dual built for {} edges, configuration has {}",
            dual.edge_map.len(),
            w.len()
        )));
    }
    let mut bits = vec![false; w.len()];
    for (e, &d) in dual.edge_map.iter().enumerate() {
        bits[d] = !w.is_open(e);
    }
    Ok((BondConfiguration::from_bits(bits), params.dual()))
}

/// A failed inequality in the FKG or comparison suites.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub check: &'static str,
    pub detail: String,
    pub margin: f64,
}

/// FKG: `phi[A and B] >= phi[A] phi[B]` for every pair of increasing events.
pub fn fkg_violations(
    g: &FiniteGraph,
    params: ModelParams,
    xi: &BoundaryPartition,
    events: &[EventPredicate],
    tol: f64,
) -> Result<Vec<Violation>> {
    let joint = joint_probabilities(g, params, xi, events)?;
    let mut out = Vec::new();
    for i in 0..events.len() {
        for j in i..events.len() {
            if !(events[i].is_increasing() && events[j].is_increasing()) {
                continue;
            }
            let margin = joint[i][j] - joint[i][i] * joint[j][j];
            if margin < -tol {
                out.push(Violation {
                    check: "fkg",
                    detail: format!("{} & {}", events[i].id(), events[j].id()),
                    margin,
                });
            }
        }
    }
    Ok(out)
}

/// Comparison: `phi^xi[A] >= phi^psi[A]` whenever `xi` dominates `psi`.
pub fn comparison_violations(
    g: &FiniteGraph,
    params: ModelParams,
    partitions: &[BoundaryPartition],
    events: &[EventPredicate],
    tol: f64,
) -> Result<Vec<Violation>> {
    let probs = partitions
        .iter()
        .map(|xi| event_probabilities(g, params, xi, events))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (a, xi) in partitions.iter().enumerate() {
        for (b, psi) in partitions.iter().enumerate() {
            if a == b || !xi.dominates(psi) {
                continue;
            }
            for (k, ev) in events.iter().enumerate() {
                if !ev.is_increasing() {
                    continue;
                }
                let margin = probs[a][k] - probs[b][k];
                if margin < -tol {
                    out.push(Violation {
                        check: "comparison",
                        detail: format!("{} >= {} on {}", xi.kind().name(), psi.kind().name(), ev.id()),
                        margin,
                    });
                }
            }
        }
    }
    Ok(out)
}
