//! Exact left-to-right crossing probabilities on lattice graphs too large for
//! plain enumeration, by enumerating the two halves on either side of a
//! separating column and gluing their connectivity states.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{CompensatedSum, EDGE_BUDGET};
use crate::error::{Error, Result};
use crate::lattice::{BoundaryPartition, EdgeId, FiniteGraph, VertexId};
use crate::model::ModelParams;
use crate::unionfind::UnionFind;

const CHUNK_BITS: usize = 12;

/// Connectivity seen from the separator: canonical labels of the shared
/// nodes with boundary wiring, and of the separator vertices by open paths
/// alone, the latter tagged with whether the class reaches the outer side.
type State = (Vec<u8>, Vec<u8>);

struct Half {
    edges: Vec<EdgeId>,
    /// Vertices of this half off the separator.
    own: Vec<VertexId>,
    /// Vertices on the outer side (`x = xmin` or `x = xmax`).
    side: Vec<VertexId>,
}

struct Layout<'a> {
    graph: &'a FiniteGraph,
    block_of: Vec<Option<usize>>,
    blocks: usize,
    separator: Vec<VertexId>,
    params: ModelParams,
}

impl Layout<'_> {
    /// Node of the wired forest: vertices first, then one node per block.
    fn shared(&self) -> Vec<usize> {
        let n = self.graph.num_vertices();
        self.separator.iter().copied().chain(n..n + self.blocks).collect()
    }

    fn tabulate(&self, half: &Half) -> Result<HashMap<State, CompensatedSum>> {
        let m = half.edges.len();
        if m > EDGE_BUDGET {
            return Err(Error::TooLarge {
                what: "edges on one side of the separator",
                size: m,
                budget: EDGE_BUDGET,
            });
        }
        let (p, q) = (self.params.p(), self.params.q());
        let pow_p: Vec<f64> = (0..=m).map(|o| p.powi(o as i32)).collect();
        let pow_c: Vec<f64> = (0..=m).map(|c| (1.0 - p).powi(c as i32)).collect();
        let pow_q: Vec<f64> = (0..=half.own.len()).map(|k| q.powi(k as i32)).collect();
        let n = self.graph.num_vertices();
        let shared = self.shared();
        let mut base = UnionFind::new(n + self.blocks);
        for &v in half.own.iter().chain(&self.separator) {
            if let Some(b) = self.block_of[v] {
                base.union(v, n + b);
            }
        }
        let bits = m.min(CHUNK_BITS);
        let parts: Vec<HashMap<State, CompensatedSum>> = (0..1u64 << (m - bits))
            .into_par_iter()
            .map(|chunk| {
                let mut table: HashMap<State, CompensatedSum> = HashMap::new();
                let mut wired = base.clone();
                let mut open = UnionFind::new(n);
                let mut seen = vec![u32::MAX; n + self.blocks];
                let mut stamp = 0u32;
                for low in 0..1u64 << bits {
                    let mask = (chunk << bits) | low;
                    wired.copy_from(&base);
                    open.reset();
                    for (i, &e) in half.edges.iter().enumerate() {
                        if (mask >> i) & 1 == 1 {
                            let [u, v] = self.graph.endpoints(e);
                            wired.union(u, v);
                            open.union(u, v);
                        }
                    }
                    stamp += 1;
                    let wired_state = canonical(&shared, |v| wired.find(v));
                    for &s in &shared {
                        let r = wired.find(s);
                        seen[r] = stamp;
                    }
                    let mut internal = 0;
                    for &v in &half.own {
                        let r = wired.find(v);
                        if seen[r] != stamp {
                            seen[r] = stamp;
                            internal += 1;
                        }
                    }
                    stamp += 1;
                    for &v in &half.side {
                        let r = open.find(v);
                        seen[r] = stamp;
                    }
                    let mut open_state = canonical(&self.separator, |v| open.find(v));
                    for (label, &v) in open_state.iter_mut().zip(&self.separator) {
                        if seen[open.find(v)] == stamp {
                            *label |= 0x80;
                        }
                    }
                    let o = mask.count_ones() as usize;
                    table
                        .entry((wired_state, open_state))
                        .or_default()
                        .add(pow_p[o] * pow_c[m - o] * pow_q[internal]);
                }
                table
            })
            .collect();
        let mut table: HashMap<State, CompensatedSum> = HashMap::new();
        for part in parts {
            for (k, v) in part {
                table.entry(k).or_default().merge(&v);
            }
        }
        Ok(table)
    }
}

/// Labels `nodes` by first occurrence of their roots.
fn canonical(nodes: &[usize], mut root: impl FnMut(usize) -> usize) -> Vec<u8> {
    let mut roots: Vec<usize> = Vec::with_capacity(nodes.len());
    nodes
        .iter()
        .map(|&v| {
            let r = root(v);
            match roots.iter().position(|&x| x == r) {
                Some(i) => i as u8,
                None => {
                    roots.push(r);
                    (roots.len() - 1) as u8
                }
            }
        })
        .collect()
}

/// `phi^xi[left side <-> right side by an open path]` on a nearest-neighbour
/// subgraph of the square lattice, where the sides are the columns of
/// smallest and largest `x`. Exact; each half of the graph must fit the
/// enumeration budget.
pub fn horizontal_crossing_probability(g: &FiniteGraph, params: ModelParams, xi: &BoundaryPartition) -> Result<f64> {
    xi.check(g)?;
    if g.coords().iter().any(|c| c.sheet.is_some() || !c.is_primal()) {
        return Err(Error::InvalidParams("crossing split needs a planar primal graph".into()));
    }
    for &[u, v] in g.edges() {
        let (a, b) = (g.coord(u), g.coord(v));
        if (a.x - b.x).abs() + (a.y - b.y).abs() != 2 {
            return Err(Error::InvalidParams("crossing split needs nearest-neighbour edges".into()));
        }
    }
    let (x0, _, x1, _) = g.bounds();
    let mut block_of = vec![None; g.num_vertices()];
    let mut blocks = 0;
    for block in xi.nontrivial_blocks() {
        for &v in block {
            block_of[v] = Some(blocks);
        }
        blocks += 1;
    }
    if blocks + 2 * (((g.bounds().3 - g.bounds().1) / 2 + 1) as usize) > 0x7f {
        return Err(Error::InvalidParams("too many separator nodes".into()));
    }
    let is_right = |e: EdgeId, xs: i32| g.endpoints(e).iter().any(|&v| g.coord(v).x > xs);
    let xs = (x0..=x1)
        .step_by(2)
        .min_by_key(|&xs| {
            let right = (0..g.num_edges()).filter(|&e| is_right(e, xs)).count();
            right.max(g.num_edges() - right)
        })
        .expect("graph has a column");
    let layout = Layout {
        graph: g,
        block_of,
        blocks,
        separator: (0..g.num_vertices()).filter(|&v| g.coord(v).x == xs).collect(),
        params,
    };
    let half = |right: bool| Half {
        edges: (0..g.num_edges()).filter(|&e| is_right(e, xs) == right).collect(),
        own: (0..g.num_vertices())
            .filter(|&v| if right { g.coord(v).x > xs } else { g.coord(v).x < xs })
            .collect(),
        side: (0..g.num_vertices())
            .filter(|&v| g.coord(v).x == if right { x1 } else { x0 })
            .collect(),
    };
    let (left, right) = (half(false), half(true));
    let left = layout.tabulate(&left)?;
    let right = layout.tabulate(&right)?;

    let q = params.q();
    let shared = layout.shared().len();
    let sep = layout.separator.len();
    let pow_q: Vec<f64> = (0..=shared).map(|k| q.powi(k as i32)).collect();
    let right: Vec<(&State, f64)> = right.iter().map(|(k, v)| (k, v.value())).collect();
    let mut z = CompensatedSum::default();
    let mut hit = CompensatedSum::default();
    let mut wired = UnionFind::new(shared);
    let mut open = UnionFind::new(sep);
    for ((lw, lo), wl) in &left {
        let wl = wl.value();
        for &((rw, ro), wr) in &right {
            wired.reset();
            open.reset();
            join(&mut wired, lw);
            join(&mut wired, rw);
            join(&mut open, lo);
            join(&mut open, ro);
            let weight = wl * wr * pow_q[wired.components()];
            z.add(weight);
            let mut reach_left = vec![false; sep];
            for (i, &l) in lo.iter().enumerate() {
                if l & 0x80 != 0 {
                    reach_left[open.find(i)] = true;
                }
            }
            let crosses = ro
                .iter()
                .enumerate()
                .any(|(i, &r)| r & 0x80 != 0 && reach_left[open.find(i)]);
            if crosses {
                hit.add(weight);
            }
        }
    }
    Ok(hit.value() / z.value())
}

/// Unions the nodes sharing a label.
fn join(uf: &mut UnionFind, labels: &[u8]) {
    let mut first = [usize::MAX; 0x80];
    for (i, &l) in labels.iter().enumerate() {
        let l = (l & 0x7f) as usize;
        if first[l] == usize::MAX {
            first[l] = i;
        } else {
            uf.union(first[l], i);
        }
    }
}
