use crate::error::{Error, Result};
use crate::lattice::{BoundaryKind, BoundaryPartition, FiniteGraph, VertexId};
use crate::model::ModelParams;

use super::{ClusterCounter, CompensatedSum, Enumeration};

/// Largest number of spin configurations enumerated.
pub const SPIN_BUDGET: usize = 1 << 22;

/// Boundary condition of the Potts model on a finite graph.
#[derive(Clone, Debug, PartialEq)]
pub enum PottsBoundary {
    /// No coupling outside the graph.
    Free,
    /// An outer layer of spins fixed to `color`; `outer_degree[v]` counts the
    /// outer neighbours of `v`.
    Outer { outer_degree: Vec<usize>, color: u32 },
    /// Spins constant on every block; blocks listed in `pinned` take `color`.
    Blocks {
        blocks: Vec<Vec<VertexId>>,
        pinned: Vec<usize>,
        color: u32,
    },
}

/// The exact spin law, indexed by `sum_v spin_v q^v` with spins in `0..q`.
#[derive(Clone, Debug)]
pub struct PottsSummary {
    pub q: u32,
    pub num_vertices: usize,
    pub law: Vec<f64>,
}

impl PottsSummary {
    pub fn spin(&self, index: usize, v: VertexId) -> u32 {
        ((index / (self.q as usize).pow(v as u32)) % self.q as usize) as u32
    }

    /// `mu[spin_v = color]`.
    pub fn marginal(&self, v: VertexId, color: u32) -> f64 {
        let mut s = CompensatedSum::default();
        for (i, &p) in self.law.iter().enumerate() {
            if self.spin(i, v) == color {
                s.add(p);
            }
        }
        s.value()
    }

    /// `mu[spin_x = spin_y]`.
    pub fn agreement(&self, x: VertexId, y: VertexId) -> f64 {
        let mut s = CompensatedSum::default();
        for (i, &p) in self.law.iter().enumerate() {
            if self.spin(i, x) == self.spin(i, y) {
                s.add(p);
            }
        }
        s.value()
    }
}

fn spin_space(g: &FiniteGraph, q: u32) -> Result<usize> {
    if q < 1 {
        return Err(Error::InvalidQ(q as f64));
    }
    let size = (q as f64).powi(g.num_vertices() as i32);
    if size > SPIN_BUDGET as f64 {
        return Err(Error::TooLarge {
            what: "spin configurations",
            size: size.min(usize::MAX as f64) as usize,
            budget: SPIN_BUDGET,
        });
    }
    Ok(size as usize)
}

/// Exact Potts law with weights `exp(beta * #{agreeing couplings})`.
pub fn potts_enumerate(g: &FiniteGraph, q: u32, beta: f64, bc: &PottsBoundary) -> Result<PottsSummary> {
    let size = spin_space(g, q)?;
    let n = g.num_vertices();
    let q_us = q as usize;
    let mut required: Vec<Option<u32>> = vec![None; n];
    let mut tied: Vec<Option<VertexId>> = vec![None; n];
    let mut field = vec![0usize; n];
    let mut field_color = 0;
    match bc {
        PottsBoundary::Free => {}
        PottsBoundary::Outer { outer_degree, color } => {
            if outer_degree.len() != n {
                return Err(Error::PartitionMismatch("outer layer does not match the graph".into()));
            }
            field.copy_from_slice(outer_degree);
            field_color = *color;
        }
        PottsBoundary::Blocks { blocks, pinned, color } => {
            for (i, b) in blocks.iter().enumerate() {
                for &v in b {
                    if v >= n {
                        return Err(Error::PartitionMismatch(format!("vertex {v} out of range")));
                    }
                    tied[v] = Some(b[0]);
                    if pinned.contains(&i) {
                        required[v] = Some(*color);
                    }
                }
            }
        }
    }
    if field_color >= q || required.iter().flatten().any(|&c| c >= q) {
        return Err(Error::InvalidQ(q as f64));
    }
    let mut law = vec![0.0; size];
    let mut spins = vec![0u32; n];
    let mut z = CompensatedSum::default();
    for (index, slot) in law.iter_mut().enumerate() {
        let mut rest = index;
        for s in spins.iter_mut() {
            *s = (rest % q_us) as u32;
            rest /= q_us;
        }
        let admissible = (0..n).all(|v| {
            required[v].is_none_or(|c| spins[v] == c) && tied[v].is_none_or(|r| spins[v] == spins[r])
        });
        if !admissible {
            continue;
        }
        let mut agree = 0usize;
        for &[u, v] in g.edges() {
            agree += (spins[u] == spins[v]) as usize;
        }
        for v in 0..n {
            if spins[v] == field_color {
                agree += field[v];
            }
        }
        let w = (beta * agree as f64).exp();
        *slot = w;
        z.add(w);
    }
    let z = z.value();
    law.iter_mut().for_each(|x| *x /= z);
    Ok(PottsSummary {
        q,
        num_vertices: n,
        law,
    })
}

/// Comparison of the Edwards-Sokal colouring of the random-cluster measure
/// with the Potts law at `beta = -log(1-p)`.
#[derive(Clone, Debug)]
pub struct CouplingReport {
    pub max_discrepancy: f64,
    pub from_clusters: PottsSummary,
    pub potts: PottsSummary,
}

/// Colours every cluster of `phi^xi` uniformly (the cluster of a single
/// wired block gets `color` under wired or Dobrushin conditions) and compares
/// the induced spin law with direct Potts enumeration.
pub fn coupling_check(
    g: &FiniteGraph,
    q: u32,
    p: f64,
    xi: &BoundaryPartition,
    color: u32,
) -> Result<CouplingReport> {
    let size = spin_space(g, q)?;
    if color >= q {
        return Err(Error::InvalidQ(q as f64));
    }
    let params = ModelParams::new(p, q as f64)?;
    let blocks: Vec<Vec<VertexId>> = xi.nontrivial_blocks().cloned().collect();
    let pinned: Vec<usize> = match xi.kind() {
        BoundaryKind::Wired | BoundaryKind::Dobrushin if blocks.len() == 1 => vec![0],
        _ => Vec::new(),
    };
    let anchor = pinned.first().map(|&i| blocks[i][0]);
    let n = g.num_vertices();
    let q_us = q as usize;
    let powers: Vec<usize> = (0..n).map(|v| q_us.pow(v as u32)).collect();
    let counter = ClusterCounter::new(g, xi);
    let (acc, z) = Enumeration::full(g, params, xi)?.run(
        || (vec![CompensatedSum::default(); size], counter.clone()),
        |(acc, counter), w, weight| {
            let uf = counter.load(g, w);
            let roots: Vec<usize> = (0..n).map(|v| uf.find(v)).collect();
            let mut clusters: Vec<usize> = roots.clone();
            clusters.sort_unstable();
            clusters.dedup();
            let label: Vec<usize> = roots.iter().map(|r| clusters.binary_search(r).unwrap()).collect();
            let fixed = anchor.map(|a| label[a]);
            let free_clusters = clusters.len() - fixed.is_some() as usize;
            let share = weight / (q as f64).powi(free_clusters as i32);
            let mut colors = vec![0u32; clusters.len()];
            if let Some(f) = fixed {
                colors[f] = color;
            }
            loop {
                let index: usize = (0..n).map(|v| colors[label[v]] as usize * powers[v]).sum();
                acc[index].add(share);
                let mut i = 0;
                loop {
                    if i == colors.len() {
                        return;
                    }
                    if Some(i) == fixed {
                        i += 1;
                        continue;
                    }
                    colors[i] += 1;
                    if colors[i] < q {
                        break;
                    }
                    colors[i] = 0;
                    i += 1;
                }
            }
        },
        |a, b| a.0.iter_mut().zip(&b.0).for_each(|(x, y)| x.merge(y)),
    )?;
    let from_clusters = PottsSummary {
        q,
        num_vertices: n,
        law: acc.0.iter().map(|s| s.value() / z).collect(),
    };
    let bc = if xi.kind() == BoundaryKind::Free || blocks.is_empty() {
        PottsBoundary::Free
    } else {
        PottsBoundary::Blocks {
            blocks,
            pinned,
            color,
        }
    };
    let potts = potts_enumerate(g, q, params.beta(), &bc)?;
    let max_discrepancy = from_clusters
        .law
        .iter()
        .zip(&potts.law)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(CouplingReport {
        max_discrepancy,
        from_clusters,
        potts,
    })
}
