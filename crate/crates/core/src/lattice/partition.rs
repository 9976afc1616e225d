use super::{FiniteGraph, VertexId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    Free,
    Wired,
    Dobrushin,
    Mixed,
    Custom,
}

impl BoundaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryKind::Free => "free",
            BoundaryKind::Wired => "wired",
            BoundaryKind::Dobrushin => "dobrushin",
            BoundaryKind::Mixed => "mixed",
            BoundaryKind::Custom => "custom",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Ok(match s {
            "free" => BoundaryKind::Free,
            "wired" => BoundaryKind::Wired,
            "dobrushin" => BoundaryKind::Dobrushin,
            "mixed" => BoundaryKind::Mixed,
            "custom" => BoundaryKind::Custom,
            other => return Err(Error::Parse(format!("unknown boundary condition `{other}`"))),
        })
    }
}

/// A partition of the boundary vertices; vertices in a common block count as
/// connected when clusters are counted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryPartition {
    kind: BoundaryKind,
    blocks: Vec<Vec<VertexId>>,
    num_vertices: usize,
}

impl BoundaryPartition {
    pub fn free(g: &FiniteGraph) -> Self {
        Self {
            kind: BoundaryKind::Free,
            blocks: g.boundary().iter().map(|&v| vec![v]).collect(),
            num_vertices: g.num_vertices(),
        }
    }

    pub fn wired(g: &FiniteGraph) -> Self {
        let blocks = if g.boundary().is_empty() {
            Vec::new()
        } else {
            vec![g.boundary().to_vec()]
        };
        Self {
            kind: BoundaryKind::Wired,
            blocks,
            num_vertices: g.num_vertices(),
        }
    }

    /// Validates that `blocks` partition the boundary of `g` exactly.
    pub fn from_blocks(g: &FiniteGraph, kind: BoundaryKind, blocks: Vec<Vec<VertexId>>) -> Result<Self> {
        let mut owner = vec![usize::MAX; g.num_vertices()];
        let mut blocks: Vec<Vec<VertexId>> = blocks.into_iter().filter(|b| !b.is_empty()).collect();
        for (i, block) in blocks.iter_mut().enumerate() {
            block.sort_unstable();
            for &v in block.iter() {
                if v >= g.num_vertices() || !g.is_boundary(v) {
                    return Err(Error::PartitionMismatch(format!("vertex {v} is not a boundary vertex")));
                }
                if owner[v] != usize::MAX {
                    return Err(Error::PartitionMismatch(format!("vertex {v} lies in two blocks")));
                }
                owner[v] = i;
            }
        }
        if let Some(&v) = g.boundary().iter().find(|&&v| owner[v] == usize::MAX) {
            return Err(Error::PartitionMismatch(format!("boundary vertex {v} is not covered")));
        }
        blocks.sort_by_key(|b| b[0]);
        let singletons = blocks.iter().all(|b| b.len() == 1);
        match kind {
            BoundaryKind::Free if !singletons => {
                return Err(Error::PartitionMismatch("free partition with a non-singleton block".into()))
            }
            BoundaryKind::Wired if blocks.len() > 1 => {
                return Err(Error::PartitionMismatch("wired partition with several blocks".into()))
            }
            _ => {}
        }
        Ok(Self {
            kind,
            blocks,
            num_vertices: g.num_vertices(),
        })
    }

    /// The given vertex sets wired into blocks, every other boundary vertex free.
    pub fn wiring(g: &FiniteGraph, kind: BoundaryKind, sets: Vec<Vec<VertexId>>) -> Result<Self> {
        let mut used = vec![false; g.num_vertices()];
        for set in &sets {
            for &v in set {
                if v < used.len() {
                    used[v] = true;
                }
            }
        }
        let mut blocks = sets;
        blocks.extend(g.boundary().iter().filter(|&&v| !used[v]).map(|&v| vec![v]));
        Self::from_blocks(g, kind, blocks)
    }

    /// Top row wired together and bottom row wired together, the vertical
    /// sides free.
    pub fn mixed(g: &FiniteGraph) -> Result<Self> {
        let (_, ymin, _, ymax) = g.bounds();
        let row = |y: i32| -> Vec<VertexId> {
            g.boundary().iter().copied().filter(|&v| g.coord(v).y == y).collect()
        };
        Self::wiring(g, BoundaryKind::Mixed, vec![row(ymax), row(ymin)])
    }

    /// Bottom and right sides wired into one block, the rest free.
    pub fn dobrushin_box(g: &FiniteGraph) -> Result<Self> {
        let (_, ymin, xmax, _) = g.bounds();
        let arc: Vec<VertexId> = g
            .boundary()
            .iter()
            .copied()
            .filter(|&v| g.coord(v).y == ymin || g.coord(v).x == xmax)
            .collect();
        Self::wiring(g, BoundaryKind::Dobrushin, vec![arc])
    }

    /// The standard partition of the given kind for a rectangular graph.
    pub fn standard(g: &FiniteGraph, kind: BoundaryKind) -> Result<Self> {
        match kind {
            BoundaryKind::Free => Ok(Self::free(g)),
            BoundaryKind::Wired => Ok(Self::wired(g)),
            BoundaryKind::Mixed => Self::mixed(g),
            BoundaryKind::Dobrushin => Self::dobrushin_box(g),
            BoundaryKind::Custom => Err(Error::PartitionMismatch(
                "custom partitions need explicit blocks".into(),
            )),
        }
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn blocks(&self) -> &[Vec<VertexId>] {
        &self.blocks
    }

    pub fn nontrivial_blocks(&self) -> impl Iterator<Item = &Vec<VertexId>> + '_ {
        self.blocks.iter().filter(|b| b.len() > 1)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Checks that this partition covers exactly the boundary of `g`.
    pub fn check(&self, g: &FiniteGraph) -> Result<()> {
        if self.num_vertices != g.num_vertices() {
            return Err(Error::PartitionMismatch(format!(
                "partition built for {} vertices, graph has {}",
                self.num_vertices,
                g.num_vertices()
            )));
        }
        let covered: usize = self.blocks.iter().map(Vec::len).sum();
        if covered != g.boundary().len() || self.blocks.iter().flatten().any(|&v| !g.is_boundary(v)) {
            return Err(Error::PartitionMismatch("blocks do not cover the boundary".into()));
        }
        Ok(())
    }

    /// Block label of every vertex; `None` off the boundary.
    pub fn labels(&self) -> Vec<Option<usize>> {
        let mut labels = vec![None; self.num_vertices];
        for (i, b) in self.blocks.iter().enumerate() {
            for &v in b {
                labels[v] = Some(i);
            }
        }
        labels
    }

    /// True when every block of `other` lies inside a block of `self`, so that
    /// `self` is the larger boundary condition.
    pub fn dominates(&self, other: &BoundaryPartition) -> bool {
        let labels = self.labels();
        other.blocks.iter().all(|b| {
            let first = labels.get(b[0]).copied().flatten();
            first.is_some() && b.iter().all(|&v| labels.get(v).copied().flatten() == first)
        })
    }
}
