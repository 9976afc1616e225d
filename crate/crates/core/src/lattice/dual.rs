use std::collections::HashMap;

use super::{Coord, EdgeId, FiniteGraph, GraphKind};
use crate::error::{Error, Result};

/// Planar dual together with the edge bijection `e -> e*`.
#[derive(Clone, Debug)]
pub struct DualGraph {
    pub graph: FiniteGraph,
    pub edge_map: Vec<EdgeId>,
}

/// Builds the dual graph: one dual edge per primal edge, crossing it in its
/// middle; dual vertices are the endpoints of those dual edges. Dual edge
/// indices coincide with primal edge indices.
pub fn build_dual(g: &FiniteGraph) -> Result<DualGraph> {
    if g.kind() == GraphKind::Medial {
        return Err(Error::NoDual("medial graphs have no dual here".into()));
    }
    let mut coords = Vec::new();
    let mut lookup: HashMap<Coord, usize> = HashMap::new();
    let mut edges = Vec::with_capacity(g.num_edges());
    for e in 0..g.num_edges() {
        let [u, v] = g.endpoints(e);
        let (a, b) = (g.coord(u), g.coord(v));
        let m = (a.x + b.x) / 2;
        let n = (a.y + b.y) / 2;
        let (px, py) = if a.y == b.y { (0, 1) } else { (1, 0) };
        let mut ends = [0usize; 2];
        for (slot, sign) in [-1, 1].into_iter().enumerate() {
            let mut face = Coord::half(m + sign * px, n + sign * py);
            if g.kind() == GraphKind::CoverBox {
                face.sheet = Some(face_sheet(a, b, face));
            }
            let next = coords.len();
            ends[slot] = *lookup.entry(face).or_insert_with(|| {
                coords.push(face);
                next
            });
        }
        edges.push(ends);
    }
    let graph = FiniteGraph::new(GraphKind::Dual, coords, edges)?;
    Ok(DualGraph {
        graph,
        edge_map: (0..g.num_edges()).collect(),
    })
}

/// Sheet label of a face of the cover adjacent to the edge `ab`: the sheet of
/// its corners in the column `x1 = 0` when the face straddles `0 <= x1 <= 1`,
/// otherwise the common sheet of its corners.
fn face_sheet(a: Coord, b: Coord, face: Coord) -> i32 {
    let sa = a.sheet.unwrap_or(0);
    let sb = b.sheet.unwrap_or(0);
    if face.x != 1 {
        return sa;
    }
    if a.x == 0 {
        return sa;
    }
    if b.x == 0 {
        return sb;
    }
    // Right side of a straddling face; faces below the branch point are sheared.
    if face.y <= -3 {
        sa - 1
    } else {
        sa
    }
}
