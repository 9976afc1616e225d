use super::{Coord, EdgeId, FiniteGraph, GraphKind, VertexId};

/// Medial graph: one vertex per primal edge, edges oriented counterclockwise
/// around the primal vertex they turn about.
#[derive(Clone, Debug)]
pub struct MedialGraph {
    pub graph: FiniteGraph,
    /// `(tail, head)` of every medial edge.
    pub oriented: Vec<(VertexId, VertexId)>,
    /// Primal vertex each medial edge turns around.
    pub center: Vec<VertexId>,
    /// Primal edge of every medial vertex.
    pub source: Vec<EdgeId>,
}

/// Direction index `0..4` (east, north, west, south) of a unit step in half units.
pub(crate) fn direction(dx: i32, dy: i32) -> usize {
    match (dx.signum(), dy.signum()) {
        (1, 0) => 0,
        (0, 1) => 1,
        (-1, 0) => 2,
        _ => 3,
    }
}

/// Builds the medial graph of a planar (or locally planar) graph.
pub fn build_medial(g: &FiniteGraph) -> MedialGraph {
    let coords: Vec<Coord> = (0..g.num_edges()).map(|e| g.midpoint(e)).collect();
    let mut edges = Vec::new();
    let mut oriented = Vec::new();
    let mut center = Vec::new();
    for v in 0..g.num_vertices() {
        let c = g.coord(v);
        let mut by_dir = [None; 4];
        for (e, w) in g.neighbors(v) {
            let d = g.coord(w);
            by_dir[direction(d.x - c.x, d.y - c.y)] = Some(e);
        }
        for d in 0..4 {
            if let (Some(a), Some(b)) = (by_dir[d], by_dir[(d + 1) % 4]) {
                edges.push([a, b]);
                oriented.push((a, b));
                center.push(v);
            }
        }
    }
    let graph = FiniteGraph::new(GraphKind::Medial, coords, edges)
        .expect("medial construction is well formed");
    MedialGraph {
        graph,
        oriented,
        center,
        source: (0..g.num_edges()).collect(),
    }
}
