use std::collections::HashMap;

use super::{BoundaryKind, BoundaryPartition, Coord, FiniteGraph, GraphKind, VertexId};
use crate::error::{Error, Result};

/// The box `[-n, n]^2`.
pub fn build_box(n: u32) -> FiniteGraph {
    let n = n as i32;
    rect_graph(GraphKind::Box, -n, -n, n, n, |_, _| true)
}

/// The rectangle `[x0, x1] x [y0, y1]` of the square lattice.
pub fn build_rect(x0: i32, y0: i32, x1: i32, y1: i32) -> Result<FiniteGraph> {
    if x1 < x0 || y1 < y0 {
        return Err(Error::InvalidRange(format!(
            "empty rectangle [{x0},{x1}]x[{y0},{y1}]"
        )));
    }
    Ok(rect_graph(GraphKind::Rect, x0, y0, x1, y1, |_, _| true))
}

/// The path `(0,0) - (1,0) - ... - (len,0)`; `build_path(1)` is the single edge K2.
pub fn build_path(len: u32) -> FiniteGraph {
    rect_graph(GraphKind::Custom, 0, 0, len as i32, 0, |_, _| true)
}

/// Vertices in row-major order; each vertex contributes its right edge and
/// then its upper edge, filtered by `keep(lower_left, upper_right)`.
fn rect_graph(
    kind: GraphKind,
    x0: i32,
    y0: i32,
    x1: i32,
    y1: i32,
    keep: impl Fn(Coord, Coord) -> bool,
) -> FiniteGraph {
    let mut coords = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            coords.push(Coord::site(x, y));
        }
    }
    let width = (x1 - x0 + 1) as usize;
    let idx = |x: i32, y: i32| (y - y0) as usize * width + (x - x0) as usize;
    let mut edges = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            if x < x1 && keep(Coord::site(x, y), Coord::site(x + 1, y)) {
                edges.push([idx(x, y), idx(x + 1, y)]);
            }
            if y < y1 && keep(Coord::site(x, y), Coord::site(x, y + 1)) {
                edges.push([idx(x, y), idx(x, y + 1)]);
            }
        }
    }
    FiniteGraph::new(kind, coords, edges).expect("rectangle construction is well formed")
}

/// The slit box together with its Dobrushin boundary condition.
#[derive(Clone, Debug)]
pub struct SlitBox {
    pub graph: FiniteGraph,
    pub partition: BoundaryPartition,
}

/// The box `[-n, n]^2` with the edges between consecutive vertices of
/// `{(0,k) : 0 <= k <= n}` removed, wired on that segment.
pub fn build_slit_box(n: u32) -> Result<SlitBox> {
    if n == 0 {
        return Err(Error::InvalidRange("slit box needs n >= 1".into()));
    }
    let m = n as i32;
    let graph = rect_graph(GraphKind::SlitBox, -m, -m, m, m, |a, b| {
        !(a.x == 0 && b.x == 0 && a.y >= 0)
    });
    let arc: Vec<VertexId> = (0..=m)
        .map(|k| graph.vertex_at(Coord::site(0, k)).expect("segment inside the box"))
        .collect();
    let partition = BoundaryPartition::wiring(&graph, BoundaryKind::Dobrushin, vec![arc])?;
    Ok(SlitBox { graph, partition })
}

/// Truncation of the universal cover of the plane punctured at `(1/2, -1/2)`:
/// vertices `(x1, x2, x3)` with `|x1|, |x2| <= n` and `|x3| <= h`.
pub fn build_cover_box(n: u32, h: u32) -> Result<FiniteGraph> {
    if n == 0 || h == 0 {
        return Err(Error::InvalidRange("cover box needs n >= 1 and h >= 1".into()));
    }
    let (n, h) = (n as i32, h as i32);
    let side = (2 * n + 1) as usize;
    let idx = |x: i32, y: i32, s: i32| {
        ((s + h) as usize * side + (y + n) as usize) * side + (x + n) as usize
    };
    let mut coords = Vec::with_capacity(side * side * (2 * h + 1) as usize);
    for s in -h..=h {
        for y in -n..=n {
            for x in -n..=n {
                coords.push(Coord::cover(x, y, s));
            }
        }
    }
    let mut edges = Vec::new();
    for s in -h..=h {
        for y in -n..=n {
            for x in -n..=n {
                if x < n {
                    let target = if x == 0 && y < 0 { s + 1 } else { s };
                    if target <= h {
                        edges.push([idx(x, y, s), idx(x + 1, y, target)]);
                    }
                }
                if y < n {
                    edges.push([idx(x, y, s), idx(x, y + 1, s)]);
                }
            }
        }
    }
    FiniteGraph::new(GraphKind::CoverBox, coords, edges)
}

/// A planar graph extended by the layer of lattice vertices adjacent to it.
#[derive(Clone, Debug)]
pub struct OuterLayer {
    /// Original vertices and edges keep their indices; outer vertices and
    /// the edges reaching them are appended. The boundary is the outer layer.
    pub graph: FiniteGraph,
    pub outer: Vec<VertexId>,
    /// Number of outer neighbours of each original vertex.
    pub outer_degree: Vec<usize>,
}

pub fn with_outer_layer(g: &FiniteGraph) -> Result<OuterLayer> {
    if matches!(g.kind(), GraphKind::CoverBox | GraphKind::Medial) {
        return Err(Error::InvalidRange("outer layer needs a planar graph".into()));
    }
    let mut coords = g.coords().to_vec();
    let mut edges: Vec<[VertexId; 2]> = g.edges().to_vec();
    let mut added: HashMap<Coord, VertexId> = HashMap::new();
    let mut outer_degree = vec![0; g.num_vertices()];
    for v in 0..g.num_vertices() {
        let c = g.coord(v);
        for (dx, dy) in [(2, 0), (0, 2), (-2, 0), (0, -2)] {
            let w = c.offset(dx, dy);
            if g.vertex_at(w).is_some() {
                continue;
            }
            let next = coords.len();
            let id = *added.entry(w).or_insert_with(|| {
                coords.push(w);
                next
            });
            edges.push([v, id]);
            outer_degree[v] += 1;
        }
    }
    let mut outer: Vec<VertexId> = added.into_values().collect();
    outer.sort_unstable();
    let graph = FiniteGraph::with_boundary(GraphKind::Custom, coords, edges, outer.clone())?;
    Ok(OuterLayer {
        graph,
        outer,
        outer_degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degree_rule_holds(g: &FiniteGraph) -> bool {
        (0..g.num_vertices()).all(|v| g.is_boundary(v) == (g.degree(v) < 4))
    }

    #[test]
    fn box_counts() {
        let g0 = build_box(0);
        assert_eq!((g0.num_vertices(), g0.num_edges()), (1, 0));
        assert_eq!(g0.boundary(), &[0]);
        let g1 = build_box(1);
        assert_eq!((g1.num_vertices(), g1.num_edges()), (9, 12));
        assert_eq!(g1.boundary().len(), 8);
        assert!(!g1.is_boundary(g1.vertex_at(Coord::site(0, 0)).unwrap()));
        for n in 0..6u32 {
            let g = build_box(n);
            let side = (2 * n + 1) as usize;
            assert_eq!(g.num_vertices(), side * side);
            assert_eq!(g.num_edges(), 2 * 2 * n as usize * side);
            assert!(degree_rule_holds(&g));
            g.validate().unwrap();
        }
    }

    #[test]
    fn slit_box_shape() {
        let s1 = build_slit_box(1).unwrap();
        assert_eq!(s1.graph.num_edges(), 11);
        assert!(s1.graph.edge_at(Coord::site(0, 0), Coord::site(0, 1)).is_none());
        assert!(s1.graph.edge_at(Coord::site(0, -1), Coord::site(0, 0)).is_some());
        let s2 = build_slit_box(2).unwrap();
        let wired: Vec<Coord> = s2.partition.nontrivial_blocks().next().unwrap()
            .iter()
            .map(|&v| s2.graph.coord(v))
            .collect();
        assert_eq!(wired, vec![Coord::site(0, 0), Coord::site(0, 1), Coord::site(0, 2)]);
        assert!(degree_rule_holds(&s2.graph));
    }

    #[test]
    fn cover_box_rules() {
        let g = build_cover_box(1, 1).unwrap();
        assert_eq!(g.num_vertices(), 27);
        let g = build_cover_box(2, 2).unwrap();
        assert!(g.edge_at(Coord::cover(0, -1, 0), Coord::cover(1, -1, 1)).is_some());
        assert!(g.edge_at(Coord::cover(0, -1, 0), Coord::cover(1, -1, 0)).is_none());
        assert!(g.edge_at(Coord::cover(0, 1, 0), Coord::cover(1, 1, 0)).is_some());
        assert!(degree_rule_holds(&g));
        for v in 0..g.num_vertices() {
            let c = g.coord(v);
            let (x, y, s) = (c.x / 2, c.y / 2, c.sheet.unwrap());
            let inside = x.abs() < 2 && y.abs() < 2 && !(x == 0 && y < 0 && s == 2)
                && !(x == 1 && y < 0 && s == -2);
            if inside {
                assert_eq!(g.degree(v), 4, "vertex {c}");
            }
        }
    }

    #[test]
    fn outer_layer_of_box() {
        let g = build_box(1);
        let ext = with_outer_layer(&g).unwrap();
        assert_eq!(ext.outer.len(), 12);
        assert_eq!(ext.graph.num_edges(), 12 + 12);
        let corner = g.vertex_at(Coord::site(1, 1)).unwrap();
        assert_eq!(ext.outer_degree[corner], 2);
        assert_eq!(ext.outer_degree[g.vertex_at(Coord::site(0, 0)).unwrap()], 0);
    }
}
