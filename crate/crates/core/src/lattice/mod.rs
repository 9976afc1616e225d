//! Finite subgraphs of the square lattice, its dual and medial lattices, and
//! the universal cover of the slit plane.

mod build;
mod dual;
mod medial;
mod partition;
mod text;

pub use build::{
    build_box, build_cover_box, build_path, build_rect, build_slit_box, with_outer_layer,
    OuterLayer, SlitBox,
};
pub use dual::{build_dual, DualGraph};
pub use medial::{build_medial, MedialGraph};
pub use partition::{BoundaryKind, BoundaryPartition};
pub use text::{read_graph, write_graph, GraphFile};

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// A point of the plane stored in half lattice units, so that primal vertices
/// have even coordinates, dual vertices odd coordinates and medial vertices
/// one of each. Points of the universal cover also carry a sheet index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
    pub sheet: Option<i32>,
}

impl Coord {
    /// Point given directly in half units.
    pub const fn half(x: i32, y: i32) -> Self {
        Self { x, y, sheet: None }
    }

    /// Primal lattice point `(x, y)`.
    pub const fn site(x: i32, y: i32) -> Self {
        Self::half(2 * x, 2 * y)
    }

    /// Primal point `(x, y)` on sheet `sheet` of the universal cover.
    pub const fn cover(x: i32, y: i32, sheet: i32) -> Self {
        Self {
            x: 2 * x,
            y: 2 * y,
            sheet: Some(sheet),
        }
    }

    pub fn is_primal(&self) -> bool {
        self.x % 2 == 0 && self.y % 2 == 0
    }

    pub fn is_dual(&self) -> bool {
        self.x.rem_euclid(2) == 1 && self.y.rem_euclid(2) == 1
    }

    pub fn is_medial(&self) -> bool {
        (self.x + self.y).rem_euclid(2) == 1
    }

    pub fn offset(&self, dx: i32, dy: i32) -> Self {
        Self {
            x: self.x + dx,
            y: self.y + dy,
            sheet: self.sheet,
        }
    }

    /// Sup-norm distance to the origin in lattice units (times two).
    pub fn sup_half(&self) -> i32 {
        self.x.abs().max(self.y.abs())
    }

    pub fn real(&self) -> (f64, f64) {
        (self.x as f64 / 2.0, self.y as f64 / 2.0)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", fmt_half(self.x), fmt_half(self.y))?;
        if let Some(s) = self.sheet {
            write!(f, ",{s}")?;
        }
        Ok(())
    }
}

pub(crate) fn fmt_half(v: i32) -> String {
    if v % 2 == 0 {
        format!("{}", v / 2)
    } else {
        format!("{}", v as f64 / 2.0)
    }
}

/// Parses a lattice coordinate such as `3`, `-1.5` into half units.
pub(crate) fn parse_half(s: &str) -> Result<i32> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad coordinate `{s}`")))?;
    let h = v * 2.0;
    if (h - h.round()).abs() > 1e-9 || h.abs() > 1e8 {
        return Err(Error::Parse(format!("coordinate `{s}` is not a multiple of 1/2")));
    }
    Ok(h.round() as i32)
}

/// Parses `x,y` or `x,y,sheet`.
pub fn parse_coord(s: &str) -> Result<Coord> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [x, y] => Ok(Coord::half(parse_half(x)?, parse_half(y)?)),
        [x, y, z] => Ok(Coord {
            x: parse_half(x)?,
            y: parse_half(y)?,
            sheet: Some(
                z.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad sheet `{z}`")))?,
            ),
        }),
        _ => Err(Error::Parse(format!("bad point `{s}`"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Box,
    Rect,
    SlitBox,
    CoverBox,
    Dual,
    Medial,
    Custom,
}

impl GraphKind {
    pub fn name(&self) -> &'static str {
        match self {
            GraphKind::Box => "box",
            GraphKind::Rect => "rect",
            GraphKind::SlitBox => "slit_box",
            GraphKind::CoverBox => "cover_box",
            GraphKind::Dual => "dual",
            GraphKind::Medial => "medial",
            GraphKind::Custom => "custom",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Ok(match s {
            "box" => GraphKind::Box,
            "rect" => GraphKind::Rect,
            "slit_box" => GraphKind::SlitBox,
            "cover_box" => GraphKind::CoverBox,
            "dual" => GraphKind::Dual,
            "medial" => GraphKind::Medial,
            "custom" => GraphKind::Custom,
            other => return Err(Error::Parse(format!("unknown graph kind `{other}`"))),
        })
    }
}

/// Finite simple graph with embedded vertices, dense vertex and edge indices
/// and a distinguished boundary vertex set.
#[derive(Clone, Debug)]
pub struct FiniteGraph {
    kind: GraphKind,
    coords: Vec<Coord>,
    lookup: HashMap<Coord, VertexId>,
    edges: Vec<[VertexId; 2]>,
    incidence: Vec<Vec<EdgeId>>,
    boundary: Vec<VertexId>,
    on_boundary: Vec<bool>,
}

impl FiniteGraph {
    /// Builds a graph whose boundary is the set of vertices of degree below four.
    pub fn new(kind: GraphKind, coords: Vec<Coord>, edges: Vec<[VertexId; 2]>) -> Result<Self> {
        let mut g = Self::assemble(kind, coords, edges)?;
        let boundary: Vec<VertexId> = (0..g.coords.len()).filter(|&v| g.incidence[v].len() < 4).collect();
        g.set_boundary(boundary)?;
        Ok(g)
    }

    /// Builds a graph with an explicit boundary set.
    pub fn with_boundary(
        kind: GraphKind,
        coords: Vec<Coord>,
        edges: Vec<[VertexId; 2]>,
        boundary: Vec<VertexId>,
    ) -> Result<Self> {
        let mut g = Self::assemble(kind, coords, edges)?;
        g.set_boundary(boundary)?;
        Ok(g)
    }

    fn assemble(kind: GraphKind, coords: Vec<Coord>, edges: Vec<[VertexId; 2]>) -> Result<Self> {
        let n = coords.len();
        let mut lookup = HashMap::with_capacity(n);
        for (i, c) in coords.iter().enumerate() {
            if lookup.insert(*c, i).is_some() {
                return Err(Error::Parse(format!("duplicate vertex at {c}")));
            }
        }
        let mut incidence = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        let mut canon = Vec::with_capacity(edges.len());
        for (i, &[u, v]) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::Parse(format!("edge {i} has an endpoint out of range")));
            }
            if u == v {
                return Err(Error::Parse(format!("edge {i} is a loop")));
            }
            let e = [u.min(v), u.max(v)];
            if !seen.insert(e) {
                return Err(Error::Parse(format!("edge {i} duplicates an earlier edge")));
            }
            incidence[u].push(i);
            incidence[v].push(i);
            canon.push(e);
        }
        Ok(Self {
            kind,
            coords,
            lookup,
            edges: canon,
            incidence,
            boundary: Vec::new(),
            on_boundary: vec![false; n],
        })
    }

    fn set_boundary(&mut self, mut boundary: Vec<VertexId>) -> Result<()> {
        boundary.sort_unstable();
        boundary.dedup();
        if let Some(&v) = boundary.iter().find(|&&v| v >= self.coords.len()) {
            return Err(Error::Parse(format!("boundary vertex {v} out of range")));
        }
        self.on_boundary = vec![false; self.coords.len()];
        for &v in &boundary {
            self.on_boundary[v] = true;
        }
        self.boundary = boundary;
        Ok(())
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn coord(&self, v: VertexId) -> Coord {
        self.coords[v]
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn vertex_at(&self, c: Coord) -> Option<VertexId> {
        self.lookup.get(&c).copied()
    }

    pub fn endpoints(&self, e: EdgeId) -> [VertexId; 2] {
        self.edges[e]
    }

    pub fn edges(&self) -> &[[VertexId; 2]] {
        &self.edges
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v].len()
    }

    pub fn other(&self, e: EdgeId, v: VertexId) -> VertexId {
        let [a, b] = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (EdgeId, VertexId)> + '_ {
        self.incidence[v].iter().map(move |&e| (e, self.other(e, v)))
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.incidence[u].iter().copied().find(|&e| self.other(e, u) == v)
    }

    pub fn edge_at(&self, a: Coord, b: Coord) -> Option<EdgeId> {
        self.edge_between(self.vertex_at(a)?, self.vertex_at(b)?)
    }

    /// Midpoint of an edge in half units; for cover graphs the sheet of the
    /// endpoint that comes first in coordinate order.
    pub fn midpoint(&self, e: EdgeId) -> Coord {
        let [u, v] = self.edges[e];
        let (a, b) = (self.coords[u], self.coords[v]);
        let first = if (a.x, a.y) <= (b.x, b.y) { a } else { b };
        Coord {
            x: (a.x + b.x) / 2,
            y: (a.y + b.y) / 2,
            sheet: first.sheet,
        }
    }

    pub fn boundary(&self) -> &[VertexId] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.on_boundary[v]
    }

    /// Vertices not on the boundary.
    pub fn interior(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.coords.len()).filter(move |&v| !self.on_boundary[v])
    }

    /// Bounding box `(xmin, ymin, xmax, ymax)` of the vertex coordinates in half units.
    pub fn bounds(&self) -> (i32, i32, i32, i32) {
        let mut b = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for c in &self.coords {
            b.0 = b.0.min(c.x);
            b.1 = b.1.min(c.y);
            b.2 = b.2.max(c.x);
            b.3 = b.3.max(c.y);
        }
        b
    }

    /// Checks the structural invariants: symmetric incidence, no loops, no
    /// multi-edges, boundary inside the vertex set.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (e, &[u, v]) in self.edges.iter().enumerate() {
            if u == v || u >= self.num_vertices() || v >= self.num_vertices() {
                return Err(Error::Parse(format!("edge {e} is malformed")));
            }
            if !seen.insert([u, v]) {
                return Err(Error::Parse(format!("edge {e} is repeated")));
            }
            if !self.incidence[u].contains(&e) || !self.incidence[v].contains(&e) {
                return Err(Error::Parse(format!("edge {e} missing from incidence")));
            }
        }
        let total: usize = self.incidence.iter().map(Vec::len).sum();
        if total != 2 * self.edges.len() {
            return Err(Error::Parse("incidence lists are inconsistent".into()));
        }
        for (c, &i) in &self.lookup {
            if self.coords[i] != *c {
                return Err(Error::Parse("coordinate lookup is inconsistent".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coord_classes() {
        assert!(Coord::site(1, -2).is_primal());
        assert!(Coord::half(1, -3).is_dual());
        assert!(Coord::half(1, 0).is_medial());
        assert_eq!(Coord::half(1, -3).to_string(), "0.5,-1.5");
        assert_eq!(parse_coord("0.5,-1.5").unwrap(), Coord::half(1, -3));
        assert_eq!(parse_coord("1,2,-3").unwrap(), Coord::cover(1, 2, -3));
        assert!(parse_coord("0.25,1").is_err());
    }

    #[test]
    fn rejects_multi_edges() {
        let c = vec![Coord::site(0, 0), Coord::site(1, 0)];
        assert!(FiniteGraph::new(GraphKind::Custom, c.clone(), vec![[0, 1], [1, 0]]).is_err());
        assert!(FiniteGraph::new(GraphKind::Custom, c, vec![[0, 0]]).is_err());
    }
}
