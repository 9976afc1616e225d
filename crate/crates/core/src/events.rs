//! Events of bond configurations addressed by stable string identifiers.
//!
//! Identifiers:
//! `edge_open:<index>`, `edge:<x,y>:<x,y>`, `conn:<x,y>:<x,y>`,
//! `Ch:<x0,y0>:<x1,y1>` and `Cv:...` (open crossings of a primal rectangle),
//! `Ch*:...` and `Cv*:...` (dual-open crossings of a dual rectangle with
//! half-integer corners), `annulus:<x,y>:<n>` (open circuit in
//! `z + (Λ_2n \ Λ_n)` surrounding `z`), `onearm:<n>` (origin connected to
//! distance `n`), `bdry:<x,y>` (connected to the graph boundary).

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{parse_coord, Coord, EdgeId, FiniteGraph, VertexId};
use crate::model::BondConfiguration;

/// Version tag of [`box1_catalog`].
pub const CATALOG_VERSION: &str = "box1-v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventSpec {
    EdgeOpen(EdgeId),
    EdgeAt(Coord, Coord),
    Conn(Coord, Coord),
    Crossing {
        orientation: Orientation,
        dual: bool,
        lo: Coord,
        hi: Coord,
    },
    Annulus { center: Coord, n: u32 },
    OneArm(u32),
    ToBoundary(Coord),
}

impl EventSpec {
    pub fn parse(id: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad event id `{id}`"));
        let (tag, rest) = id.split_once(':').ok_or_else(bad)?;
        let pair = |rest: &str| -> Result<(Coord, Coord)> {
            let (a, b) = rest.split_once(':').ok_or_else(bad)?;
            Ok((parse_coord(a)?, parse_coord(b)?))
        };
        let count = |s: &str| -> Result<u32> { s.trim().parse().map_err(|_| bad()) };
        Ok(match tag {
            "edge_open" => EventSpec::EdgeOpen(rest.trim().parse().map_err(|_| bad())?),
            "edge" => {
                let (a, b) = pair(rest)?;
                EventSpec::EdgeAt(a, b)
            }
            "conn" => {
                let (a, b) = pair(rest)?;
                EventSpec::Conn(a, b)
            }
            "Ch" | "Cv" | "Ch*" | "Cv*" => {
                let (lo, hi) = pair(rest)?;
                let along = if tag.starts_with("Ch") { lo.x >= hi.x } else { lo.y >= hi.y };
                if along || lo.x > hi.x || lo.y > hi.y {
                    return Err(Error::Parse(format!("degenerate rectangle in `{id}`")));
                }
                let dual = tag.ends_with('*');
                let aligned = if dual { lo.is_dual() && hi.is_dual() } else { lo.is_primal() && hi.is_primal() };
                if !aligned {
                    return Err(Error::Parse(format!("rectangle corners of `{id}` are misaligned")));
                }
                EventSpec::Crossing {
                    orientation: if tag.starts_with("Ch") {
                        Orientation::Horizontal
                    } else {
                        Orientation::Vertical
                    },
                    dual,
                    lo,
                    hi,
                }
            }
            "annulus" => {
                let (c, n) = rest.rsplit_once(':').ok_or_else(bad)?;
                EventSpec::Annulus {
                    center: parse_coord(c)?,
                    n: count(n)?,
                }
            }
            "onearm" => EventSpec::OneArm(count(rest)?),
            "bdry" => EventSpec::ToBoundary(parse_coord(rest)?),
            _ => return Err(bad()),
        })
    }

    pub fn monotonicity(&self) -> Monotonicity {
        match self {
            EventSpec::Crossing { dual: true, .. } => Monotonicity::Decreasing,
            _ => Monotonicity::Increasing,
        }
    }
}

impl fmt::Display for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventSpec::EdgeOpen(e) => write!(f, "edge_open:{e}"),
            EventSpec::EdgeAt(a, b) => write!(f, "edge:{a}:{b}"),
            EventSpec::Conn(a, b) => write!(f, "conn:{a}:{b}"),
            EventSpec::Crossing {
                orientation,
                dual,
                lo,
                hi,
            } => {
                let tag = match orientation {
                    Orientation::Horizontal => "Ch",
                    Orientation::Vertical => "Cv",
                };
                write!(f, "{tag}{}:{lo}:{hi}", if *dual { "*" } else { "" })
            }
            EventSpec::Annulus { center, n } => write!(f, "annulus:{center}:{n}"),
            EventSpec::OneArm(n) => write!(f, "onearm:{n}"),
            EventSpec::ToBoundary(c) => write!(f, "bdry:{c}"),
        }
    }
}

/// Adjacency between faces; each step crosses a primal edge (if present).
#[derive(Clone, Debug)]
struct FaceGraph {
    adj: Vec<Vec<(usize, Option<EdgeId>)>>,
    sources: Vec<usize>,
    targets: Vec<bool>,
}

#[derive(Clone, Debug)]
enum Resolved {
    Edge(EdgeId),
    Conn(VertexId, VertexId),
    PrimalCrossing {
        sources: Vec<VertexId>,
        allowed: Vec<bool>,
        targets: Vec<bool>,
    },
    DualCrossing(FaceGraph),
    Annulus { faces: FaceGraph, blocking: Vec<bool> },
    Reach { source: VertexId, targets: Vec<bool> },
}

type CustomFn = dyn Fn(&FiniteGraph, &BondConfiguration) -> bool + Send + Sync;

#[derive(Clone)]
enum Test {
    Resolved(Resolved),
    Custom(Arc<CustomFn>),
}

/// A boolean function of bond configurations on a fixed graph, with a
/// declared monotonicity.
#[derive(Clone)]
pub struct EventPredicate {
    id: String,
    monotonicity: Monotonicity,
    test: Test,
}

impl fmt::Debug for EventPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EventPredicate")
            .field("id", &self.id)
            .field("monotonicity", &self.monotonicity)
            .finish()
    }
}

fn vertex(g: &FiniteGraph, c: Coord) -> Result<VertexId> {
    g.vertex_at(c)
        .ok_or_else(|| Error::GeometryOutOfRange(format!("no vertex at {c}")))
}

fn require_rect(g: &FiniteGraph, x0: i32, y0: i32, x1: i32, y1: i32) -> Result<()> {
    for y in (y0..=y1).step_by(2) {
        for x in (x0..=x1).step_by(2) {
            vertex(g, Coord::half(x, y))?;
        }
    }
    Ok(())
}

/// Faces with centres in `[x0, x1] x [y0, y1]` (half units, odd), adjacent
/// when they share a lattice edge.
fn face_grid(g: &FiniteGraph, x0: i32, y0: i32, x1: i32, y1: i32) -> (Vec<Coord>, Vec<Vec<(usize, Option<EdgeId>)>>) {
    let w = ((x1 - x0) / 2 + 1) as usize;
    let h = ((y1 - y0) / 2 + 1) as usize;
    let idx = |x: i32, y: i32| ((y - y0) / 2) as usize * w + ((x - x0) / 2) as usize;
    let mut faces = Vec::with_capacity(w * h);
    let mut adj = vec![Vec::new(); w * h];
    for j in 0..h as i32 {
        for i in 0..w as i32 {
            faces.push(Coord::half(x0 + 2 * i, y0 + 2 * j));
        }
    }
    for j in 0..h as i32 {
        for i in 0..w as i32 {
            let (x, y) = (x0 + 2 * i, y0 + 2 * j);
            if x + 2 <= x1 {
                let e = g.edge_at(Coord::half(x + 1, y - 1), Coord::half(x + 1, y + 1));
                adj[idx(x, y)].push((idx(x + 2, y), e));
                adj[idx(x + 2, y)].push((idx(x, y), e));
            }
            if y + 2 <= y1 {
                let e = g.edge_at(Coord::half(x - 1, y + 1), Coord::half(x + 1, y + 1));
                adj[idx(x, y)].push((idx(x, y + 2), e));
                adj[idx(x, y + 2)].push((idx(x, y), e));
            }
        }
    }
    (faces, adj)
}

impl EventPredicate {
    /// Resolves a specification against a graph.
    pub fn resolve(spec: &EventSpec, g: &FiniteGraph) -> Result<Self> {
        let resolved = match *spec {
            EventSpec::EdgeOpen(e) => {
                if e >= g.num_edges() {
                    return Err(Error::GeometryOutOfRange(format!("no edge {e}")));
                }
                Resolved::Edge(e)
            }
            EventSpec::EdgeAt(a, b) => Resolved::Edge(
                g.edge_at(a, b)
                    .ok_or_else(|| Error::GeometryOutOfRange(format!("no edge {a} - {b}")))?,
            ),
            EventSpec::Conn(a, b) => Resolved::Conn(vertex(g, a)?, vertex(g, b)?),
            EventSpec::Crossing {
                orientation,
                dual: false,
                lo,
                hi,
            } => {
                require_rect(g, lo.x, lo.y, hi.x, hi.y)?;
                let inside = |c: Coord| c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y;
                let allowed: Vec<bool> = g.coords().iter().map(|&c| inside(c)).collect();
                let (start, end): (Box<dyn Fn(Coord) -> bool>, Box<dyn Fn(Coord) -> bool>) = match orientation {
                    Orientation::Horizontal => (Box::new(|c: Coord| c.x == lo.x), Box::new(|c: Coord| c.x == hi.x)),
                    Orientation::Vertical => (Box::new(|c: Coord| c.y == lo.y), Box::new(|c: Coord| c.y == hi.y)),
                };
                let sources = (0..g.num_vertices()).filter(|&v| allowed[v] && start(g.coord(v))).collect();
                let targets = (0..g.num_vertices()).map(|v| allowed[v] && end(g.coord(v))).collect();
                Resolved::PrimalCrossing {
                    sources,
                    allowed,
                    targets,
                }
            }
            EventSpec::Crossing {
                orientation,
                dual: true,
                lo,
                hi,
            } => {
                match orientation {
                    Orientation::Horizontal => require_rect(g, lo.x + 1, lo.y - 1, hi.x - 1, hi.y + 1)?,
                    Orientation::Vertical => require_rect(g, lo.x - 1, lo.y + 1, hi.x + 1, hi.y - 1)?,
                }
                let (faces, adj) = face_grid(g, lo.x, lo.y, hi.x, hi.y);
                let (sources, targets) = match orientation {
                    Orientation::Horizontal => (
                        (0..faces.len()).filter(|&f| faces[f].x == lo.x).collect(),
                        faces.iter().map(|f| f.x == hi.x).collect(),
                    ),
                    Orientation::Vertical => (
                        (0..faces.len()).filter(|&f| faces[f].y == lo.y).collect(),
                        faces.iter().map(|f| f.y == hi.y).collect(),
                    ),
                };
                Resolved::DualCrossing(FaceGraph { adj, sources, targets })
            }
            EventSpec::Annulus { center, n } => {
                if n == 0 {
                    return Err(Error::GeometryOutOfRange("annulus needs n >= 1".into()));
                }
                let r = 4 * n as i32;
                require_rect(g, center.x - r, center.y - r, center.x + r, center.y + r)?;
                let (faces, adj) = face_grid(g, center.x - r - 1, center.y - r - 1, center.x + r + 1, center.y + r + 1);
                let start = faces
                    .iter()
                    .position(|f| f.x == center.x + 1 && f.y == center.y + 1)
                    .expect("centre face inside the grid");
                let targets = faces
                    .iter()
                    .map(|f| (f.x - center.x).abs().max((f.y - center.y).abs()) > r)
                    .collect();
                let ring = |v: VertexId| {
                    let c = g.coord(v);
                    let d = (c.x - center.x).abs().max((c.y - center.y).abs());
                    d > r / 2 && d <= r
                };
                let blocking = g.edges().iter().map(|&[u, v]| ring(u) && ring(v)).collect();
                Resolved::Annulus {
                    faces: FaceGraph {
                        adj,
                        sources: vec![start],
                        targets,
                    },
                    blocking,
                }
            }
            EventSpec::OneArm(n) => {
                let r = 2 * n as i32;
                require_rect(g, -r, -r, r, r)?;
                Resolved::Reach {
                    source: vertex(g, Coord::site(0, 0))?,
                    targets: g.coords().iter().map(|c| c.sup_half() >= r).collect(),
                }
            }
            EventSpec::ToBoundary(c) => Resolved::Reach {
                source: vertex(g, c)?,
                targets: (0..g.num_vertices()).map(|v| g.is_boundary(v)).collect(),
            },
        };
        Ok(Self {
            id: spec.to_string(),
            monotonicity: spec.monotonicity(),
            test: Test::Resolved(resolved),
        })
    }

    pub fn parse(id: &str, g: &FiniteGraph) -> Result<Self> {
        Self::resolve(&EventSpec::parse(id)?, g)
    }

    pub fn custom(
        id: impl Into<String>,
        monotonicity: Monotonicity,
        f: impl Fn(&FiniteGraph, &BondConfiguration) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            monotonicity,
            test: Test::Custom(Arc::new(f)),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn is_increasing(&self) -> bool {
        self.monotonicity == Monotonicity::Increasing
    }

    pub fn occurs(&self, g: &FiniteGraph, w: &BondConfiguration) -> bool {
        match &self.test {
            Test::Custom(f) => f(g, w),
            Test::Resolved(r) => match r {
                Resolved::Edge(e) => w.is_open(*e),
                Resolved::Conn(a, b) => {
                    a == b || reach(g, w, &[*a], None, |v| v == *b)
                }
                Resolved::PrimalCrossing {
                    sources,
                    allowed,
                    targets,
                } => reach(g, w, sources, Some(allowed), |v| targets[v]),
                Resolved::DualCrossing(faces) => {
                    face_reach(faces, |e| matches!(e, Some(e) if !w.is_open(e)))
                }
                Resolved::Annulus { faces, blocking } => {
                    !face_reach(faces, |e| match e {
                        Some(e) => !(blocking[e] && w.is_open(e)),
                        None => true,
                    })
                }
                Resolved::Reach { source, targets } => reach(g, w, &[*source], None, |v| targets[v]),
            },
        }
    }
}

/// Breadth-first search over open edges from `sources`, staying inside
/// `allowed`, until a vertex satisfying `target` is found.
fn reach(
    g: &FiniteGraph,
    w: &BondConfiguration,
    sources: &[VertexId],
    allowed: Option<&Vec<bool>>,
    target: impl Fn(VertexId) -> bool,
) -> bool {
    let mut seen = vec![false; g.num_vertices()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if target(s) {
            return true;
        }
        seen[s] = true;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        for (e, u) in g.neighbors(v) {
            if seen[u] || !w.is_open(e) || allowed.is_some_and(|a| !a[u]) {
                continue;
            }
            if target(u) {
                return true;
            }
            seen[u] = true;
            queue.push_back(u);
        }
    }
    false
}

fn face_reach(faces: &FaceGraph, passable: impl Fn(Option<EdgeId>) -> bool) -> bool {
    let mut seen = vec![false; faces.adj.len()];
    let mut queue = VecDeque::new();
    for &s in &faces.sources {
        if faces.targets[s] {
            return true;
        }
        seen[s] = true;
        queue.push_back(s);
    }
    while let Some(f) = queue.pop_front() {
        for &(h, e) in &faces.adj[f] {
            if seen[h] || !passable(e) {
                continue;
            }
            if faces.targets[h] {
                return true;
            }
            seen[h] = true;
            queue.push_back(h);
        }
    }
    false
}

/// Evaluates an event specification on a configuration.
pub fn detect_event(g: &FiniteGraph, w: &BondConfiguration, spec: &EventSpec) -> Result<bool> {
    Ok(EventPredicate::resolve(spec, g)?.occurs(g, w))
}

/// The versioned catalogue of twelve increasing events on the box `[-1,1]^2`.
pub fn box1_catalog() -> Vec<EventSpec> {
    [
        "edge:0,0:1,0",
        "edge:-1,-1:0,-1",
        "edge:0,0:0,1",
        "conn:0,0:1,1",
        "conn:-1,-1:1,1",
        "conn:-1,0:1,0",
        "Ch:-1,-1:1,1",
        "Cv:-1,-1:1,1",
        "Ch:-1,0:1,1",
        "Ch:0,-1:1,1",
        "onearm:1",
        "Ch:-1,-1:1,-1",
    ]
    .iter()
    .map(|id| EventSpec::parse(id).expect("catalogue ids are well formed"))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_box, build_rect};

    #[test]
    fn ids_round_trip() {
        for id in [
            "edge_open:5",
            "conn:0,0:1,1",
            "Ch:0,0:1,1",
            "Cv*:0.5,-0.5:1.5,3.5",
            "annulus:0,0:2",
            "onearm:3",
            "bdry:0,0",
            "conn:0,0,0:0,0,-3",
        ] {
            assert_eq!(EventSpec::parse(id).unwrap().to_string(), id);
        }
        assert!(EventSpec::parse("Ch:0,0:0.5,1").is_err());
        assert!(EventSpec::parse("nope:1").is_err());
    }

    #[test]
    fn extremes() {
        let g = build_box(4);
        let open = BondConfiguration::open(g.num_edges());
        let closed = BondConfiguration::closed(g.num_edges());
        for id in ["Ch:-4,-4:4,4", "Cv:-2,-1:3,1", "annulus:0,0:2", "onearm:4", "conn:-4,-4:4,4"] {
            let ev = EventPredicate::parse(id, &g).unwrap();
            assert!(ev.occurs(&g, &open), "{id}");
            assert!(!ev.occurs(&g, &closed), "{id}");
        }
        let dual = EventPredicate::parse("Cv*:-3.5,-4.5:3.5,4.5", &g).unwrap();
        assert!(dual.occurs(&g, &closed));
        assert!(!dual.occurs(&g, &open));
        assert!(matches!(
            EventPredicate::parse("annulus:0,0:3", &g),
            Err(Error::GeometryOutOfRange(_))
        ));
    }

    #[test]
    fn annulus_needs_a_surrounding_circuit() {
        let g = build_box(4);
        let ring = |c: Coord| {
            let d = c.sup_half();
            d == 6
        };
        let bits = g.edges().iter().map(|&[u, v]| ring(g.coord(u)) && ring(g.coord(v))).collect();
        let mut w = BondConfiguration::from_bits(bits);
        let ev = EventPredicate::parse("annulus:0,0:2", &g).unwrap();
        assert!(ev.occurs(&g, &w));
        let gap = g.edge_at(Coord::site(3, 0), Coord::site(3, 1)).unwrap();
        w.set(gap, false);
        assert!(!ev.occurs(&g, &w));
    }

    #[test]
    fn crossing_complement_on_small_rectangle() {
        let g = build_rect(0, 0, 2, 3).unwrap();
        let ch = EventPredicate::parse("Ch:0,0:2,3", &g).unwrap();
        let cv = EventPredicate::parse("Cv*:0.5,-0.5:1.5,3.5", &g).unwrap();
        for mask in 0..1u64 << g.num_edges() {
            let w = BondConfiguration::from_mask(mask, g.num_edges());
            assert!(ch.occurs(&g, &w) ^ cv.occurs(&g, &w));
        }
    }

    #[test]
    fn catalogue_is_increasing_on_box1() {
        let g = build_box(1);
        let events: Vec<EventPredicate> =
            box1_catalog().iter().map(|s| EventPredicate::resolve(s, &g).unwrap()).collect();
        assert_eq!(events.len(), 12);
        for mask in 0..1u64 << 12 {
            let w = BondConfiguration::from_mask(mask, 12);
            for e in 0..12 {
                if mask >> e & 1 == 0 {
                    let up = BondConfiguration::from_mask(mask | 1 << e, 12);
                    for ev in &events {
                        assert!(!ev.occurs(&g, &w) || ev.occurs(&g, &up), "{}", ev.id());
                    }
                }
            }
        }
    }
}
