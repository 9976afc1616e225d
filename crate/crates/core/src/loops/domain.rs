use std::collections::{HashMap, HashSet};

use super::medial::{borders, dir_of, dual_edge, points_out, primal_edge, right, step, trace_cycle, DIRS};
use crate::error::{Error, Result};
use crate::lattice::{Coord, EdgeId, FiniteGraph, GraphKind, VertexId};
use crate::model::BondConfiguration;

/// Role of a medial vertex of a Dobrushin domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MedialState {
    /// Its primal edge is a free edge of the domain.
    Free(EdgeId),
    /// Its primal edge lies on the wired arc and is always open.
    Wired(EdgeId),
    /// Its dual edge lies on the dual-wired arc and is always dual-open.
    DualWired,
}

/// Directed medial edge of a domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MedialEdge {
    pub tail: Coord,
    pub head: Coord,
    pub tail_id: Option<usize>,
    pub head_id: Option<usize>,
    pub dir: usize,
}

impl MedialEdge {
    /// `tail + head` in half units: twice the midpoint.
    pub fn key(&self) -> (i32, i32) {
        (self.tail.x + self.head.x, self.tail.y + self.head.y)
    }
}

/// A medial Dobrushin domain with its primal and dual domains.
#[derive(Clone, Debug)]
pub struct DobrushinDomain {
    vertices: Vec<Coord>,
    lookup: HashMap<Coord, usize>,
    state: Vec<MedialState>,
    edges: Vec<MedialEdge>,
    out_slot: Vec<[Option<usize>; 4]>,
    in_slot: Vec<[Option<usize>; 4]>,
    edge_by_key: HashMap<(i32, i32), usize>,
    arc_ab: Vec<Coord>,
    arc_ba: Vec<Coord>,
    a_diamond: usize,
    b_diamond: usize,
    e_a: usize,
    e_b: usize,
    primal: FiniteGraph,
    a: VertexId,
    b: VertexId,
    wired_edges: Vec<EdgeId>,
    free_edges: Vec<EdgeId>,
    dual: FiniteGraph,
    a_star: VertexId,
    b_star: VertexId,
    dual_wired: Vec<EdgeId>,
}

fn arcs_error(property: u8, reason: impl Into<String>) -> Error {
    Error::InvalidArcs {
        property,
        reason: reason.into(),
    }
}

/// Strict interior test by ray casting; polygon and point in the same units.
fn strictly_inside(poly: &[(i64, i64)], p: (i64, i64)) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (x1, y1) = poly[i];
        let (x2, y2) = poly[(i + 1) % n];
        if (y1 > p.1) != (y2 > p.1) {
            // x-coordinate of the crossing compared without division.
            let lhs = (p.0 - x1) * (y2 - y1);
            let rhs = (x2 - x1) * (p.1 - y1);
            if (y2 > y1 && lhs < rhs) || (y2 < y1 && lhs > rhs) {
                inside = !inside;
            }
        }
    }
    inside
}

/// Builds a domain from two medial paths `ab` and `ba`, both running from
/// `a◇` to `b◇`.
pub fn build_dobrushin(ab: &[Coord], ba: &[Coord]) -> Result<DobrushinDomain> {
    // Property 1: common endpoints, distinct.
    if ab.len() < 2 || ba.len() < 2 {
        return Err(arcs_error(1, "arcs need at least two vertices"));
    }
    let (a_d, b_d) = (ab[0], *ab.last().unwrap());
    if ba[0] != a_d || *ba.last().unwrap() != b_d {
        return Err(arcs_error(1, "arcs do not share their endpoints"));
    }
    if a_d == b_d {
        return Err(arcs_error(1, "the two marked medial vertices coincide"));
    }
    // Property 2: medial paths following the orientation.
    for (name, arc) in [("ab", ab), ("ba", ba)] {
        if let Some(m) = arc.iter().find(|m| !m.is_medial() || m.sheet.is_some()) {
            return Err(arcs_error(2, format!("{m} on arc {name} is not a planar medial vertex")));
        }
        for w in arc.windows(2) {
            match dir_of(w[0], w[1]) {
                Some(d) if points_out(w[0], d) => {}
                Some(_) => return Err(arcs_error(2, format!("arc {name} runs against the orientation at {}", w[0]))),
                None => return Err(arcs_error(2, format!("arc {name} jumps from {} to {}", w[0], w[1]))),
            }
        }
    }
    // Property 4: edge-avoiding.
    let mut used = HashSet::new();
    for arc in [ab, ba] {
        for w in arc.windows(2) {
            let key = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
            if !used.insert(key) {
                return Err(arcs_error(4, format!("medial edge {} - {} used twice", w[0], w[1])));
            }
        }
    }
    // Property 5: the arcs meet only at their endpoints.
    let ab_inner: HashSet<Coord> = ab[1..ab.len() - 1].iter().copied().collect();
    if let Some(m) = ba[1..ba.len() - 1].iter().find(|m| ab_inner.contains(m) || **m == a_d || **m == b_d) {
        return Err(arcs_error(5, format!("arcs meet at {m}")));
    }
    if ab_inner.contains(&a_d) || ab_inner.contains(&b_d) {
        return Err(arcs_error(5, "arc ab revisits a marked vertex"));
    }
    // Property 3: ab counterclockwise, ba clockwise around the enclosed set.
    let mut poly: Vec<(i64, i64)> = ab.iter().map(|c| (2 * c.x as i64, 2 * c.y as i64)).collect();
    poly.extend(ba[1..ba.len() - 1].iter().rev().map(|c| (2 * c.x as i64, 2 * c.y as i64)));
    let area2: i64 = (0..poly.len())
        .map(|i| {
            let (x1, y1) = poly[i];
            let (x2, y2) = poly[(i + 1) % poly.len()];
            x1 * y2 - x2 * y1
        })
        .sum();
    if area2 <= 0 {
        return Err(arcs_error(3, "arc ab does not run counterclockwise"));
    }

    let on_arc: HashSet<Coord> = ab.iter().chain(ba).copied().collect();
    let (mut xmin, mut ymin, mut xmax, mut ymax) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
    for c in &on_arc {
        xmin = xmin.min(c.x);
        ymin = ymin.min(c.y);
        xmax = xmax.max(c.x);
        ymax = ymax.max(c.y);
    }
    let mut vertices = Vec::new();
    for y in ymin..=ymax {
        for x in xmin..=xmax {
            let c = Coord::half(x, y);
            if c.is_medial() && (on_arc.contains(&c) || strictly_inside(&poly, (2 * x as i64, 2 * y as i64))) {
                vertices.push(c);
            }
        }
    }
    let lookup: HashMap<Coord, usize> = vertices.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let arc_edges = |arc: &[Coord]| -> HashSet<(Coord, Coord)> { arc.windows(2).map(|w| (w[0], w[1])).collect() };
    let ab_edges = arc_edges(ab);
    let ba_edges = arc_edges(ba);

    let mut edges = Vec::new();
    let mut out_slot = vec![[None; 4]; vertices.len()];
    let mut in_slot = vec![[None; 4]; vertices.len()];
    for (i, &m) in vertices.iter().enumerate() {
        for d in 0..4 {
            if !points_out(m, d) {
                continue;
            }
            let h = step(m, d);
            let Some(&j) = lookup.get(&h) else { continue };
            let on_boundary = ab_edges.contains(&(m, h)) || ba_edges.contains(&(m, h));
            let mid = ((m.x + h.x) as i64, (m.y + h.y) as i64);
            if !on_boundary && !strictly_inside(&poly, mid) {
                continue;
            }
            let id = edges.len();
            edges.push(MedialEdge {
                tail: m,
                head: h,
                tail_id: Some(i),
                head_id: Some(j),
                dir: d,
            });
            out_slot[i][d] = Some(id);
            in_slot[j][d] = Some(id);
        }
    }
    let (ai, bi) = (lookup[&a_d], lookup[&b_d]);
    let degree = |v: usize| {
        out_slot[v].iter().flatten().count() + in_slot[v].iter().flatten().count()
    };
    if degree(ai) != 3 || degree(bi) != 3 {
        return Err(arcs_error(
            0,
            format!("marked vertices have {} and {} incident domain edges, expected 3", degree(ai), degree(bi)),
        ));
    }
    // The missing edge at a◇ must point into it and the one at b◇ out of it.
    let missing_in = (0..4).find(|&d| {
        let t = step(a_d, (d + 2) % 4);
        in_slot[ai][d].is_none() && points_out(t, d)
    });
    let missing_out = (0..4).find(|&d| out_slot[bi][d].is_none() && points_out(b_d, d));
    let (Some(da), Some(db)) = (missing_in, missing_out) else {
        return Err(arcs_error(0, "fourth edges at the marked vertices have the wrong orientation"));
    };
    let e_a = edges.len();
    let tail_a = step(a_d, (da + 2) % 4);
    edges.push(MedialEdge {
        tail: tail_a,
        head: a_d,
        tail_id: None,
        head_id: Some(ai),
        dir: da,
    });
    in_slot[ai][da] = Some(e_a);
    let e_b = edges.len();
    let head_b = step(b_d, db);
    edges.push(MedialEdge {
        tail: b_d,
        head: head_b,
        tail_id: Some(bi),
        head_id: None,
        dir: db,
    });
    out_slot[bi][db] = Some(e_b);

    // Classify medial vertices and assemble the primal and dual domains.
    let mut primal_coords: Vec<Coord> = Vec::new();
    let mut primal_lookup: HashMap<Coord, usize> = HashMap::new();
    let mut primal_edges = Vec::new();
    let mut dual_coords: Vec<Coord> = Vec::new();
    let mut dual_lookup: HashMap<Coord, usize> = HashMap::new();
    let mut dual_edges = Vec::new();
    let add = |coords: &mut Vec<Coord>, lookup: &mut HashMap<Coord, usize>, c: Coord| {
        *lookup.entry(c).or_insert_with(|| {
            coords.push(c);
            coords.len() - 1
        })
    };
    // Turns taken by the arcs at their interior vertices: (right, left).
    let mut arc_turns: HashMap<Coord, (bool, bool)> = HashMap::new();
    for arc in [ab, ba] {
        for w in arc.windows(3) {
            let (d0, d1) = (dir_of(w[0], w[1]).unwrap(), dir_of(w[1], w[2]).unwrap());
            let slot = arc_turns.entry(w[1]).or_default();
            if d1 == right(d0) {
                slot.0 = true;
            } else {
                slot.1 = true;
            }
        }
    }
    let mut state = Vec::with_capacity(vertices.len());
    let mut wired_edges = Vec::new();
    let mut free_edges = Vec::new();
    let mut dual_wired = Vec::new();
    for (i, &m) in vertices.iter().enumerate() {
        let incident: Vec<(Coord, Coord)> = out_slot[i]
            .iter()
            .chain(in_slot[i].iter())
            .flatten()
            .filter(|&&e| e != e_a && e != e_b)
            .map(|&e| (edges[e].tail, edges[e].head))
            .collect();
        let marked = i == ai || i == bi;
        let arc_only = !marked
            && (incident.iter().all(|e| ab_edges.contains(e)) || incident.iter().all(|e| ba_edges.contains(e)));
        // A vertex seen only by the arcs has its primal edge fixed by the way
        // the arcs turn there: right around an open edge, left across a
        // closed one.
        let (all_ba, all_ab) = match (arc_only, arc_turns.get(&m).copied().unwrap_or_default()) {
            (false, _) => (false, false),
            (true, (true, false)) => (true, false),
            (true, (false, true)) => (false, true),
            (true, _) => return Err(arcs_error(0, format!("arcs turn both ways at {m}"))),
        };
        if !all_ab {
            let (u, v) = primal_edge(m);
            let pu = add(&mut primal_coords, &mut primal_lookup, u);
            let pv = add(&mut primal_coords, &mut primal_lookup, v);
            let id = primal_edges.len();
            primal_edges.push([pu, pv]);
            if all_ba {
                wired_edges.push(id);
                state.push(MedialState::Wired(id));
            } else {
                free_edges.push(id);
                state.push(MedialState::Free(id));
            }
        } else {
            state.push(MedialState::DualWired);
        }
        if !all_ba {
            let (u, v) = dual_edge(m);
            let du = add(&mut dual_coords, &mut dual_lookup, u);
            let dv = add(&mut dual_coords, &mut dual_lookup, v);
            if all_ab {
                dual_wired.push(dual_edges.len());
            }
            dual_edges.push([du, dv]);
        }
    }
    let primal = FiniteGraph::new(GraphKind::Custom, primal_coords, primal_edges)?;
    let dual = FiniteGraph::new(GraphKind::Dual, dual_coords, dual_edges)?;
    let (pa, da_star) = borders(edges[e_a].tail, edges[e_a].head);
    let (pb, db_star) = borders(edges[e_b].tail, edges[e_b].head);
    let find = |g: &FiniteGraph, c: Coord, what: &str| {
        g.vertex_at(c)
            .ok_or_else(|| arcs_error(0, format!("{what} at {c} is not in the domain")))
    };
    let a = find(&primal, pa, "a")?;
    let b = find(&primal, pb, "b")?;
    let a_star = find(&dual, da_star, "a*")?;
    let b_star = find(&dual, db_star, "b*")?;
    let edge_by_key = edges.iter().enumerate().map(|(i, e)| (e.key(), i)).collect();
    Ok(DobrushinDomain {
        vertices,
        lookup,
        state,
        edges,
        out_slot,
        in_slot,
        edge_by_key,
        arc_ab: ab.to_vec(),
        arc_ba: ba.to_vec(),
        a_diamond: ai,
        b_diamond: bi,
        e_a,
        e_b,
        primal,
        a,
        b,
        wired_edges,
        free_edges,
        dual,
        a_star,
        b_star,
        dual_wired,
    })
}

/// Derives the arcs of the domain whose primal graph is `g` (a simply
/// connected planar graph) and whose wired arc consists of the vertices
/// `wired`, joined by the edges `wired_edges` (all edges of `g` between
/// wired vertices when `None`).
pub fn arcs_from_region(
    g: &FiniteGraph,
    wired: &[VertexId],
    wired_edges: Option<&[EdgeId]>,
) -> Result<(Vec<Coord>, Vec<Coord>)> {
    region_arcs(g, wired, wired_edges, None)
}

/// `marked`, when given, is a medial edge (tail, direction) on the wired
/// boundary run that yields `e_a`.
fn region_arcs(
    g: &FiniteGraph,
    wired: &[VertexId],
    wired_edges: Option<&[EdgeId]>,
    marked: Option<(Coord, usize)>,
) -> Result<(Vec<Coord>, Vec<Coord>)> {
    if matches!(g.kind(), GraphKind::CoverBox | GraphKind::Medial) || g.num_edges() == 0 || wired.is_empty() {
        return Err(arcs_error(0, "region must be a non-empty planar graph with a wired arc"));
    }
    let present: HashSet<(Coord, Coord)> = g
        .edges()
        .iter()
        .map(|&[u, v]| ordered(g.coord(u), g.coord(v)))
        .collect();
    let wired_set: HashSet<(Coord, Coord)> = match wired_edges {
        Some(list) => list.iter().map(|&e| {
            let [u, v] = g.endpoints(e);
            ordered(g.coord(u), g.coord(v))
        }).collect(),
        None => {
            let ws: HashSet<VertexId> = wired.iter().copied().collect();
            g.edges()
                .iter()
                .filter(|[u, v]| ws.contains(u) && ws.contains(v))
                .map(|&[u, v]| ordered(g.coord(u), g.coord(v)))
                .collect()
        }
    };
    let lowest = |vs: &mut dyn Iterator<Item = Coord>| vs.min_by_key(|c| (c.y, c.x)).expect("non-empty");
    let start_out = lowest(&mut g.coords().iter().copied());
    let start_in = lowest(&mut wired.iter().map(|&v| g.coord(v)));
    let outer = trace_cycle(start_out.offset(-1, 0), 3, |m| {
        let (u, v) = primal_edge(m);
        present.contains(&ordered(u, v))
    });
    let inner = trace_cycle(start_in.offset(-1, 0), 3, |m| {
        let (u, v) = primal_edge(m);
        wired_set.contains(&ordered(u, v))
    });
    let inner_pos: HashMap<(Coord, usize), usize> = inner.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let n = outer.len();
    let shared: Vec<bool> = outer.iter().map(|e| inner_pos.contains_key(e)).collect();
    let starts: Vec<usize> = (0..n).filter(|&i| shared[i] && !shared[(i + n - 1) % n]).collect();
    let run_len = |first: usize| (0..n).take_while(|&k| shared[(first + k) % n]).count();
    let (first, run) = match marked {
        None if starts.len() == 1 => (starts[0], run_len(starts[0])),
        None => return Err(arcs_error(0, "the wired arc does not touch the outer boundary in a single run")),
        Some(edge) => starts
            .iter()
            .map(|&f| (f, run_len(f)))
            .find(|&(f, r)| (0..r).any(|k| outer[(f + k) % n] == edge))
            .ok_or_else(|| arcs_error(0, "the marked edge is not on a wired boundary run"))?,
    };
    if run < 2 {
        return Err(arcs_error(1, "the wired arc yields coinciding marked vertices"));
    }
    let e_b = outer[first];
    let e_a = outer[(first + run - 1) % n];
    let head = |(m, d): (Coord, usize)| step(m, d);
    let mut ab = vec![head(e_a)];
    for k in run..n {
        ab.push(head(outer[(first + k) % n]));
    }
    let mut ba = vec![head(e_a)];
    let m = inner.len();
    let mut i = (inner_pos[&e_a] + 1) % m;
    while inner[i] != e_b {
        ba.push(head(inner[i]));
        i = (i + 1) % m;
    }
    Ok((ab, ba))
}

fn ordered(a: Coord, b: Coord) -> (Coord, Coord) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl DobrushinDomain {
    /// Domain with primal graph `g` and wired arc `wired`; see [`arcs_from_region`].
    pub fn from_region(g: &FiniteGraph, wired: &[VertexId]) -> Result<Self> {
        let (ab, ba) = arcs_from_region(g, wired, None)?;
        build_dobrushin(&ab, &ba)
    }

    /// As [`DobrushinDomain::from_region`] with an explicit list of wired edges.
    pub fn from_region_with_edges(g: &FiniteGraph, wired: &[VertexId], wired_edges: &[EdgeId]) -> Result<Self> {
        let (ab, ba) = arcs_from_region(g, wired, Some(wired_edges))?;
        build_dobrushin(&ab, &ba)
    }

    /// Slit domain after `steps` steps of the exploration path of `w`:
    /// closed edges crossed by the path are removed, open edges it passes
    /// join the wired arc, and the component of `b` is kept. Returns the
    /// domain with the restriction of `w` to it.
    pub fn slit(&self, w: &BondConfiguration, steps: usize) -> Result<(Self, BondConfiguration)> {
        let decomposition = super::trace::trace_loops(self, w)?;
        let path = decomposition.path();
        if steps == 0 || steps >= path.len() - 1 {
            return Err(Error::InvalidRange(format!(
                "slit length {steps} outside 1..{}",
                path.len().saturating_sub(2)
            )));
        }
        let mut removed = HashSet::new();
        let mut wired: HashSet<EdgeId> = self.wired_edges.iter().copied().collect();
        for &e in &path[1..=steps] {
            let m = self.edges[e].tail_id.expect("interior path edge");
            if let MedialState::Free(x) = self.state[m] {
                if w.is_open(x) {
                    wired.insert(x);
                } else {
                    removed.insert(x);
                }
            }
        }
        let g = &self.primal;
        let mut seen = vec![false; g.num_vertices()];
        let mut stack = vec![self.b];
        seen[self.b] = true;
        while let Some(v) = stack.pop() {
            for (e, u) in g.neighbors(v) {
                if !removed.contains(&e) && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        let old: Vec<VertexId> = (0..g.num_vertices()).filter(|&v| seen[v]).collect();
        let index: HashMap<VertexId, usize> = old.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut kept = Vec::new();
        let mut edges = Vec::new();
        for (e, &[u, v]) in g.edges().iter().enumerate() {
            if !removed.contains(&e) && seen[u] && seen[v] {
                kept.push(e);
                edges.push([index[&u], index[&v]]);
            }
        }
        let sub = FiniteGraph::new(GraphKind::Custom, old.iter().map(|&v| g.coord(v)).collect(), edges)?;
        let sub_wired: Vec<EdgeId> = kept.iter().enumerate().filter(|(_, e)| wired.contains(e)).map(|(i, _)| i).collect();
        let mut wired_vertices: Vec<VertexId> = sub_wired.iter().flat_map(|&e| sub.endpoints(e)).collect();
        wired_vertices.extend([self.a, self.b].iter().filter_map(|&v| sub.vertex_at(g.coord(v))));
        wired_vertices.sort_unstable();
        wired_vertices.dedup();
        let last = self.edges[path[steps]];
        let (ab, ba) = region_arcs(&sub, &wired_vertices, Some(&sub_wired), Some((last.tail, last.dir)))?;
        let domain = build_dobrushin(&ab, &ba)?;
        if domain.vertices[domain.b_diamond] != self.vertices[self.b_diamond] {
            return Err(Error::InvalidRange("the slit domain loses the marked vertex b".into()));
        }
        // Arcs may force the state of an edge that the slit left with the
        // outside on both sides; `w` has to agree with it.
        for (m, &c) in domain.vertices.iter().enumerate() {
            let (u, v) = primal_edge(c);
            let Some(original) = g.edge_at(u, v) else { continue };
            let forced = match domain.state[m] {
                MedialState::Wired(_) => true,
                MedialState::DualWired => false,
                MedialState::Free(_) => continue,
            };
            if w.is_open(original) != forced && !removed.contains(&original) {
                return Err(Error::InvalidRange(format!(
                    "the slit domain forces the edge at {c} against the configuration"
                )));
            }
        }
        let mut restricted = domain.base_configuration();
        for &e in domain.free_edges() {
            let [u, v] = domain.primal.endpoints(e);
            let original = g
                .edge_at(domain.primal.coord(u), domain.primal.coord(v))
                .expect("slit edges come from the domain");
            restricted.set(e, w.is_open(original));
        }
        Ok((domain, restricted))
    }

    /// The rectangle `[x0,x1] x [y0,y1]` wired on the listed lattice points.
    pub fn rectangle(x0: i32, y0: i32, x1: i32, y1: i32, wired: &[(i32, i32)]) -> Result<Self> {
        let g = crate::lattice::build_rect(x0, y0, x1, y1)?;
        let ids = wired
            .iter()
            .map(|&(x, y)| {
                g.vertex_at(Coord::site(x, y))
                    .ok_or_else(|| arcs_error(0, format!("wired point ({x},{y}) outside the rectangle")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_region(&g, &ids)
    }

    pub fn medial_vertices(&self) -> &[Coord] {
        &self.vertices
    }

    pub fn medial_vertex(&self, c: Coord) -> Option<usize> {
        self.lookup.get(&c).copied()
    }

    pub fn state(&self, m: usize) -> MedialState {
        self.state[m]
    }

    /// Medial edges of the domain followed by `e_a` and `e_b`.
    pub fn edges(&self) -> &[MedialEdge] {
        &self.edges
    }

    pub fn num_domain_edges(&self) -> usize {
        self.edges.len() - 2
    }

    pub fn edge_by_key(&self, key: (i32, i32)) -> Option<usize> {
        self.edge_by_key.get(&key).copied()
    }

    pub fn out_edge(&self, m: usize, d: usize) -> Option<usize> {
        self.out_slot[m][d]
    }

    pub fn in_edge(&self, m: usize, d: usize) -> Option<usize> {
        self.in_slot[m][d]
    }

    /// Number of incident edges among the domain edges and `e_a`, `e_b`.
    pub fn available_degree(&self, m: usize) -> usize {
        self.out_slot[m].iter().flatten().count() + self.in_slot[m].iter().flatten().count()
    }

    pub fn arc_ab(&self) -> &[Coord] {
        &self.arc_ab
    }

    pub fn arc_ba(&self) -> &[Coord] {
        &self.arc_ba
    }

    pub fn a_diamond(&self) -> usize {
        self.a_diamond
    }

    pub fn b_diamond(&self) -> usize {
        self.b_diamond
    }

    pub fn e_a(&self) -> usize {
        self.e_a
    }

    pub fn e_b(&self) -> usize {
        self.e_b
    }

    pub fn primal(&self) -> &FiniteGraph {
        &self.primal
    }

    pub fn a(&self) -> VertexId {
        self.a
    }

    pub fn b(&self) -> VertexId {
        self.b
    }

    /// Primal edges forced open.
    pub fn wired_edges(&self) -> &[EdgeId] {
        &self.wired_edges
    }

    pub fn free_edges(&self) -> &[EdgeId] {
        &self.free_edges
    }

    pub fn dual(&self) -> &FiniteGraph {
        &self.dual
    }

    pub fn a_star(&self) -> VertexId {
        self.a_star
    }

    pub fn b_star(&self) -> VertexId {
        self.b_star
    }

    /// Dual edges forced open.
    pub fn dual_wired_edges(&self) -> &[EdgeId] {
        &self.dual_wired
    }

    /// Primal configuration with every free edge closed and the wired arc open.
    pub fn base_configuration(&self) -> BondConfiguration {
        let mut w = BondConfiguration::closed(self.primal.num_edges());
        for &e in &self.wired_edges {
            w.set(e, true);
        }
        w
    }

    /// Whether the primal edge through medial vertex `m` is open in `w`.
    #[inline]
    pub fn is_open_at(&self, m: usize, w: &BondConfiguration) -> bool {
        match self.state[m] {
            MedialState::Free(e) => w.is_open(e),
            MedialState::Wired(_) => true,
            MedialState::DualWired => false,
        }
    }

    /// Checks that `w` lives on the primal domain and opens the wired arc.
    pub fn check_configuration(&self, w: &BondConfiguration) -> Result<()> {
        if w.len() != self.primal.num_edges() {
            return Err(Error::InvalidConfiguration(format!(
                "configuration has {} edges, domain has {}",
                w.len(),
                self.primal.num_edges()
            )));
        }
        if let Some(&e) = self.wired_edges.iter().find(|&&e| !w.is_open(e)) {
            return Err(Error::InvalidConfiguration(format!("wired edge {e} is closed")));
        }
        Ok(())
    }

    /// The medial vertex of a primal domain edge.
    pub fn medial_of_primal(&self, e: EdgeId) -> Option<usize> {
        self.state.iter().position(|s| matches!(s, MedialState::Free(x) | MedialState::Wired(x) if *x == e))
    }

    /// Primal coordinates of the unit vector `DIRS[d]`.
    pub fn direction(d: usize) -> (i32, i32) {
        DIRS[d]
    }
}
