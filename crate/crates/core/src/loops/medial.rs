//! Geometry of the infinite medial lattice in half units.

use crate::lattice::Coord;

/// Unit medial steps in counterclockwise order.
pub(crate) const DIRS: [(i32, i32); 4] = [(1, 1), (-1, 1), (-1, -1), (1, -1)];

pub(crate) fn step(m: Coord, d: usize) -> Coord {
    m.offset(DIRS[d].0, DIRS[d].1)
}

pub(crate) fn dir_of(from: Coord, to: Coord) -> Option<usize> {
    DIRS.iter().position(|&(dx, dy)| to.x - from.x == dx && to.y - from.y == dy)
}

pub(crate) fn left(d: usize) -> usize {
    (d + 1) % 4
}

pub(crate) fn right(d: usize) -> usize {
    (d + 3) % 4
}

/// Primal edge through a medial vertex.
pub(crate) fn primal_edge(m: Coord) -> (Coord, Coord) {
    if m.x.rem_euclid(2) == 1 {
        (m.offset(-1, 0), m.offset(1, 0))
    } else {
        (m.offset(0, -1), m.offset(0, 1))
    }
}

/// Dual edge through a medial vertex.
pub(crate) fn dual_edge(m: Coord) -> (Coord, Coord) {
    if m.x.rem_euclid(2) == 1 {
        (m.offset(0, -1), m.offset(0, 1))
    } else {
        (m.offset(-1, 0), m.offset(1, 0))
    }
}

/// Primal and dual vertex bordering the medial edge `tail -> head`.
pub(crate) fn borders(tail: Coord, head: Coord) -> (Coord, Coord) {
    if tail.x.rem_euclid(2) == 1 {
        (Coord::half(head.x, tail.y), Coord::half(tail.x, head.y))
    } else {
        (Coord::half(tail.x, head.y), Coord::half(head.x, tail.y))
    }
}

/// True when the medial edge from `m` in direction `d` is oriented away
/// from `m`, i.e. counterclockwise around its primal vertex.
pub(crate) fn points_out(m: Coord, d: usize) -> bool {
    let h = step(m, d);
    let (v, _) = borders(m, h);
    let (ax, ay) = (m.x - v.x, m.y - v.y);
    let (bx, by) = (h.x - v.x, h.y - v.y);
    ax * by - ay * bx > 0
}

/// Follows the loop rule on the whole medial lattice (right turn through
/// open edges, left turn otherwise) from the edge leaving `start` in
/// direction `d` until it closes.
pub(crate) fn trace_cycle(start: Coord, d: usize, open: impl Fn(Coord) -> bool) -> Vec<(Coord, usize)> {
    let mut out = vec![(start, d)];
    let (mut at, mut dir) = (start, d);
    loop {
        let h = step(at, dir);
        let nd = if open(h) { right(dir) } else { left(dir) };
        if (h, nd) == (start, d) {
            return out;
        }
        out.push((h, nd));
        at = h;
        dir = nd;
        assert!(out.len() < 50_000_000, "runaway medial trace");
    }
}
