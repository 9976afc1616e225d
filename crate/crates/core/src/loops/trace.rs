use std::f64::consts::FRAC_PI_2;

use super::domain::DobrushinDomain;
use super::medial::{left, right};
use crate::error::{Error, Result};
use crate::model::BondConfiguration;

/// Signed rotation in quarter turns, counterclockwise positive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Winding(pub i32);

impl Winding {
    pub fn quarter_turns(self) -> i32 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0 as f64 * FRAC_PI_2
    }
}

impl std::ops::Add for Winding {
    type Output = Winding;
    fn add(self, rhs: Winding) -> Winding {
        Winding(self.0 + rhs.0)
    }
}

/// Total rotation of a medial path given by its successive step directions
/// (indices into the diagonal directions, counterclockwise).
pub fn path_winding(dirs: &[usize]) -> Winding {
    Winding(
        dirs.windows(2)
            .map(|w| match (w[1] + 4 - w[0]) % 4 {
                1 => 1,
                3 => -1,
                0 => 0,
                _ => panic!("medial paths never reverse"),
            })
            .sum(),
    )
}

/// Which curve of the loop representation traverses a medial edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    /// Position along the exploration path.
    Path(usize),
    /// Index of the loop.
    Loop(usize),
}

/// The exploration path and the loops of a configuration on a domain.
#[derive(Clone, Debug)]
pub struct LoopDecomposition {
    path: Vec<usize>,
    winding_to_end: Vec<Winding>,
    loops: Vec<Vec<usize>>,
    membership: Vec<Membership>,
}

impl LoopDecomposition {
    /// Edges of the exploration path, from `e_a` to `e_b`.
    pub fn path(&self) -> &[usize] {
        &self.path
    }

    pub fn loops(&self) -> &[Vec<usize>] {
        &self.loops
    }

    pub fn membership(&self, e: usize) -> Membership {
        self.membership[e]
    }

    pub fn on_path(&self, e: usize) -> bool {
        matches!(self.membership[e], Membership::Path(_))
    }

    /// Winding of the path from `e` to `e_b`; zero when `e` is not on it.
    pub fn winding(&self, e: usize) -> Winding {
        match self.membership[e] {
            Membership::Path(i) => self.winding_to_end[i],
            Membership::Loop(_) => Winding(0),
        }
    }

    /// Number of edge traversals over all curves.
    pub fn traversals(&self) -> usize {
        self.path.len() + self.loops.iter().map(Vec::len).sum::<usize>()
    }
}

/// Next edge after arriving at the head of `e` under configuration `w`.
#[inline]
fn successor(d: &DobrushinDomain, e: usize, w: &BondConfiguration) -> Option<usize> {
    let edge = d.edges()[e];
    let m = edge.head_id?;
    let nd = if d.is_open_at(m, w) { right(edge.dir) } else { left(edge.dir) };
    d.out_edge(m, nd)
}

/// Follows the exploration path from `e_a`, calling `visit(edge, turn)` for
/// each edge after the first with the turn taken to enter it. Returns
/// `false` if the path leaves the domain before reaching `e_b`.
#[inline]
pub(crate) fn explore(d: &DobrushinDomain, w: &BondConfiguration, mut visit: impl FnMut(usize, i32)) -> bool {
    let mut e = d.e_a();
    let limit = d.edges().len();
    for _ in 0..limit {
        if e == d.e_b() {
            return true;
        }
        let Some(next) = successor(d, e, w) else {
            return false;
        };
        let turn = if (d.edges()[next].dir + 4 - d.edges()[e].dir) % 4 == 1 { 1 } else { -1 };
        visit(next, turn);
        e = next;
    }
    e == d.e_b()
}

/// Loop representation of `w` on the domain.
pub fn trace_loops(d: &DobrushinDomain, w: &BondConfiguration) -> Result<LoopDecomposition> {
    d.check_configuration(w)?;
    let mut path = vec![d.e_a()];
    let mut turns = Vec::new();
    if !explore(d, w, |e, t| {
        path.push(e);
        turns.push(t);
    }) {
        return Err(Error::InvalidConfiguration("exploration path leaves the domain".into()));
    }
    let mut winding_to_end = vec![Winding(0); path.len()];
    for i in (0..turns.len()).rev() {
        winding_to_end[i] = winding_to_end[i + 1] + Winding(turns[i]);
    }
    let n = d.edges().len();
    let mut membership: Vec<Option<Membership>> = vec![None; n];
    for (i, &e) in path.iter().enumerate() {
        if membership[e].is_some() {
            return Err(Error::InvalidConfiguration("exploration path revisits an edge".into()));
        }
        membership[e] = Some(Membership::Path(i));
    }
    let mut loops = Vec::new();
    for start in 0..d.num_domain_edges() {
        if membership[start].is_some() {
            continue;
        }
        let id = loops.len();
        let mut cycle = Vec::new();
        let mut e = start;
        loop {
            if membership[e].is_some() {
                return Err(Error::InvalidConfiguration(format!("loop through medial edge {start} does not close")));
            }
            membership[e] = Some(Membership::Loop(id));
            cycle.push(e);
            e = successor(d, e, w)
                .ok_or_else(|| Error::InvalidConfiguration(format!("loop through medial edge {start} leaves the domain")))?;
            if e == start {
                break;
            }
        }
        loops.push(cycle);
    }
    Ok(LoopDecomposition {
        path,
        winding_to_end,
        loops,
        membership: membership.into_iter().map(|m| m.expect("every edge assigned")).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_left_turns_make_a_full_turn() {
        assert_eq!(path_winding(&[0, 1, 2, 3, 0]).radians(), 2.0 * std::f64::consts::PI);
        assert_eq!(path_winding(&[2, 1, 2]), Winding(0));
        assert_eq!(path_winding(&[3]), Winding(0));
    }
}
