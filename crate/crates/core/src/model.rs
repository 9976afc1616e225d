//! Model parameters and bond configurations.

use crate::error::{Error, Result};
use crate::lattice::EdgeId;

/// Edge weight `p` and cluster weight `q` of the random-cluster measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    p: f64,
    q: f64,
}

impl ModelParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidParams(format!("p = {p} is outside [0, 1]")));
        }
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::InvalidParams(format!("q = {q} must be positive")));
        }
        Ok(Self { p, q })
    }

    /// The self-dual point `sqrt(q) / (1 + sqrt(q))`.
    pub fn critical(q: f64) -> Result<Self> {
        Self::new(critical_p(q), q)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Inverse temperature of the associated Potts model, `-log(1 - p)`.
    pub fn beta(&self) -> f64 {
        -(1.0 - self.p).ln()
    }

    /// Parameters of the dual measure: `p* = q(1-p) / (p + q(1-p))`, same `q`.
    pub fn dual(&self) -> Self {
        let closed = self.q * (1.0 - self.p);
        Self {
            p: closed / (self.p + closed),
            q: self.q,
        }
    }

    /// Probability that an edge is open given its endpoints are not
    /// otherwise connected.
    pub fn open_if_disconnected(&self) -> f64 {
        self.p / (self.p + self.q * (1.0 - self.p))
    }
}

pub fn critical_p(q: f64) -> f64 {
    let s = q.sqrt();
    s / (1.0 + s)
}

/// One bit per edge: open (`true`) or closed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BondConfiguration {
    bits: Vec<bool>,
}

impl BondConfiguration {
    pub fn closed(num_edges: usize) -> Self {
        Self {
            bits: vec![false; num_edges],
        }
    }

    pub fn open(num_edges: usize) -> Self {
        Self {
            bits: vec![true; num_edges],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Configuration whose edge `i` is open iff bit `i` of `mask` is set.
    pub fn from_mask(mask: u64, num_edges: usize) -> Self {
        Self {
            bits: (0..num_edges).map(|i| (mask >> i) & 1 == 1).collect(),
        }
    }

    pub fn to_mask(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0, |m, (i, _)| m | (1u64 << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn is_open(&self, e: EdgeId) -> bool {
        self.bits[e]
    }

    #[inline]
    pub fn set(&mut self, e: EdgeId, open: bool) {
        self.bits[e] = open;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn open_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn closed_count(&self) -> usize {
        self.bits.len() - self.open_count()
    }

    /// Pointwise order: every edge open here is open in `other`.
    pub fn le(&self, other: &BondConfiguration) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn critical_points() {
        assert!((critical_p(1.0) - 0.5).abs() < 1e-15);
        assert!((critical_p(4.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!(ModelParams::new(1.5, 2.0).is_err());
        assert!(ModelParams::new(0.5, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn duality_relation(p in 0.01f64..0.99, q in 0.1f64..10.0) {
            let m = ModelParams::new(p, q).unwrap();
            let d = m.dual();
            let lhs = p * d.p() / ((1.0 - p) * (1.0 - d.p()));
            prop_assert!((lhs - q).abs() < 1e-9 * q);
            prop_assert!((d.dual().p() - p).abs() < 1e-12);
        }

        #[test]
        fn mask_round_trip(mask in 0u64..(1 << 20)) {
            let w = BondConfiguration::from_mask(mask, 20);
            prop_assert_eq!(w.to_mask(), mask);
            prop_assert_eq!(w.open_count() + w.closed_count(), 20);
            prop_assert_eq!(w.complement().open_count(), w.closed_count());
        }
    }

    #[test]
    fn self_dual_point() {
        for q in [1.0, 1.5, 2.0, 3.0, 4.0, 9.0] {
            let m = ModelParams::critical(q).unwrap();
            assert!((m.dual().p() - m.p()).abs() < 1e-14);
        }
    }
}
