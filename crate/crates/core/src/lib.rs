//! Random-cluster model toolkit: lattice graphs, exact enumeration, Markov
//! chain samplers, the loop representation with its parafermionic
//! observable, and monotone couplings.

pub mod couplings;
pub mod error;
pub mod events;
pub mod exact;
pub mod lattice;
pub mod loops;
pub mod mc;
pub mod model;
pub mod unionfind;

pub use error::{Error, Result};
pub use model::{critical_p, BondConfiguration, ModelParams};
