//! Irregular GKZ hypergeometric integrals: exact lattice data, cycles,
//! quadrature, Gevrey expansions, meromorphic continuation and rapid-decay
//! cycle identities.

pub mod cycles;
pub mod error;
pub mod exact_lattice;
pub mod geometry;
pub mod numerics;
pub mod rational;
pub mod solver;

pub use error::{Error, Result};
