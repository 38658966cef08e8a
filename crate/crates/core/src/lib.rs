//! Finite-dimensional PT-symmetry analysis.
//!
//! A PT-symmetric Hamiltonian `H` is always pseudo-Hermitian: there is a
//! nonsingular Hermitian metric `G` with `A*G + GA = 0` for `A = -iH`. This
//! crate builds such a metric from the Jordan structure of `A`, classifies
//! eigenmodes by their Krein action `ψ*Gψ`, and locates PT-symmetry breaking
//! along parameter paths as collisions of positive- and negative-action modes.

mod dense;
pub mod error;
pub mod family;
pub mod jordan;
pub mod krein;
pub mod matrix;
pub mod metric;
pub mod sweep;
pub mod symmetry;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, Tolerances, C64};
