//! Numerical toolkit for completely positive maps, KMS-symmetric quantum
//! Markov semigroups and noncommutative Dirichlet forms on finite-dimensional
//! von Neumann algebras, together with the spectral model for the free
//! orthogonal quantum groups.
//!
//! Everything operates on the standard form of (M_n, φ): the Hilbert space of
//! n×n matrices with cyclic vector ρ^{1/2}, symmetric embedding
//! x ↦ ρ^{1/4} x ρ^{1/4}, and the natural positive cone
//! {ρ^{1/4} m ρ^{1/4} : m ⪰ 0}.

pub mod cone;
pub mod cpmap;
pub mod dirichlet;
pub mod error;
pub mod linalg;
pub mod markovize;
pub mod matrix;
pub mod onplus;
pub mod report;
pub mod sampling;
pub mod semigroup;
pub mod state;
pub mod suites;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, C64};
pub use state::{QuantumState, StandardForm, StdVector};
