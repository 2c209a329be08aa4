//! Hamiltonian Fourier features for learning `y = Tr[f(H) rho]` on random
//! one-dimensional Heisenberg chains.
//!
//! The crate is organised bottom-up:
//!
//! * [`hamiltonians`] builds coupling specs, the matrix-free Hamiltonian action
//!   and magnetization-sector eigensystems.
//! * [`states`] constructs basis, domain-wall and reference superposition states.
//! * [`evolution`] propagates states exactly (spectral) or with a second-order
//!   product formula.
//! * [`features`] computes the Fourier feature vector with an exact backend and
//!   two shot-noise backends.
//! * [`labels`] evaluates targets `Tr[f(H) rho]` for a family of functions.
//! * [`regression`] fits OLS, ridge and norm-constrained linear models.
//! * [`bounds`] evaluates generalization and shot-count bounds.
//! * [`pipeline`] wires everything into file-based CLI stages.
//!
//! Bit convention: qubit 0 is the most significant bit of a basis index.

pub mod bounds;
pub mod error;
pub mod evolution;
pub mod features;
pub mod hamiltonians;
pub mod labels;
pub mod pipeline;
pub mod regression;
pub mod rng;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64;
