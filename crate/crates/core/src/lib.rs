//! Quantum optimal transport between density matrices.
//!
//! The crate computes fidelities, information quantities and several
//! quantum Wasserstein distances. Closed forms are used where they exist;
//! everything else is a semidefinite program over couplings with fixed
//! marginals, optionally restricted to the PPT cone as a computable stand-in
//! for separable couplings.
//!
//! Modules, bottom-up:
//! - [`linalg`]: Hermitian matrices, Jacobi eigensolver, tensor structure.
//! - [`states`]: density matrices, sampling, dynamics, moments.
//! - [`sdp`]: coupling programs and the operator-splitting conic solver.
//! - [`metrics`]: every scalar quantity, with bound-kind bookkeeping.

pub mod linalg;
pub mod metrics;
pub mod sdp;
pub mod states;
