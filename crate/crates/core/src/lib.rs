//! Simulation and optimization of discrete tilt-pulse control sequences for
//! interacting bosons in two- and three-well systems.
//!
//! The library builds Bose-Hubbard Hamiltonians with per-well energy tilts,
//! propagates piecewise-constant pulse sequences exactly, constructs analytic
//! strong-interaction sequences from couplings at avoided level crossings
//! (CALC), and refines them with a seeded Nelder-Mead simplex search against
//! multi-state fidelity objectives. A finite-difference solver for the
//! double-tweezer potential validates the underlying two-mode approximation.
//!
//! Units: `hbar = 1`, `J = 1`. Times are in units of `1/J`, energies in units
//! of `J`, and the interaction strength enters as the ratio `u = U/J`. The
//! tweezer module is the exception and works in SI lengths with energies in
//! Hz.

pub mod calc;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod io;
pub mod optimizer;
pub mod propagator;
pub mod tasks;
pub mod tweezer;

pub use error::{Error, Result};
pub use fock::{FockBasis, ManyBodyState};
pub use hamiltonian::ModelParams;
pub use propagator::{Pulse, PulseSequence, Provenance};
