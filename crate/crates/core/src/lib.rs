//! # scarflow
//!
//! Exact simulation of quenches in the kinetically constrained PXP spin chain
//! (and its PXPZ / PXPXP deformations) together with the diagnostics used to
//! quantify information backflow into small subsystems.
//!
//! The pipeline is:
//!
//! 1. [`hilbert`]: enumerate the Rydberg-blockaded basis (no two adjacent up spins).
//! 2. [`hamiltonian`]: assemble the sparse Hamiltonian on that basis.
//! 3. [`evolve`]: propagate the Néel state with a Lanczos/Krylov exponential.
//! 4. [`rdm`]: extract reduced density matrices of selected sites at each snapshot.
//! 5. [`metrics`]: trace distance, backflow slope and degree, total variation
//!    distance, fidelity, entropy and negativity.
//! 6. [`quench`]: run manifests, snapshot storage, CSV/JSON output and model comparison.
//!
//! Site indices are 1-based throughout; site 1 is the most significant bit of a
//! configuration, and bit value 1 means spin up.

#![forbid(unsafe_code)]

pub mod error;
pub mod evolve;
pub mod hamiltonian;
pub mod hilbert;
pub mod linalg;
pub mod metrics;
pub mod quench;
pub mod rdm;

pub use error::{Error, Result};
pub use evolve::{run_quench, step, EvolutionConfig, Propagator, Trajectory};
pub use hamiltonian::{build_pxp, build_pxpxp, build_pxpz, Family, Model, ModelSpec, SparseHamiltonian};
pub use hilbert::{BlockadeBasis, SpinConfig, StateVector};
pub use rdm::{partial_trace, PartialTracePlan, ReducedDensityMatrix, SubsystemPattern, SubsystemSpec};

/// Complex amplitude type used everywhere.
pub type C64 = num_complex::Complex64;
