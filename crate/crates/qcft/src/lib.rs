//! Fluctuation theorems for quantum channels.
//!
//! Numerical toolkit for studying the forward/backward symmetry of
//! finite-dimensional CPTP maps: Petz and rotated-Petz recovery channels,
//! complex-valued entropy-production quasi-distributions, detailed-balance
//! and integral fluctuation relations, reverse Lindblad dynamics, and the
//! resource-theoretic bounds (free energy, asymmetry, entanglement) that
//! follow from them.
//!
//! The `examples/` directory holds one runnable program per capability;
//! the `qcft` binary exposes the same experiments as subcommands driven by
//! flat key-value config files.
//!
//! Units: ħ = k_B = 1 throughout; all entropies are in nats.

extern crate blas_src as _;

pub mod bounds;
pub mod channel;
pub mod config;
pub mod error;
pub mod fluctuation;
pub mod lindblad;
pub mod matrix;
pub mod models;
pub mod output;
pub mod petz;
pub mod povm;
pub mod random;
pub mod tol;

pub use channel::KrausChannel;
pub use error::{Error, Result};
pub use fluctuation::{EpDistribution, TpmQuasiProb, TransitionBasis};
pub use lindblad::{LindbladGenerator, Trajectory};
pub use matrix::{CMatrix, CVector, DensityOperator, SpectralDecomposition};
pub use petz::RecoveryFamily;
