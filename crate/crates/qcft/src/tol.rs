//! Numerical tolerances used across the crate.
//!
//! Grouped by origin: exact f64 arithmetic, accumulated linear algebra, and
//! model-level residuals (integrators, truncations).

/// Hermiticity check on constructed operators (exact arithmetic class).
pub const HERM_TOL: f64 = 1e-10;

/// Hermiticity required of inputs to the eigensolver (looser: inputs may
/// carry accumulated rounding from channel applications).
pub const HERM_INPUT_TOL: f64 = 1e-8;

/// Relative threshold below which an eigenvalue counts as zero; defines the
/// support of a positive-semidefinite operator.
pub const RANK_TOL_REL: f64 = 1e-12;

/// Eigenvalues of a density operator in (-EIG_CLAMP, 0) are clamped to 0;
/// anything more negative is rejected as genuinely invalid.
pub const EIG_CLAMP: f64 = 1e-10;

/// Unit-trace check on density operators.
pub const TRACE_TOL: f64 = 1e-10;

/// CPTP validation at channel construction (trace preservation and Choi
/// positivity).
pub const CPTP_TOL: f64 = 1e-8;

/// Spectral reconstruction quality required of the eigensolver.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// Entropy-production atoms merge when both components agree within this.
pub const ATOM_BIN_TOL: f64 = 1e-9;

/// Atoms with |weight| below this are excluded from ratio checks.
pub const ATOM_WEIGHT_FLOOR: f64 = 1e-12;

/// Support-overlap defect allowed when checking supp(rho) within supp(gamma).
pub const SUPPORT_TOL: f64 = 1e-9;

/// Positivity floor for states produced by fixed-step integration.
pub const INTEGRATOR_EIG_FLOOR: f64 = 1e-6;

/// Per-step trace drift allowed before renormalization in the integrator.
pub const INTEGRATOR_TRACE_DRIFT: f64 = 1e-8;

/// CPTP tolerance for channels assembled from integrated dynamics.
pub const INTEGRATED_CPTP_TOL: f64 = 1e-6;

/// Residual below which a reference state counts as a fixed point of a
/// channel when the family is pinned to it.
pub const FIXED_POINT_TOL: f64 = 1e-5;

/// Default rotation-averaging quadrature: cutoff and node count for the
/// cosh-weighted mixture of rotated recovery maps.
pub const THETA_CUTOFF_DEFAULT: f64 = 12.0;
pub const THETA_NODES_DEFAULT: usize = 241;
