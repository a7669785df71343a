//! Numerical tolerances shared across the crate.

/// Relative normality defect `‖ΔΔ* − Δ*Δ‖_F / ‖Δ‖_F²` accepted for a shift operator.
pub const NORMALITY: f64 = 1e-10;

/// Absolute tolerance on eigen-decomposition invariants for unit-scale matrices.
pub const EIGEN: f64 = 1e-8;

/// An eigenvalue counts as zero when `|λ| <= ZERO_EIGENVALUE * max |λ|`.
pub const ZERO_EIGENVALUE: f64 = 1e-9;

/// Minimal distance between a resolvent point and either spectrum.
pub const RESOLVENT_MARGIN: f64 = 0.1;

/// Relative convergence target of the contour quadrature.
pub const QUADRATURE: f64 = 1e-6;

/// Initial number of contour quadrature nodes.
pub const QUADRATURE_NODES: usize = 512;

/// A frame counts as tight when `B − A` is at most this.
pub const FRAME: f64 = 1e-9;

/// Relative slack when comparing an empirical quantity with a bound.
pub const BOUND_SLACK: f64 = 1e-8;
