use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::FilterKernel;
use crate::tolerance;

const MAX_NODES: usize = 1 << 22;

/// Result of the contour quadrature behind [`cg_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourConstant {
    pub value: f64,
    /// Radius `K + 1` of the integration circle.
    pub radius: f64,
    pub nodes: usize,
    /// Relative change under the last doubling.
    pub change: f64,
    pub converged: bool,
}

/// `∮_{|z| = r} |g(z)| |dz|` by the `n`-point trapezoid rule.
fn circle_integral(k: &FilterKernel, radius: f64, n: usize) -> f64 {
    let step = 2.0 * PI / n as f64;
    let sum: f64 = (0..n).map(|j| k.evaluate(Complex64::from_polar(radius, j as f64 * step)).norm()).sum();
    sum * radius * step
}

/// `C_g = 2(K+1)²/π ∮_{S_{K+1}} |g(z)| |dz|`, doubling the node count until
/// the relative change drops below the quadrature tolerance.
///
/// The bound it enters assumes `K ≥ |ω|`; a smaller `K` is raised to `|ω|`.
pub fn cg_quadrature(k: &FilterKernel, k_bound: f64, omega: Complex64) -> Result<ContourConstant> {
    if !k.is_holomorphic() {
        return Err(Error::NotHolomorphic);
    }
    if !(k_bound >= 0.0) {
        return Err(Error::Config(format!("operator norm bound must be non-negative, got {k_bound}")));
    }
    let radius = k_bound.max(omega.norm()) + 1.0;
    let prefactor = 2.0 * radius * radius / PI;
    let mut nodes = tolerance::QUADRATURE_NODES;
    let mut previous = circle_integral(k, radius, nodes);
    loop {
        let next_nodes = nodes * 2;
        let current = circle_integral(k, radius, next_nodes);
        let change = if current == previous { 0.0 } else { (current - previous).abs() / current.abs().max(f64::MIN_POSITIVE) };
        let converged = change <= tolerance::QUADRATURE;
        if converged || !current.is_finite() || next_nodes >= MAX_NODES {
            return Ok(ContourConstant { value: prefactor * current, radius, nodes: next_nodes, change, converged });
        }
        nodes = next_nodes;
        previous = current;
    }
}

pub fn cg_constant(k: &FilterKernel, k_bound: f64, omega: Complex64) -> Result<f64> {
    Ok(cg_quadrature(k, k_bound, omega)?.value)
}
