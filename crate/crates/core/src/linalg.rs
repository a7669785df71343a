//! Small dense helpers for operators between weighted spaces.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::graph::GraphSignalSpace;

pub(crate) fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

pub(crate) fn smallest_singular_value(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    sv.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Matrix of `m : ℓ²(source) → ℓ²(target)` in orthonormal coordinates,
/// `diag(μ̃)^{1/2} m diag(μ)^{-1/2}`.
pub fn euclidean_form(m: &DMatrix<Complex64>, source: &GraphSignalSpace, target: &GraphSignalSpace) -> DMatrix<Complex64> {
    let s = source.sqrt_weights();
    let t = target.sqrt_weights();
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (t[i] / s[j]))
}

/// Operator norm of `m : ℓ²(source) → ℓ²(target)`.
pub fn weighted_operator_norm(m: &DMatrix<Complex64>, source: &GraphSignalSpace, target: &GraphSignalSpace) -> f64 {
    spectral_norm(&euclidean_form(m, source, target))
}

/// Adjoint of `m : ℓ²(source) → ℓ²(target)` with respect to the weighted
/// inner products: `diag(μ)^{-1} m^H diag(μ̃)`.
pub fn weighted_adjoint(m: &DMatrix<Complex64>, source: &GraphSignalSpace, target: &GraphSignalSpace) -> DMatrix<Complex64> {
    let mu = source.weights();
    let nu = target.weights();
    DMatrix::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].conj() * (nu[j] / mu[i]))
}

pub(crate) fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Haar-ish random unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `U diag(λ) U^H` for a random unitary `U`.
pub fn random_normal_matrix<R: Rng + ?Sized>(eigenvalues: &[Complex64], rng: &mut R) -> DMatrix<Complex64> {
    let n = eigenvalues.len();
    let u = random_unitary(n, rng);
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(eigenvalues));
    &u * d * u.adjoint()
}
