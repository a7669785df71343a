use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertex set with weights `μ_i`, carrying the weighted inner product
/// `⟨f, g⟩ = Σ conj(f_i) g_i μ_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSignalSpace {
    weights: Vec<f64>,
}

impl GraphSignalSpace {
    /// Builds a space of `size` vertices. Missing weights default to one.
    pub fn new(size: usize, weights: Option<Vec<f64>>) -> Result<Arc<Self>> {
        Self::build(size, weights, false)
    }

    /// Unit-weight space.
    pub fn unit(size: usize) -> Arc<Self> {
        Arc::new(GraphSignalSpace { weights: vec![1.0; size] })
    }

    /// Like [`GraphSignalSpace::new`] but admits positive weights below one.
    /// Several bounds in this crate (energy decay in particular) assume
    /// `μ_i >= 1`, so this is off the default path.
    pub fn new_permissive(size: usize, weights: Option<Vec<f64>>) -> Result<Arc<Self>> {
        Self::build(size, weights, true)
    }

    fn build(size: usize, weights: Option<Vec<f64>>, permissive: bool) -> Result<Arc<Self>> {
        if size == 0 {
            return Err(Error::SizeMismatch { expected: 1, found: 0 });
        }
        let weights = match weights {
            None => vec![1.0; size],
            Some(w) => {
                if w.len() != size {
                    return Err(Error::SizeMismatch { expected: size, found: w.len() });
                }
                let floor = if permissive { f64::MIN_POSITIVE } else { 1.0 };
                for (index, &weight) in w.iter().enumerate() {
                    if !(weight >= floor) || !weight.is_finite() {
                        return Err(Error::WeightBelowOne { index, weight });
                    }
                }
                w
            }
        };
        Ok(Arc::new(GraphSignalSpace { weights }))
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `μ_G = Σ μ_i`.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn has_unit_weights(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    pub(crate) fn sqrt_weights(&self) -> DVector<f64> {
        DVector::from_iterator(self.size(), self.weights.iter().map(|w| w.sqrt()))
    }

    /// `diag(μ)^{1/2} M diag(μ)^{-1/2}`: the matrix of `M` in an orthonormal
    /// basis of the weighted space.
    pub(crate) fn to_euclidean(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let s = self.sqrt_weights();
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (s[i] / s[j]))
    }

    pub(crate) fn from_euclidean(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let s = self.sqrt_weights();
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (s[j] / s[i]))
    }

    pub fn zero(self: &Arc<Self>) -> Signal {
        Signal { space: self.clone(), values: DVector::zeros(self.size()) }
    }

    /// The constant vector normalized in the weighted norm.
    pub fn normalized_constant(self: &Arc<Self>) -> Signal {
        let c = 1.0 / self.total_weight().sqrt();
        Signal { space: self.clone(), values: DVector::from_element(self.size(), Complex64::new(c, 0.0)) }
    }

    pub fn basis_vector(self: &Arc<Self>, index: usize) -> Result<Signal> {
        if index >= self.size() {
            return Err(Error::IndexOutOfRange { index, limit: self.size() });
        }
        let mut values = DVector::zeros(self.size());
        values[index] = Complex64::new(1.0, 0.0);
        Ok(Signal { space: self.clone(), values })
    }
}

pub(crate) fn same_space(a: &Arc<GraphSignalSpace>, b: &Arc<GraphSignalSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A node signal `f ∈ ℓ²(G)`.
#[derive(Debug, Clone)]
pub struct Signal {
    space: Arc<GraphSignalSpace>,
    values: DVector<Complex64>,
}

impl Signal {
    pub fn new(space: &Arc<GraphSignalSpace>, values: DVector<Complex64>) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::SizeMismatch { expected: space.size(), found: values.len() });
        }
        Ok(Signal { space: space.clone(), values })
    }

    pub fn from_real(space: &Arc<GraphSignalSpace>, values: &[f64]) -> Result<Self> {
        Self::new(space, DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0))))
    }

    pub fn from_complex(space: &Arc<GraphSignalSpace>, values: &[Complex64]) -> Result<Self> {
        Self::new(space, DVector::from_column_slice(values))
    }

    pub(crate) fn from_parts(space: Arc<GraphSignalSpace>, values: DVector<Complex64>) -> Self {
        debug_assert_eq!(space.size(), values.len());
        Signal { space, values }
    }

    pub fn space(&self) -> &Arc<GraphSignalSpace> {
        &self.space
    }

    pub fn values(&self) -> &DVector<Complex64> {
        &self.values
    }

    pub fn into_values(self) -> DVector<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Weighted inner product, conjugate-linear in `self`.
    pub fn inner(&self, other: &Signal) -> Result<Complex64> {
        if !same_space(&self.space, &other.space) {
            return Err(Error::SpaceMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .zip(self.space.weights())
            .map(|((a, b), &w)| a.conj() * b * w)
            .sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().zip(self.space.weights()).map(|(v, &w)| v.norm_sqr() * w).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Weighted `ℓ^q` norm `(Σ |f_i|^q μ_i)^{1/q}`.
    pub fn lq_norm(&self, q: u32) -> f64 {
        let q = q.max(1);
        let s: f64 = self.values.iter().zip(self.space.weights()).map(|(v, &w)| v.norm().powi(q as i32) * w).sum();
        s.powf(1.0 / q as f64)
    }

    pub fn distance(&self, other: &Signal) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        if !same_space(&self.space, &other.space) {
            return Err(Error::SpaceMismatch);
        }
        Ok(Signal { space: self.space.clone(), values: &self.values - &other.values })
    }

    pub fn scale(&self, c: Complex64) -> Signal {
        Signal { space: self.space.clone(), values: self.values.map(|v| v * c) }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Signal {
        Signal { space: self.space.clone(), values: self.values.map(f) }
    }

    /// Relabels vertices: entry `i` of the result is entry `perm[i]` of `self`.
    /// The space must have weights invariant under the relabeling.
    pub fn permuted(&self, perm: &[usize]) -> Result<Signal> {
        if perm.len() != self.len() {
            return Err(Error::SizeMismatch { expected: self.len(), found: perm.len() });
        }
        let values = DVector::from_iterator(self.len(), perm.iter().map(|&p| self.values[p]));
        Ok(Signal { space: self.space.clone(), values })
    }
}

/// `⟨f, g⟩` in `ℓ²(G)`.
pub fn inner_product(f: &Signal, g: &Signal) -> Result<Complex64> {
    f.inner(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn default_weights_are_one() {
        let s = GraphSignalSpace::new(3, None).unwrap();
        assert_eq!(s.weights(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn weighted_six_vertex_space() {
        let s = GraphSignalSpace::new(6, Some(vec![1., 1., 1., 1., 1., 2.])).unwrap();
        assert_eq!(s.total_weight(), 7.0);
    }

    #[test]
    fn rejects_small_weights() {
        assert!(matches!(
            GraphSignalSpace::new(2, Some(vec![0.5, 1.0])),
            Err(Error::WeightBelowOne { index: 0, .. })
        ));
        assert!(matches!(GraphSignalSpace::new(2, Some(vec![1.0])), Err(Error::SizeMismatch { .. })));
        assert!(GraphSignalSpace::new_permissive(2, Some(vec![0.5, 1.0])).is_ok());
    }

    #[test]
    fn inner_product_examples() {
        let unit = GraphSignalSpace::unit(3);
        let e0 = unit.basis_vector(0).unwrap();
        assert_eq!(inner_product(&e0, &e0).unwrap(), c(1.0, 0.0));

        let w = GraphSignalSpace::new(2, Some(vec![1.0, 2.0])).unwrap();
        let ones = Signal::from_real(&w, &[1.0, 1.0]).unwrap();
        assert_eq!(inner_product(&ones, &ones).unwrap(), c(3.0, 0.0));

        let u2 = GraphSignalSpace::unit(2);
        let f = Signal::from_complex(&u2, &[c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let g = Signal::from_real(&u2, &[0.0, 1.0]).unwrap();
        assert_eq!(inner_product(&f, &g).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first_argument() {
        let u = GraphSignalSpace::unit(2);
        let f = Signal::from_complex(&u, &[c(0.0, 1.0), c(2.0, 0.0)]).unwrap();
        let g = Signal::from_complex(&u, &[c(1.0, 1.0), c(0.0, -1.0)]).unwrap();
        let a = c(0.5, 2.0);
        let lhs = inner_product(&f.scale(a), &g).unwrap();
        let rhs = a.conj() * inner_product(&f, &g).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn space_mismatch_is_reported() {
        let a = Signal::from_real(&GraphSignalSpace::unit(2), &[1.0, 0.0]).unwrap();
        let b = Signal::from_real(&GraphSignalSpace::unit(3), &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(inner_product(&a, &b), Err(Error::SpaceMismatch));
    }
}
