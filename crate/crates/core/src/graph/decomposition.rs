use std::cmp::Ordering;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::GraphSignalSpace;
use crate::error::{Error, Result};
use crate::linalg::frobenius;
use crate::tolerance;

/// Eigenpairs `(λ_i, φ_i)` of a normal operator, with the `φ_i` orthonormal
/// in the weighted inner product.
///
/// Eigenvalues are sorted ascending by real part, then imaginary part. Each
/// eigenvector is rotated so that its first non-negligible entry is real and
/// positive. Inside a degenerate eigenspace no particular basis is promised.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    space: Arc<GraphSignalSpace>,
    eigenvalues: DVector<Complex64>,
    eigenvectors: DMatrix<Complex64>,
}

impl SpectralDecomposition {
    /// Diagonalizes `matrix`, an operator on `space`.
    ///
    /// Self-adjoint operators go through a Hermitian eigensolver after the
    /// similarity transform to orthonormal coordinates; other normal operators
    /// go through a complex Schur factorization whose triangular factor must
    /// come out diagonal.
    pub(crate) fn compute(space: &Arc<GraphSignalSpace>, matrix: &DMatrix<Complex64>, self_adjoint: bool) -> Result<Self> {
        let n = space.size();
        let s = space.to_euclidean(matrix);
        let scale = frobenius(&s).max(1.0);
        let (values, vectors) = if self_adjoint {
            let h = (&s + s.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = SymmetricEigen::try_new(h, 1e-15, 0).ok_or(Error::EigenSolverFailed)?;
            (eig.eigenvalues.map(|v| Complex64::new(v, 0.0)), eig.eigenvectors)
        } else {
            let schur = nalgebra::linalg::Schur::try_new(s.clone(), 1e-15, 0).ok_or(Error::EigenSolverFailed)?;
            let (q, t) = schur.unpack();
            let mut off = 0.0;
            for j in 0..n {
                for i in 0..j {
                    off += t[(i, j)].norm_sqr();
                }
            }
            let off = off.sqrt();
            if off > tolerance::EIGEN * scale {
                return Err(Error::NotNormal { defect: off / scale });
            }
            (t.diagonal(), q)
        };

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| cmp_complex(values[a], values[b]));

        let sqrt_w = space.sqrt_weights();
        let mut eigenvalues = DVector::zeros(n);
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (k, &src) in order.iter().enumerate() {
            eigenvalues[k] = values[src];
            let mut col: DVector<Complex64> = vectors.column(src).into_owned();
            for i in 0..n {
                col[i] /= sqrt_w[i];
            }
            fix_phase(&mut col);
            eigenvectors.set_column(k, &col);
        }
        Ok(SpectralDecomposition { space: space.clone(), eigenvalues, eigenvectors })
    }

    pub(crate) fn scaled(&self, factor: f64) -> Self {
        SpectralDecomposition {
            space: self.space.clone(),
            eigenvalues: self.eigenvalues.map(|v| v * factor),
            eigenvectors: self.eigenvectors.clone(),
        }
    }

    pub fn space(&self) -> &Arc<GraphSignalSpace> {
        &self.space
    }

    pub fn eigenvalues(&self) -> &DVector<Complex64> {
        &self.eigenvalues
    }

    /// Eigenvectors as columns.
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Absolute threshold below which an eigenvalue is treated as zero.
    pub fn zero_threshold(&self) -> f64 {
        tolerance::ZERO_EIGENVALUE * self.spectral_radius()
    }

    pub fn is_zero_eigenvalue(&self, lambda: Complex64) -> bool {
        lambda.norm() <= self.zero_threshold()
    }

    /// Eigenvalues with numerically-zero entries replaced by exact zeros.
    pub fn snapped_eigenvalues(&self) -> Vec<Complex64> {
        let thr = self.zero_threshold();
        self.eigenvalues.iter().map(|&v| if v.norm() <= thr { Complex64::new(0.0, 0.0) } else { v }).collect()
    }

    /// `Φ diag(values) Φ†` where `Φ†` is the weighted adjoint.
    pub fn synthesize(&self, values: &[Complex64]) -> DMatrix<Complex64> {
        let n = self.len();
        let w = self.space.weights();
        let mut scaled = self.eigenvectors.clone();
        for (k, v) in values.iter().enumerate() {
            let mut col = scaled.column_mut(k);
            col *= *v;
        }
        let mut adj = self.eigenvectors.adjoint();
        for j in 0..n {
            let mut col = adj.column_mut(j);
            col *= Complex64::new(w[j], 0.0);
        }
        scaled * adj
    }

    /// Matrix of `g(Δ)` for an arbitrary scalar function, applied to the
    /// snapped eigenvalues.
    pub fn function_matrix(&self, g: impl Fn(Complex64) -> Complex64) -> DMatrix<Complex64> {
        let values: Vec<Complex64> = self.snapped_eigenvalues().into_iter().map(g).collect();
        self.synthesize(&values)
    }

    /// Orthogonal projector onto the eigenspace of the numerically-zero eigenvalues.
    pub fn kernel_projector(&self) -> DMatrix<Complex64> {
        let values: Vec<Complex64> = self
            .snapped_eigenvalues()
            .into_iter()
            .map(|v| if v == Complex64::new(0.0, 0.0) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
            .collect();
        self.synthesize(&values)
    }

    /// `‖Δ − Φ diag(λ) Φ†‖_F` in the weighted Frobenius norm.
    pub fn reconstruction_defect(&self, matrix: &DMatrix<Complex64>) -> f64 {
        let rebuilt = self.synthesize(self.eigenvalues.as_slice());
        frobenius(&self.space.to_euclidean(&(matrix - rebuilt)))
    }

    /// `‖Φ†Φ − I‖_F`.
    pub fn gram_defect(&self) -> f64 {
        let n = self.len();
        let w = self.space.weights();
        let mut weighted = self.eigenvectors.clone();
        for i in 0..n {
            let mut row = weighted.row_mut(i);
            row *= Complex64::new(w[i], 0.0);
        }
        let gram = self.eigenvectors.adjoint() * weighted;
        frobenius(&(gram - DMatrix::identity(n, n)))
    }
}

fn cmp_complex(a: Complex64, b: Complex64) -> Ordering {
    a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal).then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

fn fix_phase(col: &mut DVector<Complex64>) {
    let max = col.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    if let Some(first) = col.iter().find(|v| v.norm() > 1e-8 * max).copied() {
        let phase = first.conj() / first.norm();
        for v in col.iter_mut() {
            *v *= phase;
        }
    }
}
