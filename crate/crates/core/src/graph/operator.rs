use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{same_space, GraphSignalSpace, Signal, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{frobenius, to_complex, weighted_operator_norm};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Adjacency,
    Degree,
    Laplacian,
    NormalizedLaplacian,
    RescaledLaplacian,
    Custom,
}

/// A normal operator `Δ` on a weighted signal space, with a lazily computed
/// and cached spectral decomposition.
#[derive(Debug)]
pub struct ShiftOperator {
    space: Arc<GraphSignalSpace>,
    matrix: DMatrix<Complex64>,
    kind: OperatorKind,
    self_adjoint: bool,
    decomposition: OnceLock<SpectralDecomposition>,
}

impl Clone for ShiftOperator {
    fn clone(&self) -> Self {
        let decomposition = OnceLock::new();
        if let Some(d) = self.decomposition.get() {
            let _ = decomposition.set(d.clone());
        }
        ShiftOperator {
            space: self.space.clone(),
            matrix: self.matrix.clone(),
            kind: self.kind,
            self_adjoint: self.self_adjoint,
            decomposition,
        }
    }
}

impl ShiftOperator {
    /// Validates normality with respect to the weighted inner product.
    pub fn new(space: &Arc<GraphSignalSpace>, matrix: DMatrix<Complex64>, kind: OperatorKind) -> Result<Self> {
        let n = space.size();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::SizeMismatch { expected: n, found: matrix.nrows().max(matrix.ncols()) });
        }
        let s = space.to_euclidean(&matrix);
        let norm = frobenius(&s);
        let defect = if norm == 0.0 { 0.0 } else { frobenius(&(&s * s.adjoint() - s.adjoint() * &s)) / (norm * norm) };
        if !(defect <= tolerance::NORMALITY) {
            return Err(Error::NotNormal { defect });
        }
        let asym = frobenius(&(&s - s.adjoint()));
        let self_adjoint = asym <= 1e-12 * norm.max(f64::MIN_POSITIVE);
        let op = ShiftOperator { space: space.clone(), matrix, kind, self_adjoint, decomposition: OnceLock::new() };
        if kind == OperatorKind::RescaledLaplacian {
            op.check_unit_interval()?;
        }
        Ok(op)
    }

    pub fn from_real(space: &Arc<GraphSignalSpace>, matrix: &DMatrix<f64>, kind: OperatorKind) -> Result<Self> {
        Self::new(space, to_complex(matrix), kind)
    }

    pub fn custom(space: &Arc<GraphSignalSpace>, matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::new(space, matrix, OperatorKind::Custom)
    }

    fn check_unit_interval(&self) -> Result<()> {
        let d = self.decompose()?;
        for v in d.eigenvalues().iter() {
            if v.re < -tolerance::EIGEN || v.re > 1.0 + tolerance::EIGEN || v.im.abs() > tolerance::EIGEN {
                return Err(Error::SpectrumOutOfRange(v.re));
            }
        }
        Ok(())
    }

    pub fn space(&self) -> &Arc<GraphSignalSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    pub fn size(&self) -> usize {
        self.space.size()
    }

    /// Computes the spectral decomposition once; later calls return the cache.
    pub fn decompose(&self) -> Result<&SpectralDecomposition> {
        if let Some(d) = self.decomposition.get() {
            return Ok(d);
        }
        let d = SpectralDecomposition::compute(&self.space, &self.matrix, self.self_adjoint)?;
        let _ = self.decomposition.set(d);
        Ok(self.decomposition.get().expect("decomposition was just set"))
    }

    pub fn is_decomposed(&self) -> bool {
        self.decomposition.get().is_some()
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        if !same_space(&self.space, f.space()) {
            return Err(Error::SpaceMismatch);
        }
        Ok(Signal::from_parts(self.space.clone(), &self.matrix * f.values()))
    }

    pub fn operator_norm(&self) -> f64 {
        weighted_operator_norm(&self.matrix, &self.space, &self.space)
    }

    /// `‖Δ‖_F` with respect to the weighted inner product.
    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.space.to_euclidean(&self.matrix))
    }

    /// Resolvent `(Δ − ω)^{-1}` via the spectral decomposition.
    pub fn resolvent(&self, omega: Complex64) -> Result<DMatrix<Complex64>> {
        let d = self.decompose()?;
        let distance = d.eigenvalues().iter().map(|l| (l - omega).norm()).fold(f64::INFINITY, f64::min);
        if distance == 0.0 {
            return Err(Error::OmegaInSpectrum { distance, margin: 0.0 });
        }
        let values: Vec<Complex64> = d.eigenvalues().iter().map(|l| Complex64::new(1.0, 0.0) / (l - omega)).collect();
        Ok(d.synthesize(&values))
    }

    /// `|Δ|`.
    pub fn absolute(&self) -> Result<DMatrix<Complex64>> {
        let d = self.decompose()?;
        let values: Vec<Complex64> = d.eigenvalues().iter().map(|l| Complex64::new(l.norm(), 0.0)).collect();
        Ok(d.synthesize(&values))
    }

    pub fn distance_to_spectrum(&self, omega: Complex64) -> Result<f64> {
        let d = self.decompose()?;
        Ok(d.eigenvalues().iter().map(|l| (l - omega).norm()).fold(f64::INFINITY, f64::min))
    }

    fn with_cached(self, d: SpectralDecomposition) -> Self {
        let _ = self.decomposition.set(d);
        self
    }
}

/// `‖a − b‖_F` using the weighted adjoint.
pub fn frobenius_distance(a: &ShiftOperator, b: &ShiftOperator) -> Result<f64> {
    if !same_space(a.space(), b.space()) {
        return Err(Error::SpaceMismatch);
    }
    Ok(frobenius(&a.space().to_euclidean(&(a.matrix() - b.matrix()))))
}

/// Checks that `adjacency` is a valid undirected weighted adjacency matrix on `space`.
pub fn validate_adjacency(adjacency: &DMatrix<f64>, space: &GraphSignalSpace) -> Result<()> {
    let n = space.size();
    if adjacency.nrows() != n || adjacency.ncols() != n {
        return Err(Error::SizeMismatch { expected: n, found: adjacency.nrows().max(adjacency.ncols()) });
    }
    for i in 0..n {
        if adjacency[(i, i)] != 0.0 {
            return Err(Error::NonZeroDiagonal(i));
        }
        for j in 0..n {
            let a = adjacency[(i, j)];
            if !a.is_finite() || a < 0.0 {
                return Err(Error::NegativeWeight(i, j));
            }
            let b = adjacency[(j, i)];
            if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::AsymmetricAdjacency(i, j));
            }
        }
    }
    Ok(())
}

fn degrees(adjacency: &DMatrix<f64>) -> Vec<f64> {
    adjacency.row_iter().map(|r| r.sum()).collect()
}

/// Graph Laplacian on a weighted space.
///
/// The unnormalized variant is `(Δf)_i = (1/μ_i) Σ_j W_ij (f_i − f_j)`, which
/// is `D − W` at unit weights. The normalized variant `𝟙 − D^{-1/2} W D^{-1/2}`
/// is only defined for unit weights.
pub fn laplacian(adjacency: &DMatrix<f64>, space: &Arc<GraphSignalSpace>, normalized: bool) -> Result<ShiftOperator> {
    validate_adjacency(adjacency, space)?;
    let n = space.size();
    let deg = degrees(adjacency);
    if normalized {
        if !space.has_unit_weights() {
            return Err(Error::NormalizedNeedsUnitWeights);
        }
        if let Some(i) = deg.iter().position(|&d| d <= 0.0) {
            return Err(Error::IsolatedVertexInNormalized(i));
        }
        let m = DMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - adjacency[(i, j)] / (deg[i] * deg[j]).sqrt()
        });
        return ShiftOperator::from_real(space, &m, OperatorKind::NormalizedLaplacian);
    }
    let w = space.weights();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let v = if i == j { deg[i] - adjacency[(i, i)] } else { -adjacency[(i, j)] };
        v / w[i]
    });
    ShiftOperator::from_real(space, &m, OperatorKind::Laplacian)
}

/// Unnormalized Laplacian divided by its largest eigenvalue; spectrum in `[0, 1]`.
pub fn rescaled_laplacian(adjacency: &DMatrix<f64>, space: &Arc<GraphSignalSpace>) -> Result<ShiftOperator> {
    let lap = laplacian(adjacency, space, false)?;
    let d = lap.decompose()?;
    let lambda_max = d.eigenvalues().iter().map(|v| v.re).fold(0.0, f64::max);
    if lambda_max <= tolerance::EIGEN {
        return Err(Error::DegenerateGraph);
    }
    let scaled = d.scaled(1.0 / lambda_max);
    let matrix = lap.matrix() / Complex64::new(lambda_max, 0.0);
    let op = ShiftOperator {
        space: space.clone(),
        matrix,
        kind: OperatorKind::RescaledLaplacian,
        self_adjoint: lap.self_adjoint,
        decomposition: OnceLock::new(),
    }
    .with_cached(scaled);
    op.check_unit_interval()?;
    Ok(op)
}

/// Weighted adjacency operator `(Wf)_i = (1/μ_i) Σ_j W_ij f_j`.
pub fn adjacency_operator(adjacency: &DMatrix<f64>, space: &Arc<GraphSignalSpace>) -> Result<ShiftOperator> {
    validate_adjacency(adjacency, space)?;
    let w = space.weights();
    let m = DMatrix::from_fn(space.size(), space.size(), |i, j| adjacency[(i, j)] / w[i]);
    ShiftOperator::from_real(space, &m, OperatorKind::Adjacency)
}

/// Degree operator `(Df)_i = (1/μ_i) deg(i) f_i`.
pub fn degree_operator(adjacency: &DMatrix<f64>, space: &Arc<GraphSignalSpace>) -> Result<ShiftOperator> {
    validate_adjacency(adjacency, space)?;
    let w = space.weights();
    let deg = degrees(adjacency);
    let m = DMatrix::from_fn(space.size(), space.size(), |i, j| if i == j { deg[i] / w[i] } else { 0.0 });
    ShiftOperator::from_real(space, &m, OperatorKind::Degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_normal_matrix, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path2() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn k3() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[0., 1., 1., 1., 0., 1., 1., 1., 0.])
    }

    fn re(v: &[Complex64]) -> Vec<f64> {
        v.iter().map(|c| c.re).collect()
    }

    #[test]
    fn path_two_laplacian() {
        let l = laplacian(&path2(), &GraphSignalSpace::unit(2), false).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(l.matrix().map(|c| c.re), expect);
        assert!(l.is_self_adjoint());
    }

    #[test]
    fn k3_spectrum() {
        let l = laplacian(&k3(), &GraphSignalSpace::unit(3), false).unwrap();
        let ev = re(l.decompose().unwrap().eigenvalues().as_slice());
        for (a, b) in ev.iter().zip([0.0, 3.0, 3.0]) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
        let r = rescaled_laplacian(&k3(), &GraphSignalSpace::unit(3)).unwrap();
        let ev = re(r.decompose().unwrap().eigenvalues().as_slice());
        for (a, b) in ev.iter().zip([0.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn weighted_laplacian_halves_heavy_row() {
        let mut w = DMatrix::zeros(6, 6);
        for &(a, b) in &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (3, 5), (4, 5)] {
            w[(a, b)] = 1.0;
            w[(b, a)] = 1.0;
        }
        let unit = laplacian(&w, &GraphSignalSpace::unit(6), false).unwrap();
        let space = GraphSignalSpace::new(6, Some(vec![1., 1., 1., 1., 1., 2.])).unwrap();
        let weighted = laplacian(&w, &space, false).unwrap();
        for j in 0..6 {
            assert!((weighted.matrix()[(5, j)] - unit.matrix()[(5, j)] * 0.5).norm() < 1e-15);
            assert_eq!(weighted.matrix()[(0, j)], unit.matrix()[(0, j)]);
        }
        // self-adjoint in the weighted inner product, not as a plain matrix
        assert!(weighted.is_self_adjoint());
        let d = weighted.decompose().unwrap();
        assert!(d.gram_defect() < 1e-10);
        assert!(d.reconstruction_defect(weighted.matrix()) < 1e-10);
    }

    #[test]
    fn laplacian_input_errors() {
        let u2 = GraphSignalSpace::unit(2);
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(matches!(laplacian(&asym, &u2, false), Err(Error::AsymmetricAdjacency(..))));
        let neg = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!(matches!(laplacian(&neg, &u2, false), Err(Error::NegativeWeight(..))));
        let w = GraphSignalSpace::new(2, Some(vec![1.0, 2.0])).unwrap();
        assert_eq!(laplacian(&path2(), &w, true).unwrap_err(), Error::NormalizedNeedsUnitWeights);
        let iso = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 0., 0., 0., 0.]);
        assert_eq!(laplacian(&iso, &GraphSignalSpace::unit(3), true).unwrap_err(), Error::IsolatedVertexInNormalized(2));
    }

    #[test]
    fn normalized_laplacian_spectrum_in_0_2() {
        let l = laplacian(&k3(), &GraphSignalSpace::unit(3), true).unwrap();
        let ev = re(l.decompose().unwrap().eigenvalues().as_slice());
        assert!((ev[0]).abs() < 1e-12 && (ev[2] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rescaled_examples() {
        let p2 = rescaled_laplacian(&path2(), &GraphSignalSpace::unit(2)).unwrap();
        let d = p2.decompose().unwrap();
        assert!((d.eigenvalues()[0].norm()) < 1e-12 && (d.eigenvalues()[1].re - 1.0).abs() < 1e-12);
        let phi0 = d.eigenvectors().column(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((phi0[0].re - s).abs() < 1e-12 && (phi0[1].re - s).abs() < 1e-12);

        let empty = DMatrix::zeros(3, 3);
        assert_eq!(rescaled_laplacian(&empty, &GraphSignalSpace::unit(3)).unwrap_err(), Error::DegenerateGraph);
    }

    #[test]
    fn rotation_is_normal_with_imaginary_spectrum() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let op = ShiftOperator::from_real(&GraphSignalSpace::unit(2), &m, OperatorKind::Custom).unwrap();
        assert!(!op.is_self_adjoint());
        let d = op.decompose().unwrap();
        assert!((d.eigenvalues()[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((d.eigenvalues()[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!(d.reconstruction_defect(op.matrix()) < tolerance::EIGEN);
        assert!(d.gram_defect() < tolerance::EIGEN);
    }

    #[test]
    fn non_normal_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            ShiftOperator::from_real(&GraphSignalSpace::unit(2), &m, OperatorKind::Custom),
            Err(Error::NotNormal { .. })
        ));
    }

    #[test]
    fn identity_decomposes() {
        let op = ShiftOperator::custom(&GraphSignalSpace::unit(4), DMatrix::identity(4, 4)).unwrap();
        let d = op.decompose().unwrap();
        assert!(d.eigenvalues().iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-14));
        assert!(d.gram_defect() < 1e-12);
    }

    #[test]
    fn frobenius_distance_examples() {
        let u2 = GraphSignalSpace::unit(2);
        let id = ShiftOperator::custom(&u2, DMatrix::identity(2, 2)).unwrap();
        let zero = ShiftOperator::custom(&u2, DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(frobenius_distance(&id, &id).unwrap(), 0.0);
        assert!((frobenius_distance(&id, &zero).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let a = ShiftOperator::from_real(&u2, &DMatrix::from_row_slice(2, 2, &[1., 0., 0., 2.]), OperatorKind::Custom).unwrap();
        let b = ShiftOperator::from_real(&u2, &DMatrix::from_row_slice(2, 2, &[1., 0., 0., 0.]), OperatorKind::Custom).unwrap();
        assert!((frobenius_distance(&a, &b).unwrap() - 2.0).abs() < 1e-15);
        let other = ShiftOperator::custom(&GraphSignalSpace::unit(3), DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(frobenius_distance(&a, &other).unwrap_err(), Error::SpaceMismatch);
    }

    #[test]
    fn random_normal_operators_decompose() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [3usize, 7, 12] {
            let eig: Vec<Complex64> = (0..n).map(|k| Complex64::new((k % 3) as f64 - 1.0, (k % 2) as f64)).collect();
            let m = random_normal_matrix(&eig, &mut rng);
            let op = ShiftOperator::custom(&GraphSignalSpace::unit(n), m).unwrap();
            let d = op.decompose().unwrap();
            assert!(d.reconstruction_defect(op.matrix()) < tolerance::EIGEN);
            assert!(d.gram_defect() < tolerance::EIGEN);
        }
        let _ = random_unitary(3, &mut rng);
    }
}
