use nalgebra::DMatrix;
use num_complex::Complex64;

/// Linear connecting operator `P_n : ℓ²(G_{n−1}) → ℓ²(G_n)`.
///
/// The matrix acts on vertex indices; for edge signals it acts by left
/// multiplication.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ConnectingOperator {
    #[default]
    Identity,
    Matrix(DMatrix<Complex64>),
}

impl ConnectingOperator {
    pub fn from_real(m: &DMatrix<f64>) -> Self {
        ConnectingOperator::Matrix(m.map(|v| Complex64::new(v, 0.0)))
    }

    pub fn matrix(&self) -> Option<&DMatrix<Complex64>> {
        match self {
            ConnectingOperator::Identity => None,
            ConnectingOperator::Matrix(m) => Some(m),
        }
    }
}
