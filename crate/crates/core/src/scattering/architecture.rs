use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::connecting::ConnectingOperator;
use super::domain::{same_domain, LayerSignal, SignalDomain};
use super::nonlinearity::Nonlinearity;
use crate::error::{Error, Result};
use crate::graph::{GraphSignalSpace, ShiftOperator};
use crate::linalg::{euclidean_form, smallest_singular_value, spectral_norm};
use crate::spectral::{FilterBank, FrameBounds};

/// One layer `(ρ_n, {χ_n} ∪ {g_γ}, P_n, Δ_n)` with its filter matrices
/// evaluated once at construction.
#[derive(Debug)]
pub struct LayerModule<D: SignalDomain> {
    nonlinearity: Nonlinearity,
    bank: FilterBank,
    connecting: ConnectingOperator,
    shift: ShiftOperator,
    source: Arc<D>,
    domain: Arc<D>,
    output_matrix: DMatrix<Complex64>,
    filter_matrices: Vec<DMatrix<Complex64>>,
    frame: FrameBounds,
    connecting_upper: f64,
    connecting_lower: Option<f64>,
}

impl<D: SignalDomain> Clone for LayerModule<D> {
    fn clone(&self) -> Self {
        LayerModule {
            nonlinearity: self.nonlinearity,
            bank: self.bank.clone(),
            connecting: self.connecting.clone(),
            shift: self.shift.clone(),
            source: self.source.clone(),
            domain: self.domain.clone(),
            output_matrix: self.output_matrix.clone(),
            filter_matrices: self.filter_matrices.clone(),
            frame: self.frame,
            connecting_upper: self.connecting_upper,
            connecting_lower: self.connecting_lower,
        }
    }
}

impl<D: SignalDomain> LayerModule<D> {
    /// `source` is the domain of incoming signals, `domain` the one the
    /// shift operator acts on. An identity connecting operator requires the two
    /// to agree.
    pub fn new(
        nonlinearity: Nonlinearity,
        bank: FilterBank,
        connecting: ConnectingOperator,
        shift: ShiftOperator,
        source: Arc<D>,
        domain: Arc<D>,
    ) -> Result<Self> {
        if **shift.space() != *domain.nodes() {
            return Err(Error::SpaceMismatch);
        }
        domain.check_filterable()?;
        let (connecting_upper, connecting_lower) = match &connecting {
            ConnectingOperator::Identity => {
                if !same_domain(&source, &domain) {
                    return Err(Error::SpaceMismatch);
                }
                (1.0, Some(1.0))
            }
            ConnectingOperator::Matrix(m) => {
                domain.check_connecting(&source)?;
                let (rows, cols) = (domain.nodes().size(), source.nodes().size());
                if m.nrows() != rows || m.ncols() != cols {
                    return Err(Error::SizeMismatch { expected: rows * cols, found: m.nrows() * m.ncols() });
                }
                let e = euclidean_form(m, source.nodes(), domain.nodes());
                let lower = if rows >= cols { Some(smallest_singular_value(&e)) } else { None };
                (spectral_norm(&e), lower.filter(|&v| v > 0.0))
            }
        };
        let output_matrix = bank.output_matrix(&shift)?;
        let filter_matrices = bank.filter_matrices(&shift)?;
        let frame = bank.frame_bounds_for(&shift)?;
        Ok(LayerModule {
            nonlinearity,
            bank,
            connecting,
            shift,
            source,
            domain,
            output_matrix,
            filter_matrices,
            frame,
            connecting_upper,
            connecting_lower,
        })
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn connecting(&self) -> &ConnectingOperator {
        &self.connecting
    }

    pub fn shift(&self) -> &ShiftOperator {
        &self.shift
    }

    pub fn source(&self) -> &Arc<D> {
        &self.source
    }

    pub fn domain(&self) -> &Arc<D> {
        &self.domain
    }

    pub fn branching(&self) -> usize {
        self.filter_matrices.len()
    }

    /// Frame bounds `(A_n, B_n)` of the bank on this layer's spectrum.
    pub fn frame_bounds(&self) -> FrameBounds {
        self.frame
    }

    /// `R⁺_n`.
    pub fn connecting_upper(&self) -> f64 {
        self.connecting_upper
    }

    /// `R⁻_n`, if the connecting operator is bounded below.
    pub fn connecting_lower(&self) -> Option<f64> {
        self.connecting_lower
    }

    pub fn output_matrix(&self) -> &DMatrix<Complex64> {
        &self.output_matrix
    }

    pub fn filter_matrices(&self) -> &[DMatrix<Complex64>] {
        &self.filter_matrices
    }

    fn check_input<S: LayerSignal<Domain = D>>(&self, f: &S) -> Result<()> {
        if same_domain(f.domain(), &self.source) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// `ρ(P f)`, the common first half of every propagator of this layer.
    pub fn activate<S: LayerSignal<Domain = D>>(&self, f: &S) -> Result<S> {
        self.check_input(f)?;
        let connected = match &self.connecting {
            ConnectingOperator::Identity => f.clone(),
            ConnectingOperator::Matrix(m) => f.left_multiply(m, &self.domain),
        };
        let rho = self.nonlinearity;
        Ok(connected.map_entries(|z| rho.apply(z)))
    }

    /// `U_n[γ] f = g_γ(Δ) ρ(P f)`.
    pub fn propagate_one_step<S: LayerSignal<Domain = D>>(&self, gamma: usize, f: &S) -> Result<S> {
        let m = self
            .filter_matrices
            .get(gamma)
            .ok_or(Error::IndexOutOfRange { index: gamma, limit: self.branching() })?;
        Ok(self.activate(f)?.left_multiply(m, &self.domain))
    }

    /// `V_n f = χ(Δ) ρ(P f)`.
    pub fn generate_output<S: LayerSignal<Domain = D>>(&self, f: &S) -> Result<S> {
        Ok(self.activate(f)?.left_multiply(&self.output_matrix, &self.domain))
    }

    /// The same module with a different shift operator on the same domain.
    pub fn with_shift(&self, shift: ShiftOperator) -> Result<Self> {
        LayerModule::new(
            self.nonlinearity,
            self.bank.clone(),
            self.connecting.clone(),
            shift,
            self.source.clone(),
            self.domain.clone(),
        )
    }
}

impl LayerModule<GraphSignalSpace> {
    /// Layer with an identity connecting operator on the shift's own space.
    pub fn node(nonlinearity: Nonlinearity, bank: FilterBank, shift: ShiftOperator) -> Result<Self> {
        let space = shift.space().clone();
        LayerModule::new(nonlinearity, bank, ConnectingOperator::Identity, shift, space.clone(), space)
    }
}

/// A sequence of layers whose domains chain: each layer's source is the
/// previous layer's domain.
#[derive(Debug)]
pub struct ScatteringArchitecture<D: SignalDomain = GraphSignalSpace> {
    input: Arc<D>,
    layers: Vec<LayerModule<D>>,
}

impl<D: SignalDomain> Clone for ScatteringArchitecture<D> {
    fn clone(&self) -> Self {
        ScatteringArchitecture { input: self.input.clone(), layers: self.layers.clone() }
    }
}

impl<D: SignalDomain> ScatteringArchitecture<D> {
    pub fn new(input: Arc<D>, layers: Vec<LayerModule<D>>) -> Result<Self> {
        let mut current = &input;
        for layer in &layers {
            if !same_domain(layer.source(), current) {
                return Err(Error::SpaceMismatch);
            }
            current = layer.domain();
        }
        Ok(ScatteringArchitecture { input, layers })
    }

    /// `depth` copies of `layer`; the layer must map its domain to itself.
    pub fn repeated(layer: LayerModule<D>, depth: usize) -> Result<Self> {
        let input = layer.source().clone();
        Self::new(input, vec![layer; depth])
    }

    pub fn input(&self) -> &Arc<D> {
        &self.input
    }

    pub fn layers(&self) -> &[LayerModule<D>] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Number of outputs `Σ_n Π_{k<n} |Γ_k|`.
    pub fn output_count(&self) -> usize {
        let mut total = 0;
        let mut width = 1;
        for layer in &self.layers {
            total += width;
            width *= layer.branching();
        }
        total
    }

    /// The first `depth` layers.
    pub fn truncated(&self, depth: usize) -> Self {
        ScatteringArchitecture { input: self.input.clone(), layers: self.layers[..depth.min(self.depth())].to_vec() }
    }

    /// Same modules and connecting operators, different shift operators.
    pub fn with_shifts(&self, shifts: Vec<ShiftOperator>) -> Result<Self> {
        if shifts.len() != self.depth() {
            return Err(Error::SizeMismatch { expected: self.depth(), found: shifts.len() });
        }
        let layers =
            self.layers.iter().zip(shifts).map(|(l, s)| l.with_shift(s)).collect::<Result<Vec<_>>>()?;
        ScatteringArchitecture::new(self.input.clone(), layers)
    }
}

impl ScatteringArchitecture<GraphSignalSpace> {
    /// `depth` identical node layers on `shift`.
    pub fn uniform(shift: &ShiftOperator, bank: FilterBank, nonlinearity: Nonlinearity, depth: usize) -> Result<Self> {
        let layer = LayerModule::node(nonlinearity, bank, shift.clone())?;
        let input = shift.space().clone();
        ScatteringArchitecture::new(input, vec![layer; depth])
    }
}
