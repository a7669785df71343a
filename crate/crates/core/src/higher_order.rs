//! Edge-level (2-tensor) signals and their scattering, plus Coulomb-matrix
//! features of molecules.
//!
//! An edge signal is a `|G| × |G|` matrix `F` with inner product
//! `Σ conj(F_ij) H_ij μ_ij`. A vertex operator acts on it by left
//! multiplication, i.e. column by column, so the node scattering engine runs
//! unchanged. Higher tensors `F_{i_1…i_k}` fit the same scheme by flattening
//! all but the first index into columns.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::aggregation::{pnorm_aggregate, Aggregate, Aggregator, aggregate_tree};
use crate::error::{Error, Result};
use crate::graph::{rescaled_laplacian, GraphSignalSpace, ShiftOperator, Signal};
use crate::scattering::{
    scatter, ConnectingOperator, FeatureTree, LayerModule, LayerSignal, Nonlinearity, ScatteringArchitecture,
    SignalDomain,
};
use crate::spectral::{kernel_matrix, FilterBank, FilterKernel, ZeroMode};

/// `ℓ²(E)` over all ordered vertex pairs, with weights `μ_ij ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSignalSpace {
    nodes: Arc<GraphSignalSpace>,
    weights: DMatrix<f64>,
}

impl EdgeSignalSpace {
    /// Edge weights default to the row weights `μ_ij = μ_i`, the choice under
    /// which vertex filters act self-adjointly by left multiplication.
    pub fn new(nodes: &Arc<GraphSignalSpace>, weights: Option<DMatrix<f64>>) -> Result<Arc<Self>> {
        let n = nodes.size();
        let weights = match weights {
            None => DMatrix::from_fn(n, n, |i, _| nodes.weights()[i]),
            Some(w) => {
                if w.nrows() != n || w.ncols() != n {
                    return Err(Error::SizeMismatch { expected: n, found: w.nrows().max(w.ncols()) });
                }
                if let Some((k, &weight)) = w.iter().enumerate().find(|(_, &v)| !(v >= 1.0) || !v.is_finite()) {
                    return Err(Error::WeightBelowOne { index: k, weight });
                }
                w
            }
        };
        Ok(Arc::new(EdgeSignalSpace { nodes: nodes.clone(), weights }))
    }

    pub fn unit(n: usize) -> Arc<Self> {
        let nodes = GraphSignalSpace::unit(n);
        Arc::new(EdgeSignalSpace { weights: DMatrix::from_element(n, n, 1.0), nodes })
    }

    pub fn node_space(&self) -> &Arc<GraphSignalSpace> {
        &self.nodes
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn node_count(&self) -> usize {
        self.nodes.size()
    }

    /// `μ_E = Σ μ_ij`.
    pub fn total_weight(&self) -> f64 {
        self.weights.sum()
    }

    /// Whether `μ_ij = μ_i` for all pairs.
    pub fn is_row_compatible(&self) -> bool {
        let w = self.nodes.weights();
        self.weights.row_iter().enumerate().all(|(i, row)| row.iter().all(|&v| v == w[i]))
    }
}

impl SignalDomain for EdgeSignalSpace {
    fn nodes(&self) -> &GraphSignalSpace {
        &self.nodes
    }

    fn check_filterable(&self) -> Result<()> {
        if self.is_row_compatible() {
            Ok(())
        } else {
            Err(Error::EdgeWeightsIncompatible)
        }
    }

    fn check_connecting(&self, source: &Self) -> Result<()> {
        if self.node_count() == source.node_count() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch)
        }
    }
}

/// A 2-tensor signal `F ∈ ℓ²(E)`.
#[derive(Debug, Clone)]
pub struct EdgeSignal {
    space: Arc<EdgeSignalSpace>,
    matrix: DMatrix<Complex64>,
}

impl EdgeSignal {
    pub fn new(space: &Arc<EdgeSignalSpace>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = space.node_count();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::ShapeMismatch);
        }
        Ok(EdgeSignal { space: space.clone(), matrix })
    }

    pub fn from_real(space: &Arc<EdgeSignalSpace>, matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(space, matrix.map(|v| Complex64::new(v, 0.0)))
    }

    pub fn zero(space: &Arc<EdgeSignalSpace>) -> Self {
        let n = space.node_count();
        EdgeSignal { space: space.clone(), matrix: DMatrix::zeros(n, n) }
    }

    /// The edge signal whose column `j` is `f` and whose other columns vanish.
    pub fn from_column(space: &Arc<EdgeSignalSpace>, j: usize, f: &Signal) -> Result<Self> {
        let n = space.node_count();
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, limit: n });
        }
        if f.len() != n {
            return Err(Error::SizeMismatch { expected: n, found: f.len() });
        }
        let mut matrix = DMatrix::zeros(n, n);
        matrix.set_column(j, f.values());
        Ok(EdgeSignal { space: space.clone(), matrix })
    }

    pub fn space(&self) -> &Arc<EdgeSignalSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Column `j` as a node signal.
    pub fn column(&self, j: usize) -> Result<Signal> {
        if j >= self.matrix.ncols() {
            return Err(Error::IndexOutOfRange { index: j, limit: self.matrix.ncols() });
        }
        Signal::new(self.space.node_space(), self.matrix.column(j).into_owned())
    }

    pub fn inner(&self, other: &EdgeSignal) -> Result<Complex64> {
        if *self.space != *other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .zip(self.space.weights.iter())
            .map(|((a, b), &w)| a.conj() * b * w)
            .sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.matrix.iter().zip(self.space.weights.iter()).map(|(v, &w)| v.norm_sqr() * w).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn distance(&self, other: &EdgeSignal) -> Result<f64> {
        Ok(LayerSignal::difference(self, other)?.norm())
    }

    pub fn scale(&self, c: Complex64) -> EdgeSignal {
        EdgeSignal { space: self.space.clone(), matrix: self.matrix.map(|v| v * c) }
    }
}

impl LayerSignal for EdgeSignal {
    type Domain = EdgeSignalSpace;

    fn domain(&self) -> &Arc<EdgeSignalSpace> {
        &self.space
    }

    fn zero(domain: &Arc<EdgeSignalSpace>) -> Self {
        EdgeSignal::zero(domain)
    }

    fn left_multiply(&self, m: &DMatrix<Complex64>, target: &Arc<EdgeSignalSpace>) -> Self {
        EdgeSignal { space: target.clone(), matrix: m * &self.matrix }
    }

    fn map_entries<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        EdgeSignal { space: self.space.clone(), matrix: self.matrix.map(f) }
    }

    fn norm_sqr(&self) -> f64 {
        EdgeSignal::norm_sqr(self)
    }

    fn difference(&self, other: &Self) -> Result<Self> {
        if *self.space != *other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(EdgeSignal { space: self.space.clone(), matrix: &self.matrix - &other.matrix })
    }
}

impl Aggregate for EdgeSignal {
    fn magnitudes(&self) -> Vec<(f64, f64)> {
        self.matrix.iter().zip(self.space.weights.iter()).map(|(v, &w)| (v.norm(), w)).collect()
    }

    fn lowpass(&self, _op: &ShiftOperator) -> Result<f64> {
        Err(Error::Config("low-pass aggregation is defined for node signals only".into()))
    }
}

/// `g(Δ)·F`, the node-level filter applied to every column.
pub fn edge_apply_filter(k: &FilterKernel, op: &ShiftOperator, f: &EdgeSignal) -> Result<EdgeSignal> {
    if **op.space() != **f.space().node_space() {
        return Err(Error::SpaceMismatch);
    }
    f.space().check_filterable()?;
    let m = kernel_matrix(k, op, ZeroMode::Eigenspace)?;
    Ok(f.left_multiply(&m, f.space()))
}

/// `N^E_p`.
pub fn edge_pnorm_aggregate(f: &EdgeSignal, p: usize, normalize_first: bool) -> Result<Vec<f64>> {
    pnorm_aggregate(f, p, normalize_first)
}

impl ScatteringArchitecture<EdgeSignalSpace> {
    /// `depth` identical layers acting on edge signals of `space` through `shift`.
    pub fn uniform_edges(
        space: &Arc<EdgeSignalSpace>,
        shift: &ShiftOperator,
        bank: FilterBank,
        nonlinearity: Nonlinearity,
        depth: usize,
    ) -> Result<Self> {
        let layer =
            LayerModule::new(nonlinearity, bank, ConnectingOperator::Identity, shift.clone(), space.clone(), space.clone())?;
        ScatteringArchitecture::new(space.clone(), vec![layer; depth])
    }
}

/// `Φ²_N(F)`.
pub fn edge_scatter(arch: &ScatteringArchitecture<EdgeSignalSpace>, f: &EdgeSignal) -> Result<FeatureTree<EdgeSignal>> {
    scatter(arch, f)
}

/// Atoms with nuclear charges and Cartesian positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Molecule {
    pub charges: Vec<f64>,
    pub positions: Vec<[f64; 3]>,
}

impl Molecule {
    pub fn atom_count(&self) -> usize {
        self.charges.len()
    }
}

/// `C_ij = Z_i Z_j / |R_i − R_j|` off the diagonal, `C_ii = ½ Z_i^{2.4}`.
pub fn coulomb_matrix(molecule: &Molecule) -> Result<DMatrix<f64>> {
    let n = molecule.atom_count();
    if molecule.positions.len() != n {
        return Err(Error::SizeMismatch { expected: n, found: molecule.positions.len() });
    }
    for (index, &charge) in molecule.charges.iter().enumerate() {
        if !(charge > 0.0) {
            return Err(Error::NonPositiveCharge { index, charge });
        }
    }
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        c[(i, i)] = 0.5 * molecule.charges[i].powf(2.4);
        for j in 0..i {
            let (a, b) = (molecule.positions[i], molecule.positions[j]);
            let r = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            if r == 0.0 {
                return Err(Error::CoincidentAtoms(j, i));
            }
            let v = molecule.charges[i] * molecule.charges[j] / r;
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    Ok(c)
}

/// The off-diagonal part of a Coulomb matrix, used as a weighted adjacency.
pub fn coulomb_adjacency(c: &DMatrix<f64>) -> DMatrix<f64> {
    let mut a = c.clone();
    a.fill_diagonal(0.0);
    a
}

/// Settings of the composite molecular features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoleculeFeatureConfig {
    pub depth: usize,
    pub p: usize,
    /// The edge input is the Coulomb matrix divided by this factor.
    pub edge_divisor: f64,
    pub normalize_first: bool,
}

impl Default for MoleculeFeatureConfig {
    fn default() -> Self {
        MoleculeFeatureConfig { depth: 4, p: 5, edge_divisor: 10.0, normalize_first: false }
    }
}

/// Node features (charges scattered over the Coulomb graph) concatenated with
/// edge features (the scaled Coulomb matrix scattered as a 2-tensor), both
/// with the `architecture_II` bank and `p`-norm aggregation.
pub fn molecule_features(molecule: &Molecule, config: &MoleculeFeatureConfig, bank: &FilterBank) -> Result<Vec<f64>> {
    let c = coulomb_matrix(molecule)?;
    let n = molecule.atom_count();
    let space = GraphSignalSpace::unit(n);
    let op = rescaled_laplacian(&coulomb_adjacency(&c), &space)?;
    let agg = [Aggregator::PNorm { p: config.p, normalize_first: config.normalize_first }];

    let node_arch = ScatteringArchitecture::uniform(&op, bank.clone(), Nonlinearity::Absolute, config.depth)?;
    let z = Signal::from_real(&space, &molecule.charges)?;
    let mut features = aggregate_tree(&node_arch, &scatter(&node_arch, &z)?, &agg)?.to_vector();

    let edges = EdgeSignalSpace::new(&space, None)?;
    let edge_arch = ScatteringArchitecture::uniform_edges(&edges, &op, bank.clone(), Nonlinearity::Absolute, config.depth)?;
    let input = EdgeSignal::from_real(&edges, &(c / config.edge_divisor))?;
    features.extend(aggregate_tree(&edge_arch, &edge_scatter(&edge_arch, &input)?, &agg)?.to_vector());
    Ok(features)
}
