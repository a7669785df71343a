use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{same_space, GraphSignalSpace, Signal};

/// A Hilbert space of signals on which a layer's filters act through a
/// vertex-level matrix.
pub trait SignalDomain: fmt::Debug + PartialEq + Send + Sync {
    /// The vertex space whose operators act on this domain.
    fn nodes(&self) -> &GraphSignalSpace;

    /// Whether vertex filters act on this domain as on the vertex space.
    fn check_filterable(&self) -> Result<()> {
        Ok(())
    }

    /// Whether a connecting matrix from `source` into this domain can act.
    fn check_connecting(&self, _source: &Self) -> Result<()> {
        Ok(())
    }
}

/// Signals that the scattering engine can propagate.
pub trait LayerSignal: Clone + fmt::Debug + Send + Sync {
    type Domain: SignalDomain;

    fn domain(&self) -> &Arc<Self::Domain>;

    fn zero(domain: &Arc<Self::Domain>) -> Self;

    /// Applies the vertex-level matrix `m`, landing in `target`.
    fn left_multiply(&self, m: &DMatrix<Complex64>, target: &Arc<Self::Domain>) -> Self;

    fn map_entries<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self;

    fn norm_sqr(&self) -> f64;

    fn difference(&self, other: &Self) -> Result<Self>;
}

impl SignalDomain for GraphSignalSpace {
    fn nodes(&self) -> &GraphSignalSpace {
        self
    }
}

impl LayerSignal for Signal {
    type Domain = GraphSignalSpace;

    fn domain(&self) -> &Arc<GraphSignalSpace> {
        self.space()
    }

    fn zero(domain: &Arc<GraphSignalSpace>) -> Self {
        domain.zero()
    }

    fn left_multiply(&self, m: &DMatrix<Complex64>, target: &Arc<GraphSignalSpace>) -> Self {
        Signal::from_parts(target.clone(), m * self.values())
    }

    fn map_entries<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        self.map(f)
    }

    fn norm_sqr(&self) -> f64 {
        Signal::norm_sqr(self)
    }

    fn difference(&self, other: &Self) -> Result<Self> {
        if !same_space(self.space(), other.space()) {
            return Err(Error::SpaceMismatch);
        }
        self.sub(other)
    }
}

pub(crate) fn same_domain<D: SignalDomain>(a: &Arc<D>, b: &Arc<D>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}
