//! Graph-level aggregation of scattering outputs into size-independent vectors.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ShiftOperator, Signal};
use crate::scattering::{FeatureTree, LayerSignal, Path, ScatteringArchitecture};

/// Per-layer aggregation map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Aggregator {
    /// `N_p(f) = (‖f‖₁/√μ_G, ‖f‖₂, …, ‖f‖_p)/√p`; without `normalize_first`
    /// the first entry is the plain `‖f‖₁`.
    PNorm {
        p: usize,
        #[serde(default = "yes")]
        normalize_first: bool,
    },
    /// `|⟨ψ_Δ, f⟩|` with `ψ_Δ` the ground state of the layer operator.
    LowPass,
}

fn yes() -> bool {
    true
}

impl Aggregator {
    pub fn dimension(&self) -> usize {
        match self {
            Aggregator::PNorm { p, .. } => *p,
            Aggregator::LowPass => 1,
        }
    }
}

/// Signals that can be aggregated: they expose weighted `ℓ^q` norms.
pub trait Aggregate: LayerSignal {
    /// Pairs `(|f_i|, μ_i)` over the index set.
    fn magnitudes(&self) -> Vec<(f64, f64)>;

    /// `|⟨ψ_Δ, f⟩|`; only node signals support it.
    fn lowpass(&self, op: &ShiftOperator) -> Result<f64>;
}

impl Aggregate for Signal {
    fn magnitudes(&self) -> Vec<(f64, f64)> {
        self.values().iter().zip(self.space().weights()).map(|(v, &w)| (v.norm(), w)).collect()
    }

    fn lowpass(&self, op: &ShiftOperator) -> Result<f64> {
        lowpass_aggregate(self, op)
    }
}

/// `N_p` from `(|f_i|, μ_i)` pairs. Terms are summed in sorted order so the
/// result is bitwise invariant under relabeling of the index set.
pub fn pnorm_from_magnitudes(mut pairs: Vec<(f64, f64)>, p: usize, normalize_first: bool) -> Result<Vec<f64>> {
    if p == 0 {
        return Err(Error::Config("aggregation order p must be at least 1".into()));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let total_weight: f64 = {
        let mut w: Vec<f64> = pairs.iter().map(|&(_, m)| m).collect();
        w.sort_by(f64::total_cmp);
        w.iter().sum()
    };
    let scale = 1.0 / (p as f64).sqrt();
    let mut out = Vec::with_capacity(p);
    for q in 1..=p {
        let s: f64 = pairs.iter().map(|&(a, m)| a.powi(q as i32) * m).sum();
        let mut v = s.powf(1.0 / q as f64);
        if q == 1 && normalize_first {
            v /= total_weight.sqrt();
        }
        out.push(v * scale);
    }
    Ok(out)
}

pub fn pnorm_aggregate<S: Aggregate>(f: &S, p: usize, normalize_first: bool) -> Result<Vec<f64>> {
    pnorm_from_magnitudes(f.magnitudes(), p, normalize_first)
}

/// `|⟨ψ_Δ, f⟩|` for the normalized eigenvector of the simple eigenvalue zero
/// at the bottom of a real spectrum.
pub fn lowpass_aggregate(f: &Signal, op: &ShiftOperator) -> Result<f64> {
    if **f.space() != **op.space() {
        return Err(Error::SpaceMismatch);
    }
    let d = op.decompose()?;
    let values = d.eigenvalues();
    let lowest = values[0];
    if !d.is_zero_eigenvalue(lowest) {
        return Err(Error::NoZeroEigenvalue(lowest.re));
    }
    let multiplicity = values.iter().filter(|&&v| d.is_zero_eigenvalue(v)).count();
    if multiplicity > 1 {
        return Err(Error::DegenerateGroundState(multiplicity));
    }
    let psi = Signal::new(op.space(), d.eigenvectors().column(0).into_owned())?;
    Ok(psi.inner(f)?.norm())
}

/// Aggregated outputs, one vector per `(layer, path)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphLevelFeatures {
    pub layers: Vec<Vec<(Path, Vec<f64>)>>,
}

impl GraphLevelFeatures {
    pub fn dimension(&self) -> usize {
        self.layers.iter().flatten().map(|(_, v)| v.len()).sum()
    }

    /// Concatenation in `(layer, path, component)` order.
    pub fn to_vector(&self) -> Vec<f64> {
        self.layers.iter().flatten().flat_map(|(_, v)| v.iter().copied()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.to_vector().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &GraphLevelFeatures) -> Result<f64> {
        let (a, b) = (self.to_vector(), other.to_vector());
        if a.len() != b.len() {
            return Err(Error::ShapeMismatch);
        }
        Ok(a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
    }

    /// Rows `(layer, path, component, value)`; layers are 1-based and
    /// components 0-based.
    pub fn rows(&self) -> impl Iterator<Item = (usize, &Path, usize, f64)> {
        self.layers.iter().enumerate().flat_map(|(k, layer)| {
            layer.iter().flat_map(move |(p, v)| v.iter().enumerate().map(move |(c, &x)| (k + 1, p, c, x)))
        })
    }

    /// CSV with header `layer,path,component,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["layer", "path", "component", "value"])?;
        for (layer, path, component, value) in self.rows() {
            w.write_record([layer.to_string(), path.to_string(), component.to_string(), format_value(value)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Flat JSON: a list of `{layer, path, component, value}` objects.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.rows()
                .map(|(layer, path, component, value)| {
                    serde_json::json!({ "layer": layer, "path": path.to_string(), "component": component, "value": value })
                })
                .collect(),
        )
    }
}

/// Fixed-precision rendering used in feature files. Twelve significant
/// digits keep outputs of relabeled graphs textually identical despite
/// last-bit differences in the eigensolver.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    format!("{v:.11e}")
}

/// Applies the per-layer aggregators to every output of `tree`. A single
/// aggregator is used for all layers.
pub fn aggregate_tree<S: Aggregate>(
    arch: &ScatteringArchitecture<S::Domain>,
    tree: &FeatureTree<S>,
    aggregators: &[Aggregator],
) -> Result<GraphLevelFeatures> {
    if aggregators.len() != 1 && aggregators.len() != tree.depth() {
        return Err(Error::SizeMismatch { expected: tree.depth(), found: aggregators.len() });
    }
    let mut layers = Vec::with_capacity(tree.depth());
    for n in 1..=tree.depth() {
        let agg = if aggregators.len() == 1 { aggregators[0] } else { aggregators[n - 1] };
        let layer = tree
            .outputs(n)?
            .iter()
            .map(|(path, s)| {
                let v = match agg {
                    Aggregator::PNorm { p, normalize_first } => pnorm_aggregate(s, p, normalize_first)?,
                    Aggregator::LowPass => {
                        let op = arch
                            .layers()
                            .get(n - 1)
                            .ok_or(Error::IndexOutOfRange { index: n, limit: arch.depth() })?
                            .shift();
                        vec![s.lowpass(op)?]
                    }
                };
                Ok((path.clone(), v))
            })
            .collect::<Result<Vec<_>>>()?;
        layers.push(layer);
    }
    Ok(GraphLevelFeatures { layers })
}
