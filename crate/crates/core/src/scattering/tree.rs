use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::architecture::ScatteringArchitecture;
use super::domain::{same_domain, LayerSignal};
use crate::error::{Error, Result};

/// Filter indices in application order: `[γ_1, γ_2, ...]`.
///
/// Paths sort lexicographically, so the first layer's index is the most
/// significant one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn root() -> Self {
        Path(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, gamma: usize) -> Path {
        let mut v = self.0.clone();
        v.push(gamma);
        Path(v)
    }
}

/// Renders as `root` for the empty path and as dash-joined indices otherwise.
impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for (k, g) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("-")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Outputs and hidden representations of one layer, both sorted by path.
#[derive(Debug, Clone)]
pub struct TreeLayer<S> {
    /// `V_n U[p] f` for paths `p` of length `n − 1`.
    pub outputs: Vec<(Path, S)>,
    /// `U[p] f` for paths `p` of length `n`.
    pub hidden: Vec<(Path, S)>,
}

/// The result of a scattering transform.
#[derive(Debug, Clone)]
pub struct FeatureTree<S> {
    input: S,
    layers: Vec<TreeLayer<S>>,
}

impl<S: LayerSignal> FeatureTree<S> {
    pub fn input(&self) -> &S {
        &self.input
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[TreeLayer<S>] {
        &self.layers
    }

    /// Outputs of layer `n` (1-based).
    pub fn outputs(&self, n: usize) -> Result<&[(Path, S)]> {
        Ok(&self.layer(n)?.outputs)
    }

    /// Hidden representations of layer `n` (1-based).
    pub fn hidden(&self, n: usize) -> Result<&[(Path, S)]> {
        Ok(&self.layer(n)?.hidden)
    }

    fn layer(&self, n: usize) -> Result<&TreeLayer<S>> {
        if n == 0 || n > self.depth() {
            return Err(Error::IndexOutOfRange { index: n, limit: self.depth() });
        }
        Ok(&self.layers[n - 1])
    }

    pub fn output_count(&self) -> usize {
        self.layers.iter().map(|l| l.outputs.len()).sum()
    }

    /// All outputs as `(layer, path, signal)`, layer by layer in path order.
    pub fn iter_outputs(&self) -> impl Iterator<Item = (usize, &Path, &S)> {
        self.layers.iter().enumerate().flat_map(|(k, l)| l.outputs.iter().map(move |(p, s)| (k + 1, p, s)))
    }

    /// `‖Φ_N(f)‖²` in the direct-sum feature space.
    pub fn feature_norm_sqr(&self) -> f64 {
        self.iter_outputs().map(|(_, _, s)| s.norm_sqr()).sum()
    }

    pub fn feature_norm(&self) -> f64 {
        self.feature_norm_sqr().sqrt()
    }

    /// Distance in the feature space; both trees must have the same shape.
    pub fn feature_distance(&self, other: &FeatureTree<S>) -> Result<f64> {
        if self.depth() != other.depth() {
            return Err(Error::ShapeMismatch);
        }
        self.distance_over_common(other).map(f64::sqrt)
    }

    /// Distance after extending the shallower tree by zero outputs. Both
    /// trees must agree on the layers they share.
    pub fn padded_distance(&self, other: &FeatureTree<S>) -> Result<f64> {
        let (short, long) = if self.depth() <= other.depth() { (self, other) } else { (other, self) };
        let common = short.distance_over_common(long)?;
        let extra: f64 = long.layers[short.depth()..]
            .iter()
            .flat_map(|l| l.outputs.iter())
            .map(|(_, s)| s.norm_sqr())
            .sum();
        Ok((common + extra).sqrt())
    }

    fn distance_over_common(&self, other: &FeatureTree<S>) -> Result<f64> {
        let mut total = 0.0;
        for (a, b) in self.layers.iter().zip(&other.layers) {
            if a.outputs.len() != b.outputs.len() {
                return Err(Error::ShapeMismatch);
            }
            for ((pa, sa), (pb, sb)) in a.outputs.iter().zip(&b.outputs) {
                if pa != pb {
                    return Err(Error::ShapeMismatch);
                }
                total += sa.difference(sb).map_err(|_| Error::ShapeMismatch)?.norm_sqr();
            }
        }
        Ok(total)
    }

    /// `W_n`: total squared norm of the layer-`n` hidden representations;
    /// `W_0 = ‖f‖²`.
    pub fn layer_energy(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(self.input.norm_sqr());
        }
        Ok(self.hidden(n)?.iter().map(|(_, s)| s.norm_sqr()).sum())
    }

    /// The tree of the first `depth` layers, i.e. the transform of the
    /// truncated architecture.
    pub fn truncated(&self, depth: usize) -> FeatureTree<S> {
        FeatureTree { input: self.input.clone(), layers: self.layers[..depth.min(self.depth())].to_vec() }
    }
}

/// `Φ_N(f)`, expanded breadth first. Siblings are evaluated in parallel and
/// collected in path order.
pub fn scatter<S: LayerSignal>(arch: &ScatteringArchitecture<S::Domain>, f: &S) -> Result<FeatureTree<S>> {
    if !same_domain(f.domain(), arch.input()) {
        return Err(Error::SpaceMismatch);
    }
    let mut frontier: Vec<(Path, S)> = vec![(Path::root(), f.clone())];
    let mut layers = Vec::with_capacity(arch.depth());
    for layer in arch.layers() {
        let expanded: Vec<(S, Vec<S>)> = frontier
            .par_iter()
            .map(|(_, s)| {
                let x = layer.activate(s)?;
                let out = x.left_multiply(layer.output_matrix(), layer.domain());
                let children = layer.filter_matrices().iter().map(|m| x.left_multiply(m, layer.domain())).collect();
                Ok((out, children))
            })
            .collect::<Result<_>>()?;
        let mut outputs = Vec::with_capacity(frontier.len());
        let mut hidden = Vec::with_capacity(frontier.len() * layer.branching());
        for ((path, _), (out, children)) in frontier.iter().zip(expanded) {
            outputs.push((path.clone(), out));
            for (gamma, c) in children.into_iter().enumerate() {
                hidden.push((path.child(gamma), c));
            }
        }
        frontier = hidden.clone();
        layers.push(TreeLayer { outputs, hidden });
    }
    Ok(FeatureTree { input: f.clone(), layers })
}
