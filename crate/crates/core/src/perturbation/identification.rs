use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{laplacian, same_space, GraphSignalSpace, ShiftOperator, Signal};
use crate::linalg::{to_complex, weighted_adjoint, weighted_operator_norm};
use crate::tolerance;

/// Identification operators `J : ℓ²(G) → ℓ²(G̃)` and `J̃ : ℓ²(G̃) → ℓ²(G)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationPair {
    source: Arc<GraphSignalSpace>,
    target: Arc<GraphSignalSpace>,
    forward: DMatrix<Complex64>,
    backward: DMatrix<Complex64>,
}

impl IdentificationPair {
    pub fn new(
        source: &Arc<GraphSignalSpace>,
        target: &Arc<GraphSignalSpace>,
        forward: DMatrix<Complex64>,
        backward: DMatrix<Complex64>,
    ) -> Result<Self> {
        let (n, m) = (source.size(), target.size());
        if forward.shape() != (m, n) || backward.shape() != (n, m) {
            return Err(Error::ShapeMismatch);
        }
        if forward.iter().chain(backward.iter()).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Config("identification operator has non-finite entries".into()));
        }
        Ok(IdentificationPair { source: source.clone(), target: target.clone(), forward, backward })
    }

    /// `J̃ = J*` with respect to the weighted inner products.
    pub fn with_adjoint(source: &Arc<GraphSignalSpace>, target: &Arc<GraphSignalSpace>, forward: DMatrix<Complex64>) -> Result<Self> {
        if forward.shape() != (target.size(), source.size()) {
            return Err(Error::ShapeMismatch);
        }
        let backward = weighted_adjoint(&forward, source, target);
        Self::new(source, target, forward, backward)
    }

    pub fn identity(space: &Arc<GraphSignalSpace>) -> Self {
        let id = DMatrix::identity(space.size(), space.size());
        IdentificationPair { source: space.clone(), target: space.clone(), forward: id.clone(), backward: id }
    }

    pub fn source(&self) -> &Arc<GraphSignalSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<GraphSignalSpace> {
        &self.target
    }

    /// `J`.
    pub fn forward(&self) -> &DMatrix<Complex64> {
        &self.forward
    }

    /// `J̃`.
    pub fn backward(&self) -> &DMatrix<Complex64> {
        &self.backward
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        if !same_space(f.space(), &self.source) {
            return Err(Error::SpaceMismatch);
        }
        Ok(Signal::from_parts(self.target.clone(), &self.forward * f.values()))
    }

    pub fn apply_back(&self, u: &Signal) -> Result<Signal> {
        if !same_space(u.space(), &self.target) {
            return Err(Error::SpaceMismatch);
        }
        Ok(Signal::from_parts(self.source.clone(), &self.backward * u.values()))
    }

    /// Whether every row of `J` has at most one nonzero entry and that entry
    /// is real and positive. Such a `J` commutes with every positively
    /// homogeneous pointwise nonlinearity.
    pub fn is_positive_selection(&self) -> bool {
        self.forward.row_iter().all(|row| {
            let nonzero: Vec<&Complex64> = row.iter().filter(|v| v.norm() != 0.0).collect();
            nonzero.len() <= 1 && nonzero.iter().all(|v| v.im == 0.0 && v.re > 0.0)
        })
    }

    fn check_operators(&self, op: &ShiftOperator, op_tilde: &ShiftOperator) -> Result<()> {
        if !same_space(op.space(), &self.source) || !same_space(op_tilde.space(), &self.target) {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }
}

/// The four quasi-unitary-equivalence quantities, each computed as an exact
/// operator norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// `‖J‖_op`.
    pub norm: f64,
    /// `max{0, ‖J‖_op − 2}`.
    pub norm_defect: f64,
    /// `‖J − J̃*‖_op`.
    pub adjoint_defect: f64,
    /// `sup ‖f − J̃Jf‖ / (‖f‖² + ⟨f, |Δ|f⟩)^{1/2}`.
    pub roundtrip_defect_source: f64,
    /// `sup ‖u − JJ̃u‖ / (‖u‖² + ⟨u, |Δ̃|u⟩)^{1/2}`.
    pub roundtrip_defect_target: f64,
    /// Smallest `δ` the three `δ`-scaled inequalities hold with.
    pub certified_delta: f64,
}

impl EquivalenceReport {
    /// Whether the spaces are `delta`-quasi-unitarily-equivalent.
    pub fn certifies(&self, delta: f64) -> bool {
        self.norm_defect == 0.0 && self.certified_delta <= delta + tolerance::EIGEN
    }
}

/// `(1 + |Δ|)^{-1/2}`.
fn energy_weight(op: &ShiftOperator) -> Result<DMatrix<Complex64>> {
    let d = op.decompose()?;
    Ok(d.function_matrix(|l| Complex64::new((1.0 + l.norm()).powf(-0.5), 0.0)))
}

pub fn equivalence_defects(pair: &IdentificationPair, op: &ShiftOperator, op_tilde: &ShiftOperator) -> Result<EquivalenceReport> {
    pair.check_operators(op, op_tilde)?;
    let (g, gt) = (&pair.source, &pair.target);
    let j = &pair.forward;
    let jt = &pair.backward;

    let norm = weighted_operator_norm(j, g, gt);
    let adjoint_defect = weighted_operator_norm(&(j - weighted_adjoint(jt, gt, g)), g, gt);
    let id_g = DMatrix::<Complex64>::identity(g.size(), g.size());
    let id_gt = DMatrix::<Complex64>::identity(gt.size(), gt.size());
    let source = weighted_operator_norm(&((id_g - jt * j) * energy_weight(op)?), g, g);
    let target = weighted_operator_norm(&((id_gt - j * jt) * energy_weight(op_tilde)?), gt, gt);
    Ok(EquivalenceReport {
        norm,
        norm_defect: (norm - 2.0).max(0.0),
        adjoint_defect,
        roundtrip_defect_source: source,
        roundtrip_defect_target: target,
        certified_delta: adjoint_defect.max(source).max(target),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosenessReport {
    pub omega: Complex64,
    /// `‖R̃J − JR‖_op` with `R = (Δ − ω)^{-1}`.
    pub resolvent_defect: f64,
    /// `max{‖Δ‖_op, ‖Δ̃‖_op}`.
    pub k: f64,
    pub distance_source: f64,
    pub distance_target: f64,
}

impl ClosenessReport {
    /// Whether `Δ` and `Δ̃` are `ω`-`delta`-close.
    pub fn certifies(&self, delta: f64) -> bool {
        self.resolvent_defect <= delta + tolerance::EIGEN
    }
}

/// Resolvent intertwining defect at `omega`, which must keep at least `margin`
/// from both spectra.
pub fn closeness_defect(
    pair: &IdentificationPair,
    op: &ShiftOperator,
    op_tilde: &ShiftOperator,
    omega: Complex64,
    margin: f64,
) -> Result<ClosenessReport> {
    pair.check_operators(op, op_tilde)?;
    let distance_source = op.distance_to_spectrum(omega)?;
    let distance_target = op_tilde.distance_to_spectrum(omega)?;
    let distance = distance_source.min(distance_target);
    if distance < margin {
        return Err(Error::OmegaInSpectrum { distance, margin });
    }
    let r = op.resolvent(omega)?;
    let rt = op_tilde.resolvent(omega)?;
    let diff = rt * &pair.forward - &pair.forward * r;
    Ok(ClosenessReport {
        omega,
        resolvent_defect: weighted_operator_norm(&diff, &pair.source, &pair.target),
        k: op.operator_norm().max(op_tilde.operator_norm()),
        distance_source,
        distance_target,
    })
}

/// A graph and the graph obtained by splitting one of its vertices in two,
/// joined by a strong edge.
#[derive(Debug, Clone)]
pub struct SplitVertexPair {
    pub delta: f64,
    pub adjacency: DMatrix<f64>,
    pub adjacency_tilde: DMatrix<f64>,
    pub laplacian: ShiftOperator,
    pub laplacian_tilde: ShiftOperator,
    pub pair: IdentificationPair,
}

/// Splits vertex `v` of a unit-weight graph. On `G` the vertex carries weight
/// 2; `G̃` has unit weights, an extra vertex `n` and an edge `(v, n)` of weight
/// `1/δ²`. `J` copies `f_v` to both halves and `J̃ = J*` averages them.
pub fn split_vertex_pair(adjacency: &DMatrix<f64>, v: usize, delta: f64) -> Result<SplitVertexPair> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    let n = adjacency.nrows();
    if v >= n {
        return Err(Error::IndexOutOfRange { index: v, limit: n });
    }
    let mut weights = vec![1.0; n];
    weights[v] = 2.0;
    let space = GraphSignalSpace::new(n, Some(weights))?;
    let space_tilde = GraphSignalSpace::unit(n + 1);

    let mut adjacency_tilde = DMatrix::zeros(n + 1, n + 1);
    adjacency_tilde.view_mut((0, 0), (n, n)).copy_from(adjacency);
    adjacency_tilde[(v, n)] = 1.0 / (delta * delta);
    adjacency_tilde[(n, v)] = 1.0 / (delta * delta);

    let laplacian_op = laplacian(adjacency, &space, false)?;
    let laplacian_tilde = laplacian(&adjacency_tilde, &space_tilde, false)?;

    let mut j = DMatrix::zeros(n + 1, n);
    for i in 0..n {
        j[(i, i)] = 1.0;
    }
    j[(n, v)] = 1.0;
    let pair = IdentificationPair::with_adjoint(&space, &space_tilde, to_complex(&j))?;
    Ok(SplitVertexPair {
        delta,
        adjacency: adjacency.clone(),
        adjacency_tilde,
        laplacian: laplacian_op,
        laplacian_tilde,
        pair,
    })
}

/// The six-vertex reference graph: a 5-cycle `0..4` and vertex 5 attached to
/// 3 and 4. Vertex 5 is the one that gets split.
pub fn reference_graph() -> DMatrix<f64> {
    let mut a = DMatrix::zeros(6, 6);
    for (i, j) in [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (3, 5), (4, 5)] {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    a
}

/// The split of vertex 5 of [`reference_graph`].
pub fn reference_split_pair(delta: f64) -> Result<SplitVertexPair> {
    split_vertex_pair(&reference_graph(), 5, delta)
}
