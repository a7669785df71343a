use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::contour::cg_constant;
use super::identification::{closeness_defect, equivalence_defects, IdentificationPair};
use crate::error::{Error, Result};
use crate::graph::{frobenius_distance, GraphSignalSpace, ShiftOperator, Signal};
use crate::linalg::{frobenius, weighted_operator_norm};
use crate::random::random_signal;
use crate::scattering::{
    scatter, ConnectingOperator, FeatureTree, LayerModule, LayerSignal, Nonlinearity, ScatteringArchitecture, SignalDomain,
};
use crate::spectral::{kernel_matrix, FilterKernel, ZeroMode};
use crate::tolerance;

const SLACK: f64 = tolerance::BOUND_SLACK;

/// `‖Φ̃_N(f) − Φ_N(f)‖ ≤ c · δ · ‖f‖` constant for Frobenius perturbations:
/// `(2(2^N − 1) B^{N−1})^{1/2} D`, or `(2(1 − B^N)/(1 − B))^{1/2} D` when `B ≤ 1/2`.
pub fn operator_stability_constant(depth: usize, b: f64, d: f64) -> f64 {
    if depth == 0 {
        return 0.0;
    }
    let n = depth as i32;
    if b <= 0.5 {
        (2.0 * (1.0 - b.powi(n)) / (1.0 - b)).sqrt() * d
    } else {
        (2.0 * (2f64.powi(n) - 1.0)).sqrt() * b.powi(n - 1).sqrt() * d
    }
}

/// Which commutation hypotheses of the vertex-set perturbation bound hold
/// exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommutationBranch {
    /// `J` commutes with both `ρ` and the connecting operators.
    Exact,
    /// Exactly one of the two commutes.
    OneSided,
    /// Both only commute up to `δ`.
    General,
}

/// `K_N` of the vertex-set perturbation bound for the given branch.
pub fn graph_stability_constant(branch: CommutationBranch, depth: usize, b: f64, d: f64) -> f64 {
    if depth == 0 {
        return 0.0;
    }
    let n = depth as i32;
    let (base, extra) = match branch {
        CommutationBranch::Exact => (2.0, 0.0),
        CommutationBranch::OneSided => (4.0, 4.0 * b),
        CommutationBranch::General => (8.0, 12.0 * b),
    };
    let numerator = 2.0 * d * d + extra;
    if b > 1.0 / base {
        ((base.powi(n) - 1.0) * numerator / (base - 1.0) * b.powi(n - 1)).sqrt()
    } else {
        (numerator * (1.0 - b.powi(n)) / (1.0 - b)).sqrt()
    }
}

/// `(L_χ² + Σ_γ L_{g_γ}²)^{1/2}` for one layer. With the constant-vector zero
/// mode the kernel projector is the same for every Laplacian-type operator,
/// so jumps at zero cancel and the continuous parts' constants apply.
pub fn layer_lipschitz_constant<D: SignalDomain>(layer: &LayerModule<D>, index: usize) -> Result<f64> {
    let shared = layer.bank().zero_mode() == ZeroMode::ConstantVector;
    let bound = |k: &FilterKernel| {
        let b = if shared { k.lipschitz_bound_with_shared_kernel() } else { k.lipschitz_bound() };
        b.ok_or(Error::MissingLipschitzBound(index + 1))
    };
    let mut sum = bound(layer.bank().output())?.powi(2);
    for k in layer.bank().filters() {
        sum += bound(k)?.powi(2);
    }
    Ok(sum.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRow {
    pub index: usize,
    pub input_norm: f64,
    pub distance: f64,
    pub bound: f64,
    /// `distance / (δ‖f‖)`, comparable with the stability constant.
    pub ratio: f64,
}

/// Returns the largest ratio, the margin `constant − ratio`, the factor
/// `constant / ratio` and whether every sample respects its bound.
fn summarize(rows: &[SampleRow], constant: f64) -> (f64, f64, f64, bool) {
    let empirical = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let factor = if empirical > 0.0 { constant / empirical } else { f64::INFINITY };
    let holds = rows.iter().all(|r| r.distance <= r.bound + SLACK);
    (empirical, constant - empirical, factor, holds)
}

fn table(out: &mut String, rows: &[SampleRow]) {
    let _ = writeln!(out, "sample  input_norm  distance  bound  ratio");
    for r in rows {
        let _ = writeln!(out, "{}  {:.6e}  {:.6e}  {:.6e}  {:.6e}", r.index, r.input_norm, r.distance, r.bound, r.ratio);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorPerturbationReport {
    pub depth: usize,
    /// `max_n ‖Δ_n − Δ̃_n‖_F`.
    pub delta: f64,
    /// `B`, the largest upper frame bound over both architectures.
    pub frame_bound: f64,
    /// `D`.
    pub lipschitz_constant: f64,
    pub stability_constant: f64,
    /// `R⁺_n, L⁺_n ≤ 1` in every layer.
    pub assumptions_hold: bool,
    pub empirical_max_ratio: f64,
    /// `stability_constant − empirical_max_ratio`.
    pub margin: f64,
    /// `stability_constant / empirical_max_ratio`.
    pub slack_factor: f64,
    pub holds: bool,
    pub samples: Vec<SampleRow>,
}

impl OperatorPerturbationReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "depth: {}", self.depth);
        let _ = writeln!(out, "delta: {:.6e}", self.delta);
        let _ = writeln!(out, "frame_bound: {:.6}", self.frame_bound);
        let _ = writeln!(out, "lipschitz_constant: {:.6}", self.lipschitz_constant);
        let _ = writeln!(out, "theoretical_bound: {:.6}", self.stability_constant);
        let _ = writeln!(out, "empirical_max_ratio: {:.6e}", self.empirical_max_ratio);
        let _ = writeln!(out, "margin: {:.6e}", self.margin);
        let _ = writeln!(out, "slack_factor: {:.6e}", self.slack_factor);
        let _ = writeln!(out, "assumptions_hold: {}", self.assumptions_hold);
        let _ = writeln!(out, "holds: {}", self.holds);
        table(&mut out, &self.samples);
        out
    }
}

fn check_same_modules<D: SignalDomain>(a: &ScatteringArchitecture<D>, b: &ScatteringArchitecture<D>) -> Result<()> {
    if a.depth() != b.depth() {
        return Err(Error::InvalidArchitecture(format!("depths differ: {} vs {}", a.depth(), b.depth())));
    }
    for (k, (x, y)) in a.layers().iter().zip(b.layers()).enumerate() {
        if x.nonlinearity() != y.nonlinearity() || x.bank() != y.bank() {
            return Err(Error::InvalidArchitecture(format!("layer {} uses different modules", k + 1)));
        }
    }
    Ok(())
}

fn unit_bounded<D: SignalDomain>(arch: &ScatteringArchitecture<D>) -> bool {
    arch.layers()
        .iter()
        .all(|l| l.connecting_upper() <= 1.0 + 1e-12 && l.nonlinearity().lipschitz_upper() <= 1.0)
}

fn max_frame_bound<D: SignalDomain>(archs: &[&ScatteringArchitecture<D>]) -> f64 {
    archs.iter().flat_map(|a| a.layers().iter().map(|l| l.frame_bounds().upper)).fold(0.0, f64::max)
}

/// Compares an architecture with a copy whose shift operators were perturbed,
/// on every sample signal.
pub fn operator_perturbation_experiment<S: LayerSignal>(
    arch: &ScatteringArchitecture<S::Domain>,
    perturbed: &ScatteringArchitecture<S::Domain>,
    samples: &[S],
) -> Result<OperatorPerturbationReport> {
    check_same_modules(arch, perturbed)?;
    let mut delta: f64 = 0.0;
    let mut d: f64 = 0.0;
    for (k, (x, y)) in arch.layers().iter().zip(perturbed.layers()).enumerate() {
        if x.connecting() != y.connecting() {
            return Err(Error::InvalidArchitecture(format!("layer {} uses different connecting operators", k + 1)));
        }
        delta = delta.max(frobenius_distance(x.shift(), y.shift())?);
        d = d.max(layer_lipschitz_constant(x, k)?);
    }
    let b = max_frame_bound(&[arch, perturbed]);
    let constant = operator_stability_constant(arch.depth(), b, d);
    let rows = samples
        .par_iter()
        .enumerate()
        .map(|(index, f)| {
            let distance = scatter(arch, f)?.feature_distance(&scatter(perturbed, f)?)?;
            let norm = f.norm_sqr().sqrt();
            let scale = delta * norm;
            Ok(SampleRow {
                index,
                input_norm: norm,
                distance,
                bound: constant * scale,
                ratio: if scale > 0.0 { distance / scale } else { 0.0 },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (empirical, margin, slack_factor, holds) = summarize(&rows, constant);
    Ok(OperatorPerturbationReport {
        depth: arch.depth(),
        delta,
        frame_bound: b,
        lipschitz_constant: d,
        stability_constant: constant,
        assumptions_hold: unit_bounded(arch) && unit_bounded(perturbed),
        empirical_max_ratio: empirical,
        margin,
        slack_factor,
        holds,
        samples: rows,
    })
}

/// Settings of [`graph_perturbation_experiment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphExperimentConfig {
    pub omega: Complex64,
    pub margin: f64,
    /// Random signals used to estimate the `ρ`-commutation defect.
    pub rho_samples: usize,
    pub seed: u64,
    /// Overrides the structural test for `ρ(Jf) = Jρ(f)`.
    pub rho_commutes: Option<bool>,
}

impl Default for GraphExperimentConfig {
    fn default() -> Self {
        GraphExperimentConfig {
            omega: Complex64::new(-1.0, 0.0),
            margin: tolerance::RESOLVENT_MARGIN,
            rho_samples: 200,
            seed: 0,
            rho_commutes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerCertificate {
    pub layer: usize,
    pub equivalence_delta: f64,
    pub norm: f64,
    pub resolvent_defect: f64,
    pub connecting_defect: f64,
    pub rho_defect_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphPerturbationReport {
    pub depth: usize,
    pub omega: Complex64,
    /// Whether the bound's hypotheses were met; otherwise `reason` says why
    /// and no bound is asserted.
    pub applicable: bool,
    pub reason: Option<String>,
    pub branch: CommutationBranch,
    pub rho_commutes: bool,
    pub layers: Vec<LayerCertificate>,
    /// The `δ` all hypotheses hold with.
    pub delta: f64,
    /// `K`, bounding every operator norm.
    pub k_bound: f64,
    pub frame_bound: f64,
    /// `D` assembled from the contour constants `C_g`.
    pub contour_constant: Option<f64>,
    pub stability_constant: Option<f64>,
    pub empirical_max_ratio: f64,
    pub margin: Option<f64>,
    pub slack_factor: Option<f64>,
    pub holds: Option<bool>,
    pub samples: Vec<SampleRow>,
}

impl GraphPerturbationReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "depth: {}", self.depth);
        let _ = writeln!(out, "applicable: {}", self.applicable);
        if let Some(r) = &self.reason {
            let _ = writeln!(out, "reason: {r}");
        }
        let _ = writeln!(out, "branch: {:?}", self.branch);
        let _ = writeln!(out, "delta: {:.6e}", self.delta);
        let _ = writeln!(out, "k_bound: {:.6}", self.k_bound);
        let _ = writeln!(out, "frame_bound: {:.6}", self.frame_bound);
        if let (Some(d), Some(k)) = (self.contour_constant, self.stability_constant) {
            let _ = writeln!(out, "contour_constant: {d:.6e}");
            let _ = writeln!(out, "theoretical_bound: {k:.6e}");
        }
        let _ = writeln!(out, "empirical_max_ratio: {:.6e}", self.empirical_max_ratio);
        if let (Some(m), Some(h)) = (self.margin, self.holds) {
            let _ = writeln!(out, "margin: {m:.6e}");
            let _ = writeln!(out, "holds: {h}");
        }
        table(&mut out, &self.samples);
        out
    }
}

fn connecting_matrix(c: &ConnectingOperator, n: usize) -> DMatrix<Complex64> {
    match c {
        ConnectingOperator::Identity => DMatrix::identity(n, n),
        ConnectingOperator::Matrix(m) => m.clone(),
    }
}

fn apply_tree_outputs(
    tree: &FeatureTree<Signal>,
    tree_tilde: &FeatureTree<Signal>,
    pairs: &[&IdentificationPair],
) -> Result<f64> {
    let mut sum = 0.0;
    for ((n, _, s), (_, _, st)) in tree.iter_outputs().zip(tree_tilde.iter_outputs()) {
        sum += pairs[n].apply(s)?.distance(st)?.powi(2);
    }
    Ok(sum.sqrt())
}

/// Compares `Φ̃_N(J_0 f)` with `𝒥_N Φ_N(f)` for architectures on different
/// graphs. `pairs` holds `J_0, …, J_N`, or a single pair used in every layer.
pub fn graph_perturbation_experiment(
    arch: &ScatteringArchitecture,
    arch_tilde: &ScatteringArchitecture,
    pairs: &[IdentificationPair],
    samples: &[Signal],
    config: &GraphExperimentConfig,
) -> Result<GraphPerturbationReport> {
    check_same_modules(arch, arch_tilde)?;
    let depth = arch.depth();
    let pairs: Vec<&IdentificationPair> = match pairs.len() {
        1 => vec![&pairs[0]; depth + 1],
        n if n == depth + 1 => pairs.iter().collect(),
        n => return Err(Error::SizeMismatch { expected: depth + 1, found: n }),
    };
    let input_ok = **pairs[0].source() == **arch.input() && **pairs[0].target() == **arch_tilde.input();
    if !input_ok {
        return Err(Error::SpaceMismatch);
    }

    let mut reasons = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut layers = Vec::with_capacity(depth);
    let mut k_bound: f64 = 0.0;
    let mut rho_structural = true;
    for (k, (x, y)) in arch.layers().iter().zip(arch_tilde.layers()).enumerate() {
        let pair = pairs[k + 1];
        let prev = pairs[k];
        if **pair.source() != **x.domain() || **pair.target() != **y.domain() {
            return Err(Error::SpaceMismatch);
        }
        let eq = equivalence_defects(pair, x.shift(), y.shift())?;
        if eq.norm_defect > 0.0 {
            reasons.push(format!("layer {}: ‖J‖ = {:.4} exceeds 2", k + 1, eq.norm));
        }
        let cl = closeness_defect(pair, x.shift(), y.shift(), config.omega, config.margin)?;
        k_bound = k_bound.max(cl.k);

        let p = connecting_matrix(x.connecting(), x.source().size());
        let pt = connecting_matrix(y.connecting(), y.source().size());
        let connecting_defect = weighted_operator_norm(&(pt * prev.forward() - pair.forward() * p), x.domain(), y.domain());

        let rho = x.nonlinearity();
        let structural = rho == Nonlinearity::Identity || pair.is_positive_selection();
        rho_structural &= structural;
        let mut rho_defect: f64 = 0.0;
        for _ in 0..config.rho_samples {
            let f = random_signal(pair.source(), false, &mut rng);
            let lhs = pair.apply(&f)?.map(|z| rho.apply(z));
            let rhs = pair.apply(&f.map(|z| rho.apply(z)))?;
            rho_defect = rho_defect.max(lhs.distance(&rhs)? / f.norm().max(f64::MIN_POSITIVE));
        }
        layers.push(LayerCertificate {
            layer: k + 1,
            equivalence_delta: eq.certified_delta,
            norm: eq.norm,
            resolvent_defect: cl.resolvent_defect,
            connecting_defect,
            rho_defect_estimate: rho_defect,
        });
    }
    // J_0 must be an identification of the input spaces as well
    if let Some(first) = arch.layers().first() {
        if **first.source() == **first.domain() && pairs[0] != pairs[1] {
            let op = first.shift();
            let op_tilde = arch_tilde.layers()[0].shift();
            if pairs[0].source() == op.space() && pairs[0].target() == op_tilde.space() {
                let eq = equivalence_defects(pairs[0], op, op_tilde)?;
                if eq.norm_defect > 0.0 {
                    reasons.push(format!("input: ‖J_0‖ = {:.4} exceeds 2", eq.norm));
                }
                layers.iter_mut().for_each(|l| l.equivalence_delta = l.equivalence_delta.max(eq.certified_delta));
            }
        }
    }

    let rho_commutes = config.rho_commutes.unwrap_or(rho_structural);
    let connecting_exact = layers.iter().all(|l| l.connecting_defect <= 1e-12);
    let branch = match (rho_commutes, connecting_exact) {
        (true, true) => CommutationBranch::Exact,
        (true, false) | (false, true) => CommutationBranch::OneSided,
        (false, false) => CommutationBranch::General,
    };
    let mut delta: f64 = 0.0;
    for l in &layers {
        delta = delta.max(l.equivalence_delta).max(l.resolvent_defect);
        if !connecting_exact {
            delta = delta.max(l.connecting_defect);
        }
        if !rho_commutes {
            delta = delta.max(l.rho_defect_estimate);
        }
    }
    if !(unit_bounded(arch) && unit_bounded(arch_tilde)) {
        reasons.push("a layer has R⁺ or L⁺ above 1".into());
    }

    let mut contour = None;
    'layers: for layer in arch.layers() {
        let bank = layer.bank();
        let mut sum = 0.0;
        for k in std::iter::once(bank.output()).chain(bank.filters()) {
            match cg_constant(k, k_bound, config.omega) {
                Ok(c) => sum += c * c,
                Err(Error::NotHolomorphic) => {
                    reasons.push(format!("filter {:?} is not holomorphic", k.kind));
                    contour = None;
                    break 'layers;
                }
                Err(e) => return Err(e),
            }
        }
        contour = Some(contour.unwrap_or(0.0f64).max(sum.sqrt()));
    }
    let frame_bound = max_frame_bound(&[arch, arch_tilde]);
    let applicable = reasons.is_empty() && contour.is_some();
    let constant = if applicable { contour.map(|d| graph_stability_constant(branch, depth, frame_bound, d)) } else { None };

    let rows = samples
        .par_iter()
        .enumerate()
        .map(|(index, f)| {
            let tree = scatter(arch, f)?;
            let tree_tilde = scatter(arch_tilde, &pairs[0].apply(f)?)?;
            let distance = apply_tree_outputs(&tree, &tree_tilde, &pairs)?;
            let norm = f.norm();
            let scale = delta * norm;
            Ok(SampleRow {
                index,
                input_norm: norm,
                distance,
                bound: constant.map_or(f64::NAN, |c| c * scale),
                ratio: if scale > 0.0 { distance / scale } else { 0.0 },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (empirical, margin, slack_factor, holds) = match constant {
        Some(c) => {
            let (e, m, s, h) = summarize(&rows, c);
            (e, Some(m), Some(s), Some(h))
        }
        None => (rows.iter().map(|r| r.ratio).fold(0.0, f64::max), None, None, None),
    };
    Ok(GraphPerturbationReport {
        depth,
        omega: config.omega,
        applicable,
        reason: if reasons.is_empty() { None } else { Some(reasons.join("; ")) },
        branch,
        rho_commutes,
        layers,
        delta,
        k_bound,
        frame_bound,
        contour_constant: contour,
        stability_constant: constant,
        empirical_max_ratio: empirical,
        margin,
        slack_factor,
        holds,
        samples: rows,
    })
}

/// `‖g(Δ̃)J − Jg(Δ)‖_op`.
pub fn filter_intertwining_defect(
    k: &FilterKernel,
    pair: &IdentificationPair,
    op: &ShiftOperator,
    op_tilde: &ShiftOperator,
) -> Result<f64> {
    if op.space() != pair.source() || op_tilde.space() != pair.target() {
        return Err(Error::SpaceMismatch);
    }
    let g = kernel_matrix(k, op, ZeroMode::Eigenspace)?;
    let gt = kernel_matrix(k, op_tilde, ZeroMode::Eigenspace)?;
    Ok(weighted_operator_norm(&(gt * pair.forward() - pair.forward() * g), pair.source(), pair.target()))
}

/// Both sides of `‖g(X) − g(Y)‖_F ≤ L_g ‖X − Y‖_F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzTransfer {
    pub filter_distance: f64,
    pub operator_distance: f64,
    pub lipschitz: f64,
}

impl LipschitzTransfer {
    pub fn holds(&self) -> bool {
        self.filter_distance <= self.lipschitz * self.operator_distance + SLACK
    }
}

/// `lipschitz` defaults to the kernel's own bound, which is a bound on the
/// real line; pass one valid on the union of both spectra otherwise.
pub fn lipschitz_transfer(k: &FilterKernel, x: &ShiftOperator, y: &ShiftOperator, lipschitz: Option<f64>) -> Result<LipschitzTransfer> {
    if x.space() != y.space() {
        return Err(Error::SpaceMismatch);
    }
    let lipschitz = lipschitz.or_else(|| k.lipschitz_bound()).ok_or(Error::MissingLipschitzBound(1))?;
    let gx = kernel_matrix(k, x, ZeroMode::Eigenspace)?;
    let gy = kernel_matrix(k, y, ZeroMode::Eigenspace)?;
    Ok(LipschitzTransfer {
        filter_distance: frobenius(&x.space().to_euclidean(&(gx - gy))),
        operator_distance: frobenius_distance(x, y)?,
        lipschitz,
    })
}

/// `Δ + E` with `E` a random operator that is self-adjoint in the weighted
/// inner product and has `‖E‖_F = delta`.
pub fn hermitian_perturbation<R: Rng + ?Sized>(op: &ShiftOperator, delta: f64, rng: &mut R) -> Result<ShiftOperator> {
    if !op.is_self_adjoint() {
        return Err(Error::Config("hermitian perturbations need a self-adjoint operator".into()));
    }
    let n = op.size();
    let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let mut h = &g + g.adjoint();
    let norm = frobenius(&h);
    if norm > 0.0 {
        h *= Complex64::new(delta / norm, 0.0);
    }
    let space: &GraphSignalSpace = op.space();
    ShiftOperator::custom(op.space(), op.matrix() + space.from_euclidean(&h))
}

/// Multiplies every edge weight by an independent factor in `[1 − eps, 1 + eps]`.
pub fn perturb_edge_weights<R: Rng + ?Sized>(adjacency: &DMatrix<f64>, eps: f64, rng: &mut R) -> DMatrix<f64> {
    let n = adjacency.nrows();
    let mut a = adjacency.clone();
    for i in 0..n {
        for j in i + 1..n {
            if a[(i, j)] != 0.0 {
                let v = a[(i, j)] * (1.0 + eps * rng.random_range(-1.0..=1.0));
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
    }
    a
}
