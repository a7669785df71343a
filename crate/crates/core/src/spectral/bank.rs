use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::FilterKernel;
use crate::error::{Error, Result};
use crate::graph::{same_space, ShiftOperator, Signal};
use crate::linalg::frobenius;
use crate::tolerance;

/// How a kernel's jump at zero (for `δ_0` and `cos̄`) acts on the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroMode {
    /// Plain functional calculus: the jump acts on the whole numerical kernel of `Δ`.
    #[default]
    Eigenspace,
    /// The jump acts only on the normalized constant vector `ψ`, i.e. through
    /// `ψψ†` instead of the kernel projector. Requires `Δ𝟙 = 0`.
    ConstantVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    pub fn is_tight(&self, tol: f64) -> bool {
        (self.upper - self.lower).abs() <= tol
    }
}

/// Named filter banks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "architecture_I", alias = "architecture_i", alias = "I")]
    ArchitectureI,
    #[serde(rename = "architecture_II", alias = "architecture_ii", alias = "II")]
    ArchitectureII,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "architecture_I" | "architecture_i" | "I" | "i" | "1" => Ok(Preset::ArchitectureI),
            "architecture_II" | "architecture_ii" | "II" | "ii" | "2" => Ok(Preset::ArchitectureII),
            other => Err(Error::Config(format!("unknown preset `{other}`"))),
        }
    }
}

impl Preset {
    pub fn bank(self) -> FilterBank {
        match self {
            Preset::ArchitectureI => architecture_i_bank(),
            Preset::ArchitectureII => architecture_ii_bank(),
        }
    }
}

/// An output kernel `χ` together with filters `{g_γ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    output: FilterKernel,
    filters: Vec<FilterKernel>,
    #[serde(default)]
    zero_mode: ZeroMode,
    #[serde(skip)]
    bounds: Option<FrameBounds>,
}

impl FilterBank {
    pub fn new(output: FilterKernel, filters: Vec<FilterKernel>) -> Result<Self> {
        if filters.is_empty() {
            return Err(Error::NoFilters);
        }
        Ok(FilterBank { output, filters, zero_mode: ZeroMode::Eigenspace, bounds: None })
    }

    pub fn with_zero_mode(mut self, mode: ZeroMode) -> Self {
        self.zero_mode = mode;
        self
    }

    pub fn output(&self) -> &FilterKernel {
        &self.output
    }

    pub fn filters(&self) -> &[FilterKernel] {
        &self.filters
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn zero_mode(&self) -> ZeroMode {
        self.zero_mode
    }

    /// Bounds recorded by the last successful [`FilterBank::validate`].
    pub fn bounds(&self) -> Option<FrameBounds> {
        self.bounds
    }

    /// `S(c) = |χ(c)|² + Σ_γ |g_γ(c)|²`.
    pub fn frame_sum(&self, c: Complex64) -> f64 {
        self.output.evaluate(c).norm_sqr() + self.filters.iter().map(|g| g.evaluate(c).norm_sqr()).sum::<f64>()
    }

    /// `Σ_γ |g_γ(c)|²`, the filter part of the frame sum.
    pub fn filter_sum(&self, c: Complex64) -> f64 {
        self.filters.iter().map(|g| g.evaluate(c).norm_sqr()).sum()
    }

    /// Minimum and maximum of the frame sum over `spectrum`.
    pub fn frame_bounds(&self, spectrum: &[Complex64]) -> Result<FrameBounds> {
        if spectrum.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        let (lower, upper) = spectrum
            .iter()
            .map(|&c| self.frame_sum(c))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
        Ok(FrameBounds { lower, upper })
    }

    /// Frame bounds over `n_grid` equispaced points of `[lo, hi]`, plus the
    /// point zero when it lies in the interval.
    pub fn frame_bounds_on_interval(&self, lo: f64, hi: f64, n_grid: usize) -> Result<FrameBounds> {
        let mut points: Vec<Complex64> = match n_grid {
            0 => Vec::new(),
            1 => vec![Complex64::new(lo, 0.0)],
            n => (0..n).map(|k| Complex64::new(lo + (hi - lo) * k as f64 / (n - 1) as f64, 0.0)).collect(),
        };
        if lo <= 0.0 && 0.0 <= hi {
            points.push(Complex64::new(0.0, 0.0));
        }
        self.frame_bounds(&points)
    }

    /// Frame bounds over the (zero-snapped) spectrum of `op`.
    pub fn frame_bounds_for(&self, op: &ShiftOperator) -> Result<FrameBounds> {
        self.frame_bounds(&op.decompose()?.snapped_eigenvalues())
    }

    /// Computes and records the frame bounds on `spectrum`; fails with
    /// `EmptyFrame` unless the lower bound is positive.
    pub fn validate(&mut self, spectrum: &[Complex64]) -> Result<FrameBounds> {
        let b = self.frame_bounds(spectrum)?;
        if !(b.lower > 0.0) {
            return Err(Error::EmptyFrame { lower: b.lower });
        }
        self.bounds = Some(b);
        Ok(b)
    }

    /// Matrix of `k(Δ)` under this bank's zero mode.
    pub fn kernel_matrix(&self, k: &FilterKernel, op: &ShiftOperator) -> Result<DMatrix<Complex64>> {
        kernel_matrix(k, op, self.zero_mode)
    }

    pub fn output_matrix(&self, op: &ShiftOperator) -> Result<DMatrix<Complex64>> {
        self.kernel_matrix(&self.output, op)
    }

    pub fn filter_matrices(&self, op: &ShiftOperator) -> Result<Vec<DMatrix<Complex64>>> {
        self.filters.iter().map(|g| self.kernel_matrix(g, op)).collect()
    }

    /// Compares `‖χ(Δ)f‖² + Σ‖g_γ(Δ)f‖²` against `A‖f‖²` and `B‖f‖²`.
    ///
    /// Uses the recorded bounds when present, otherwise the bounds on the
    /// spectrum of `op`.
    pub fn frame_inequality_check(&self, op: &ShiftOperator, f: &Signal) -> Result<FrameCheck> {
        if !same_space(op.space(), f.space()) {
            return Err(Error::SpaceMismatch);
        }
        let bounds = match self.bounds {
            Some(b) => b,
            None => self.frame_bounds_for(op)?,
        };
        let norm_sqr = f.norm_sqr();
        if norm_sqr == 0.0 {
            return Ok(FrameCheck { lower_ok: true, upper_ok: true, energy_ratio: 0.0 });
        }
        let mut energy = 0.0;
        for k in std::iter::once(&self.output).chain(self.filters.iter()) {
            let m = self.kernel_matrix(k, op)?;
            energy += Signal::from_parts(f.space().clone(), m * f.values()).norm_sqr();
        }
        let slack = tolerance::EIGEN * norm_sqr;
        Ok(FrameCheck {
            lower_ok: energy >= bounds.lower * norm_sqr - slack,
            upper_ok: energy <= bounds.upper * norm_sqr + slack,
            energy_ratio: energy / norm_sqr,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameCheck {
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub energy_ratio: f64,
}

/// Matrix of `k(Δ)`. With [`ZeroMode::ConstantVector`] a kernel with a jump at
/// zero is realized as `continuous(Δ) + jump · ψψ†`.
pub fn kernel_matrix(k: &FilterKernel, op: &ShiftOperator, mode: ZeroMode) -> Result<DMatrix<Complex64>> {
    let d = op.decompose()?;
    if let FilterKernel { kind: super::KernelKind::CustomSamples { .. }, .. } = k {
        for &v in d.snapped_eigenvalues().iter() {
            k.try_evaluate(v)?;
        }
    }
    let jump = k.jump_at_zero();
    if mode == ZeroMode::Eigenspace || jump == 0.0 {
        return Ok(d.function_matrix(|c| k.evaluate(c)));
    }
    let mut m = d.function_matrix(|c| k.continuous_part(c));
    let space = op.space();
    let ones = DMatrix::from_element(space.size(), 1, Complex64::new(1.0, 0.0));
    let residual = frobenius(&space.to_euclidean(&(op.matrix() * &ones)));
    if residual > tolerance::EIGEN * op.frobenius_norm().max(1.0) * space.total_weight().sqrt() {
        return Err(Error::ConstantVectorNotInKernel);
    }
    let total = space.total_weight();
    let w = space.weights();
    let n = space.size();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] += Complex64::new(jump * w[j] / total, 0.0);
        }
    }
    Ok(m)
}

/// `k(Δ)f = Σ k(λ_i)⟨φ_i, f⟩ φ_i`.
pub fn apply_filter(k: &FilterKernel, op: &ShiftOperator, f: &Signal) -> Result<Signal> {
    if !same_space(op.space(), f.space()) {
        return Err(Error::SpaceMismatch);
    }
    let m = kernel_matrix(k, op, ZeroMode::Eigenspace)?;
    Ok(Signal::from_parts(f.space().clone(), m * f.values()))
}

/// Filters `½ sin(π/2·)`, `½ cos̄(π/2·)`, `½ sin(π·)`, `½ cos̄(π·)` with output
/// `δ_0/√2`. On `[0, 1]` the frame sum is identically `½`.
///
/// The jump at zero acts on the constant vector, which coincides with the
/// plain functional calculus on connected graphs.
pub fn architecture_i_bank() -> FilterBank {
    FilterBank {
        output: FilterKernel::delta_zero(FRAC_1_SQRT_2),
        filters: vec![
            FilterKernel::sin(FRAC_PI_2, 0.5),
            FilterKernel::cosbar(FRAC_PI_2, 0.5),
            FilterKernel::sin(PI, 0.5),
            FilterKernel::cosbar(PI, 0.5),
        ],
        zero_mode: ZeroMode::ConstantVector,
        bounds: None,
    }
}

/// Filters `sin(π/2·)`, `cos(π/2·)`, `sin(π·)`, `cos(π·)` with the identity as
/// output function. The frame sum is `2 + c²`.
pub fn architecture_ii_bank() -> FilterBank {
    FilterBank {
        output: FilterKernel::identity_fn(),
        filters: vec![
            FilterKernel::sin(FRAC_PI_2, 1.0),
            FilterKernel::cos(FRAC_PI_2, 1.0),
            FilterKernel::sin(PI, 1.0),
            FilterKernel::cos(PI, 1.0),
        ],
        zero_mode: ZeroMode::Eigenspace,
        bounds: None,
    }
}

/// Filter bank as read from a config file: either `preset = "..."` or an
/// explicit `output` and `filters` list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankConfig {
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub output: Option<FilterKernel>,
    #[serde(default)]
    pub filters: Option<Vec<FilterKernel>>,
    #[serde(default)]
    pub zero_mode: Option<ZeroMode>,
}

impl BankConfig {
    pub fn build(&self) -> Result<FilterBank> {
        let mut bank = match (&self.preset, &self.output, &self.filters) {
            (Some(p), None, None) => p.bank(),
            (None, Some(out), Some(filters)) => FilterBank::new(out.clone(), filters.clone())?,
            (None, None, Some(filters)) => FilterBank::new(FilterKernel::constant(0.0), filters.clone())?,
            (None, _, None) => return Err(Error::NoFilters),
            (Some(_), _, _) => {
                return Err(Error::Config("a bank takes either a preset or explicit kernels, not both".into()))
            }
        };
        if let Some(mode) = self.zero_mode {
            bank.zero_mode = mode;
        }
        Ok(bank)
    }

    pub fn from_toml(text: &str) -> Result<FilterBank> {
        let cfg: BankConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{laplacian, rescaled_laplacian, GraphSignalSpace};
    use crate::random::{random_connected_adjacency, random_signal};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn p2() -> ShiftOperator {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        rescaled_laplacian(&a, &GraphSignalSpace::unit(2)).unwrap()
    }

    #[test]
    fn preset_bounds_on_unit_interval() {
        let b2 = architecture_ii_bank().frame_bounds_on_interval(0.0, 1.0, 10_000).unwrap();
        assert!((b2.lower - 2.0).abs() < 1e-12 && (b2.upper - 3.0).abs() < 1e-12);
        let b1 = architecture_i_bank().frame_bounds_on_interval(0.0, 1.0, 10_000).unwrap();
        assert!((b1.lower - 0.5).abs() < 1e-12 && (b1.upper - 0.5).abs() < 1e-12);
        assert!(b1.is_tight(1e-12));
        assert_eq!(architecture_ii_bank().len(), 4);
    }

    #[test]
    fn pythagorean_identity_for_architecture_ii() {
        let bank = architecture_ii_bank();
        for k in 0..10_000 {
            let c = -3.0 + 6.0 * k as f64 / 9_999.0;
            assert!((bank.frame_sum(r(c)) - (2.0 + c * c)).abs() <= 1e-12);
        }
        assert!(bank.frame_sum(r(0.5)) >= 2.0 - 1e-12);
    }

    #[test]
    fn zero_bank_is_not_a_frame() {
        let mut bank = FilterBank::new(FilterKernel::constant(0.0), vec![FilterKernel::constant(0.0)]).unwrap();
        assert!(matches!(bank.validate(&[r(0.0), r(1.0)]), Err(Error::EmptyFrame { .. })));
        assert_eq!(FilterBank::new(FilterKernel::constant(1.0), vec![]).unwrap_err(), Error::NoFilters);
        assert_eq!(bank.frame_bounds(&[]).unwrap_err(), Error::EmptySpectrum);
    }

    #[test]
    fn apply_filter_examples() {
        let op = p2();
        let u = op.space().clone();
        let f = Signal::from_real(&u, &[0.3, -1.2]).unwrap();
        let same = apply_filter(&FilterKernel::constant(1.0), &op, &f).unwrap();
        assert!(same.distance(&f).unwrap() < 1e-12);

        let d = op.decompose().unwrap();
        let phi1 = Signal::new(&u, d.eigenvectors().column(1).into_owned()).unwrap();
        let out = apply_filter(&FilterKernel::identity_fn(), &op, &phi1).unwrap();
        assert!(out.distance(&phi1).unwrap() < 1e-12);

        // δ_0 projects onto the constant vector: mean of f on both entries
        let proj = apply_filter(&FilterKernel::delta_zero(1.0), &op, &f).unwrap();
        let mean = (0.3 - 1.2) / 2.0;
        assert!(proj.distance(&Signal::from_real(&u, &[mean, mean]).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn constant_vector_mode_matches_eigenspace_on_connected_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_connected_adjacency(9, 0.3, &mut rng);
        let op = rescaled_laplacian(&a, &GraphSignalSpace::unit(9)).unwrap();
        for k in architecture_i_bank().filters().iter().chain([architecture_i_bank().output()]) {
            let m1 = kernel_matrix(k, &op, ZeroMode::Eigenspace).unwrap();
            let m2 = kernel_matrix(k, &op, ZeroMode::ConstantVector).unwrap();
            assert!(frobenius(&(m1 - m2)) < 1e-10);
        }
    }

    #[test]
    fn constant_vector_mode_needs_constant_in_kernel() {
        let op = ShiftOperator::custom(&GraphSignalSpace::unit(2), DMatrix::identity(2, 2)).unwrap();
        assert_eq!(
            kernel_matrix(&FilterKernel::delta_zero(1.0), &op, ZeroMode::ConstantVector).unwrap_err(),
            Error::ConstantVectorNotInKernel
        );
    }

    #[test]
    fn frame_check_examples() {
        let op = p2();
        let u = op.space().clone();
        let bank = architecture_i_bank();
        let f = Signal::from_real(&u, &[2.0, -0.5]).unwrap();
        let c = bank.frame_inequality_check(&op, &f).unwrap();
        assert!(c.lower_ok && c.upper_ok);
        assert!((c.energy_ratio - 0.5).abs() < 1e-8);

        let zero = u.zero();
        let c = bank.frame_inequality_check(&op, &zero).unwrap();
        assert_eq!((c.lower_ok, c.upper_ok, c.energy_ratio), (true, true, 0.0));

        let d = op.decompose().unwrap();
        let phi1 = Signal::new(&u, d.eigenvectors().column(1).into_owned()).unwrap();
        let c = architecture_ii_bank().frame_inequality_check(&op, &phi1).unwrap();
        assert!((c.energy_ratio - 3.0).abs() < 1e-8);
    }

    #[test]
    fn frame_sandwich_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 3..13 {
            let a = random_connected_adjacency(n, 0.4, &mut rng);
            let op = rescaled_laplacian(&a, &GraphSignalSpace::unit(n)).unwrap();
            for bank in [architecture_i_bank(), architecture_ii_bank()] {
                let f = random_signal(op.space(), true, &mut rng);
                let c = bank.frame_inequality_check(&op, &f).unwrap();
                assert!(c.lower_ok && c.upper_ok, "n = {n}: {c:?}");
            }
        }
    }

    #[test]
    fn functional_calculus_is_multiplicative_for_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_connected_adjacency(7, 0.5, &mut rng);
        let space = GraphSignalSpace::new(7, Some(vec![1.0, 2.0, 1.5, 1.0, 3.0, 1.0, 1.0])).unwrap();
        let op = laplacian(&a, &space, false).unwrap();
        let g = FilterKernel::polynomial(vec![0.5, -1.0, 0.25]);
        let h = FilterKernel::polynomial(vec![1.0, 2.0]);
        let gh = FilterKernel::polynomial(vec![0.5, 0.0, -1.75, 0.5]);
        let f = random_signal(&space, false, &mut rng);
        let lhs = apply_filter(&g, &op, &apply_filter(&h, &op, &f).unwrap()).unwrap();
        let rhs = apply_filter(&gh, &op, &f).unwrap();
        assert!(lhs.distance(&rhs).unwrap() < tolerance::EIGEN * f.norm().max(1.0) * 100.0);
    }

    #[test]
    fn bank_config_forms() {
        let b = BankConfig::from_toml("preset = \"architecture_II\"").unwrap();
        assert_eq!(b, architecture_ii_bank());
        let text = r#"
            output = { kind = "identity_fn" }
            filters = [
                { kind = "sin_scaled", scale = 1.5707963267948966 },
                { kind = "cos_scaled", scale = 1.5707963267948966 },
            ]
        "#;
        let b = BankConfig::from_toml(text).unwrap();
        assert_eq!(b.len(), 2);
        assert!(matches!(BankConfig::from_toml("filters = []"), Err(Error::NoFilters)));
        assert!(matches!(BankConfig::from_toml("preset = \"nope\""), Err(Error::Config(_))));
    }
}
