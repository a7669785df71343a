use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::architecture::{LayerModule, ScatteringArchitecture};
use super::domain::{LayerSignal, SignalDomain};
use super::tree::{scatter, FeatureTree};
use crate::error::{Error, Result};
use crate::graph::Signal;
use crate::tolerance;

/// Stability constant of `‖Φ_N(f) − Φ_N(h)‖ ≤ c‖f − h‖`:
/// `(1 + Σ_n max{B_n − 1, B_n(L⁺_n R⁺_n)² − 1, 0} Π_{k<n} B_k)^{1/2}`.
pub fn signal_stability_constant<D: SignalDomain>(arch: &ScatteringArchitecture<D>) -> f64 {
    let mut sum = 1.0;
    let mut prefix = 1.0;
    for layer in arch.layers() {
        let b = layer.frame_bounds().upper;
        let lr = layer.nonlinearity().lipschitz_upper() * layer.connecting_upper();
        sum += (b - 1.0).max(b * lr * lr - 1.0).max(0.0) * prefix;
        prefix *= b;
    }
    sum.sqrt()
}

/// Bound on `‖Φ_n(f) − Φ_{n+1}(f)‖` (zero-padded):
/// `(R⁺_{n+1} L⁺_{n+1}) (B_{n+1} W_n)^{1/2}`.
pub fn truncation_bound<D: SignalDomain, S: LayerSignal<Domain = D>>(
    arch: &ScatteringArchitecture<D>,
    tree: &FeatureTree<S>,
    n: usize,
) -> Result<f64> {
    let next = arch.layers().get(n).ok_or(Error::IndexOutOfRange { index: n + 1, limit: arch.depth() })?;
    let w = tree.layer_energy(n)?;
    let lr = next.nonlinearity().lipschitz_upper() * next.connecting_upper();
    Ok(lr * (next.frame_bounds().upper * w).sqrt())
}

/// `C⁺_N = Π max{1, B_n (L⁺_n R⁺_n)²}` over the first `n` layers.
pub fn upper_energy_constant<D: SignalDomain>(layers: &[LayerModule<D>]) -> f64 {
    layers
        .iter()
        .map(|l| {
            let lr = l.nonlinearity().lipschitz_upper() * l.connecting_upper();
            (l.frame_bounds().upper * lr * lr).max(1.0)
        })
        .product()
}

/// `C⁻_N = Π min{1, A_n (L⁻_n R⁻_n)²}`; needs lower Lipschitz constants.
pub fn lower_energy_constant<D: SignalDomain>(layers: &[LayerModule<D>]) -> Result<f64> {
    let mut c = 1.0;
    for (k, l) in layers.iter().enumerate() {
        let lower_rho = l.nonlinearity().lipschitz_lower().ok_or(Error::MissingLowerLipschitz(k + 1))?;
        let lower_p = l.connecting_lower().ok_or(Error::MissingLowerLipschitz(k + 1))?;
        let lr = lower_rho * lower_p;
        c *= (l.frame_bounds().lower * lr * lr).min(1.0);
    }
    Ok(c)
}

/// Which positive eigenvector `ψ_n` of `Δ_n` the energy certificate uses.
#[derive(Debug, Clone)]
pub enum EigenvectorChoice {
    /// The normalized constant vector, which must be an eigenvector.
    Constant,
    /// The eigenvector at this position of the sorted decomposition.
    Index(usize),
    /// A user-supplied eigenvector; it is normalized before use.
    Explicit(Signal),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerDecay {
    pub eigenvalue: f64,
    /// `m_n = min_i ψ_n[i]`.
    pub min_entry: f64,
    /// `η_n = Σ_γ |g_γ(λ_n)|²`.
    pub eta: f64,
    pub upper_frame_bound: f64,
    /// `1 − (m_n − η_n/B_n)`.
    pub factor_linear: f64,
    /// `1 − (m_n² − η_n/B_n)`.
    pub factor_squared: f64,
}

/// Per-layer ingredients of the energy decay bound on `W_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyCertificate {
    pub layers: Vec<LayerDecay>,
    /// `C⁺_n` for `n = 1..N`.
    pub upper_constants: Vec<f64>,
}

impl EnergyCertificate {
    /// `C⁺_n Π_{k≤n} (1 − (m_k² − η_k/B_k))` times `‖f‖²`; this is the form
    /// the inductive argument establishes.
    pub fn bound(&self, n: usize, norm_sqr: f64) -> f64 {
        self.cumulative(n, |l| l.factor_squared) * norm_sqr
    }

    /// The same bound with `m_k` in place of `m_k²`. It is tighter and is
    /// reported alongside, not relied on.
    pub fn bound_linear(&self, n: usize, norm_sqr: f64) -> f64 {
        self.cumulative(n, |l| l.factor_linear) * norm_sqr
    }

    fn cumulative(&self, n: usize, factor: impl Fn(&LayerDecay) -> f64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        let n = n.min(self.layers.len());
        self.upper_constants[n - 1] * self.layers[..n].iter().map(factor).product::<f64>()
    }
}

/// Evaluates `m_n`, `η_n`, `B_n` and `C⁺_n` for every layer. One choice may be
/// given for all layers, or one per layer.
pub fn energy_decay_certificate<D: SignalDomain>(
    arch: &ScatteringArchitecture<D>,
    choices: &[EigenvectorChoice],
) -> Result<EnergyCertificate> {
    if choices.len() != 1 && choices.len() != arch.depth() {
        return Err(Error::SizeMismatch { expected: arch.depth(), found: choices.len() });
    }
    let mut layers = Vec::with_capacity(arch.depth());
    let mut upper_constants = Vec::with_capacity(arch.depth());
    for (k, layer) in arch.layers().iter().enumerate() {
        let choice = if choices.len() == 1 { &choices[0] } else { &choices[k] };
        let (lambda, psi) = resolve_eigenvector(layer, choice)?;
        let min_entry = positive_min(&psi)?;
        let snapped = if lambda.norm() <= layer.shift().decompose()?.zero_threshold() {
            Complex64::new(0.0, 0.0)
        } else {
            lambda
        };
        let eta = layer.bank().filter_sum(snapped);
        let b = layer.frame_bounds().upper;
        if b * min_entry < eta {
            return Err(Error::GapAssumptionViolated { layer: k + 1, bm: b * min_entry, eta });
        }
        layers.push(LayerDecay {
            eigenvalue: snapped.re,
            min_entry,
            eta,
            upper_frame_bound: b,
            factor_linear: 1.0 - (min_entry - eta / b),
            factor_squared: 1.0 - (min_entry * min_entry - eta / b),
        });
        upper_constants.push(upper_energy_constant(&arch.layers()[..=k]));
    }
    Ok(EnergyCertificate { layers, upper_constants })
}

fn resolve_eigenvector<D: SignalDomain>(
    layer: &LayerModule<D>,
    choice: &EigenvectorChoice,
) -> Result<(Complex64, DVector<Complex64>)> {
    let op = layer.shift();
    let space = op.space();
    let psi = match choice {
        EigenvectorChoice::Constant => space.normalized_constant().into_values(),
        EigenvectorChoice::Index(i) => {
            let d = op.decompose()?;
            if *i >= d.len() {
                return Err(Error::IndexOutOfRange { index: *i, limit: d.len() });
            }
            return Ok((d.eigenvalues()[*i], d.eigenvectors().column(*i).into_owned()));
        }
        EigenvectorChoice::Explicit(s) => {
            if **s.space() != **space {
                return Err(Error::SpaceMismatch);
            }
            let n = s.norm();
            if n == 0.0 {
                return Err(Error::NotAnEigenvector(0.0));
            }
            s.values() / Complex64::new(n, 0.0)
        }
    };
    let image = op.matrix() * &psi;
    let w = space.weights();
    let rayleigh: Complex64 = psi.iter().zip(image.iter()).zip(w).map(|((a, b), &m)| a.conj() * b * m).sum();
    let residual: f64 =
        (&image - &psi * rayleigh).iter().zip(w).map(|(v, &m)| v.norm_sqr() * m).sum::<f64>().sqrt();
    if residual > tolerance::EIGEN * op.frobenius_norm().max(1.0) {
        return Err(Error::NotAnEigenvector(residual));
    }
    Ok((rayleigh, psi))
}

fn positive_min(psi: &DVector<Complex64>) -> Result<f64> {
    let mut min = f64::INFINITY;
    for v in psi.iter() {
        if v.im.abs() > tolerance::EIGEN || v.re <= 0.0 {
            return Err(Error::NonPositiveEigenvector(v.re));
        }
        min = min.min(v.re);
    }
    Ok(min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichCheck {
    /// `C⁻_N ‖f‖²`.
    pub lower: f64,
    /// `‖Φ_N(f)‖² + W_N(f)`.
    pub middle: f64,
    /// `C⁺_N ‖f‖²`.
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Checks `C⁻_N‖f‖² ≤ ‖Φ_N(f)‖² + W_N(f) ≤ C⁺_N‖f‖²`.
pub fn energy_sandwich_check<S: LayerSignal>(arch: &ScatteringArchitecture<S::Domain>, f: &S) -> Result<SandwichCheck> {
    let c_minus = lower_energy_constant(arch.layers())?;
    let c_plus = upper_energy_constant(arch.layers());
    let tree = scatter(arch, f)?;
    let norm_sqr = f.norm_sqr();
    let middle = tree.feature_norm_sqr() + tree.layer_energy(arch.depth())?;
    let slack = tolerance::EIGEN * norm_sqr.max(f64::MIN_POSITIVE);
    Ok(SandwichCheck {
        lower: c_minus * norm_sqr,
        middle,
        upper: c_plus * norm_sqr,
        lower_ok: c_minus * norm_sqr <= middle + slack,
        upper_ok: middle <= c_plus * norm_sqr + slack,
    })
}
