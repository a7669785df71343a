use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of a filter kernel before scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    SinScaled,
    CosScaled,
    /// `cos` with the value at zero replaced by zero.
    CosbarScaled,
    /// One at zero, zero elsewhere.
    DeltaZero,
    Constant,
    IdentityFn,
    /// `Σ_k coefficients[k] x^k`.
    Polynomial { coefficients: Vec<f64> },
    /// A function known only on a table of points; evaluated at the nearest
    /// point, which must lie within `max_distance`.
    CustomSamples { points: Vec<f64>, values: Vec<f64>, max_distance: f64 },
}

/// A scalar function `c ↦ amplitude · base(scale · c)` used through the
/// functional calculus of a normal operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterKernel {
    #[serde(flatten)]
    pub kind: KernelKind,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Declared Lipschitz constant; overrides the built-in analytic value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

fn one() -> f64 {
    1.0
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl FilterKernel {
    pub fn new(kind: KernelKind, scale: f64, amplitude: f64) -> Self {
        FilterKernel { kind, scale, amplitude, lipschitz: None }
    }

    pub fn sin(scale: f64, amplitude: f64) -> Self {
        Self::new(KernelKind::SinScaled, scale, amplitude)
    }

    pub fn cos(scale: f64, amplitude: f64) -> Self {
        Self::new(KernelKind::CosScaled, scale, amplitude)
    }

    pub fn cosbar(scale: f64, amplitude: f64) -> Self {
        Self::new(KernelKind::CosbarScaled, scale, amplitude)
    }

    pub fn delta_zero(amplitude: f64) -> Self {
        Self::new(KernelKind::DeltaZero, 1.0, amplitude)
    }

    pub fn constant(value: f64) -> Self {
        Self::new(KernelKind::Constant, 1.0, value)
    }

    pub fn identity_fn() -> Self {
        Self::new(KernelKind::IdentityFn, 1.0, 1.0)
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        Self::new(KernelKind::Polynomial { coefficients }, 1.0, 1.0)
    }

    pub fn custom_samples(points: Vec<f64>, values: Vec<f64>, max_distance: f64) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::SizeMismatch { expected: points.len(), found: values.len() });
        }
        if points.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        Ok(Self::new(KernelKind::CustomSamples { points, values, max_distance }, 1.0, 1.0))
    }

    pub fn with_lipschitz(mut self, bound: f64) -> Self {
        self.lipschitz = Some(bound);
        self
    }

    /// Pointwise value. Custom-sample kernels return zero away from their
    /// table; use [`FilterKernel::try_evaluate`] to surface that as an error.
    pub fn evaluate(&self, c: Complex64) -> Complex64 {
        self.try_evaluate(c).unwrap_or(ZERO)
    }

    pub fn try_evaluate(&self, c: Complex64) -> Result<Complex64> {
        let x = c * self.scale;
        let base = match &self.kind {
            KernelKind::SinScaled => x.sin(),
            KernelKind::CosScaled => x.cos(),
            KernelKind::CosbarScaled => {
                if c == ZERO {
                    ZERO
                } else {
                    x.cos()
                }
            }
            KernelKind::DeltaZero => {
                if c == ZERO {
                    Complex64::new(1.0, 0.0)
                } else {
                    ZERO
                }
            }
            KernelKind::Constant => Complex64::new(1.0, 0.0),
            KernelKind::IdentityFn => x,
            KernelKind::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(ZERO, |acc, &a| acc * x + a)
            }
            KernelKind::CustomSamples { points, values, max_distance } => {
                let (best, dist) = points
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| (k, (x - p).norm()))
                    .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
                if dist > *max_distance {
                    return Err(Error::SampleOutOfRange { point: format!("{c}"), max_distance: *max_distance });
                }
                Complex64::new(values[best], 0.0)
            }
        };
        Ok(base * self.amplitude)
    }

    /// Whether the kernel extends to an entire function, which the contour
    /// estimates of the resolvent-based stability bound require.
    pub fn is_holomorphic(&self) -> bool {
        matches!(
            self.kind,
            KernelKind::SinScaled
                | KernelKind::CosScaled
                | KernelKind::Constant
                | KernelKind::IdentityFn
                | KernelKind::Polynomial { .. }
        )
    }

    /// Global Lipschitz constant, if known.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        if self.lipschitz.is_some() {
            return self.lipschitz;
        }
        let a = (self.scale * self.amplitude).abs();
        match self.kind {
            KernelKind::SinScaled | KernelKind::CosScaled | KernelKind::IdentityFn => Some(a),
            KernelKind::Constant => Some(0.0),
            KernelKind::Polynomial { ref coefficients } if coefficients.len() <= 2 => {
                Some(a * coefficients.get(1).copied().unwrap_or(0.0).abs())
            }
            _ => None,
        }
    }

    /// Lipschitz constant valid for operator pairs whose kernel projectors
    /// coincide. The jump at zero of `δ_0` and `cos̄` then cancels, leaving
    /// `0` and the bound of the underlying cosine.
    pub fn lipschitz_bound_with_shared_kernel(&self) -> Option<f64> {
        if self.lipschitz.is_some() {
            return self.lipschitz;
        }
        match self.kind {
            KernelKind::DeltaZero => Some(0.0),
            KernelKind::CosbarScaled => Some((self.scale * self.amplitude).abs()),
            _ => self.lipschitz_bound(),
        }
    }

    /// Splits the kernel as `continuous(c) + jump · δ_0(c)`. Returns the jump.
    pub fn jump_at_zero(&self) -> f64 {
        match self.kind {
            KernelKind::DeltaZero => self.amplitude,
            KernelKind::CosbarScaled => -self.amplitude,
            _ => 0.0,
        }
    }

    /// The continuous part of the split described in [`FilterKernel::jump_at_zero`].
    pub fn continuous_part(&self, c: Complex64) -> Complex64 {
        match self.kind {
            KernelKind::DeltaZero => ZERO,
            KernelKind::CosbarScaled => (c * self.scale).cos() * self.amplitude,
            _ => self.evaluate(c),
        }
    }
}
