use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Pointwise nonlinearity `ρ` with `ρ(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    /// Complex modulus.
    #[default]
    Absolute,
    /// `max(Re, 0) + i·max(Im, 0)`.
    Relu,
    Identity,
}

impl Nonlinearity {
    pub fn apply(self, z: Complex64) -> Complex64 {
        match self {
            Nonlinearity::Absolute => Complex64::new(z.norm(), 0.0),
            Nonlinearity::Relu => Complex64::new(z.re.max(0.0), z.im.max(0.0)),
            Nonlinearity::Identity => z,
        }
    }

    /// `L⁺`, with respect to the modulus on ℂ.
    pub fn lipschitz_upper(self) -> f64 {
        1.0
    }

    /// `L⁻` with `‖ρ(f) − ρ(h)‖ ≥ L⁻‖f − h‖`, when one exists.
    pub fn lipschitz_lower(self) -> Option<f64> {
        match self {
            Nonlinearity::Identity => Some(1.0),
            Nonlinearity::Absolute | Nonlinearity::Relu => None,
        }
    }

    /// Whether `ρ(z) ≥ 0` for every input.
    pub fn is_non_negative(self) -> bool {
        self == Nonlinearity::Absolute
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ALL: [Nonlinearity; 3] = [Nonlinearity::Absolute, Nonlinearity::Relu, Nonlinearity::Identity];

    #[test]
    fn preserves_zero() {
        for rho in ALL {
            assert_eq!(rho.apply(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        }
        assert_eq!(Nonlinearity::Relu.apply(Complex64::new(-1.0, 2.0)), Complex64::new(0.0, 2.0));
    }

    proptest! {
        #[test]
        fn lipschitz_upper_holds(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64, d in -5.0..5.0f64) {
            let (x, y) = (Complex64::new(a, b), Complex64::new(c, d));
            for rho in ALL {
                prop_assert!((rho.apply(x) - rho.apply(y)).norm() <= rho.lipschitz_upper() * (x - y).norm() + 1e-12);
            }
        }
    }
}
