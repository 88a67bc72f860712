//! Inversion-symmetric one-dimensional potentials, `V(-x) = V(x)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    /// `V = m ω₀² x² / 2`.
    Harmonic { omega0: f64, mass: f64 },
    /// `V = a x²/2 + b x⁴/4`, confining for `b > 0`.
    Quartic { a: f64, b: f64 },
    /// `V = v0 cos(k x)`.
    CosineLattice { v0: f64, k: f64 },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} must be > 0, got {v}")));
        match *self {
            PotentialSpec::Harmonic { omega0, mass } => {
                if !(omega0 > 0.0) {
                    return bad("omega0", omega0);
                }
                if !(mass > 0.0) {
                    return bad("mass", mass);
                }
            }
            PotentialSpec::Quartic { a, b } => {
                if !a.is_finite() {
                    return Err(Error::InvalidParameter(format!("a must be finite, got {a}")));
                }
                if !(b > 0.0) {
                    return bad("b", b);
                }
            }
            PotentialSpec::CosineLattice { v0, k } => {
                if !(v0 > 0.0) {
                    return bad("v0", v0);
                }
                if !(k > 0.0) {
                    return bad("k", k);
                }
            }
        }
        Ok(())
    }

    /// Whether the potential confines every trajectory.
    pub fn is_bound(&self) -> bool {
        !matches!(self, PotentialSpec::CosineLattice { .. })
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            PotentialSpec::Harmonic { omega0, mass } => 0.5 * mass * omega0 * omega0 * x * x,
            PotentialSpec::Quartic { a, b } => {
                let x2 = x * x;
                0.5 * a * x2 + 0.25 * b * x2 * x2
            }
            PotentialSpec::CosineLattice { v0, k } => v0 * (k * x).cos(),
        }
    }

    /// `-dV/dx`.
    pub fn force(&self, x: f64) -> f64 {
        match *self {
            PotentialSpec::Harmonic { omega0, mass } => -mass * omega0 * omega0 * x,
            PotentialSpec::Quartic { a, b } => -(a * x + b * x * x * x),
            PotentialSpec::CosineLattice { v0, k } => v0 * k * (k * x).sin(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_values() {
        assert_eq!(PotentialSpec::Harmonic { omega0: 1.0, mass: 1.0 }.value(2.0), 2.0);
        assert_eq!(PotentialSpec::CosineLattice { v0: 1.0, k: 1.0 }.value(PI), -1.0);
        assert_eq!(PotentialSpec::Harmonic { omega0: 2.0, mass: 1.0 }.force(1.0), -4.0);
        assert_eq!(PotentialSpec::Quartic { a: 1.0, b: 2.0 }.force(1.0), -3.0);
    }

    #[test]
    fn force_vanishes_at_origin() {
        for spec in specs() {
            assert_eq!(spec.force(0.0), 0.0);
        }
    }

    #[test]
    fn validation() {
        assert!(PotentialSpec::Quartic { a: -1.0, b: 1.0 }.validate().is_ok());
        assert!(PotentialSpec::Quartic { a: 1.0, b: 0.0 }.validate().is_err());
        assert!(PotentialSpec::Harmonic { omega0: 0.0, mass: 1.0 }.validate().is_err());
        assert!(PotentialSpec::CosineLattice { v0: 1.0, k: -1.0 }.validate().is_err());
        assert!(!PotentialSpec::CosineLattice { v0: 1.0, k: 1.0 }.is_bound());
    }

    fn specs() -> [PotentialSpec; 4] {
        [
            PotentialSpec::Harmonic { omega0: 1.3, mass: 0.7 },
            PotentialSpec::Quartic { a: 1.0, b: 1.0 },
            PotentialSpec::Quartic { a: -1.0, b: 0.5 },
            PotentialSpec::CosineLattice { v0: 0.8, k: 1.7 },
        ]
    }

    proptest! {
        #[test]
        fn parity_is_exact(x in -50.0f64..50.0) {
            for spec in specs() {
                prop_assert_eq!(spec.value(-x), spec.value(x));
                prop_assert_eq!(spec.force(-x), -spec.force(x));
            }
        }

        #[test]
        fn force_is_minus_gradient(x in -10.0f64..10.0) {
            let h = 1e-5;
            for spec in specs() {
                let fd = (spec.value(x + h) - spec.value(x - h)) / (2.0 * h);
                let f = spec.force(x);
                prop_assert!((f + fd).abs() <= 1e-6 * (1.0 + f.abs()), "{spec:?} x={x} f={f} fd={fd}");
            }
        }
    }
}
