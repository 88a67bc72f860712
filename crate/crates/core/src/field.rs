//! Zero-mean periodic driving fields as finite Fourier series.
//!
//! A [`DriveField`] is `E(t) = Σ_k ε_k cos(n_k ω (t + αT/2π) + φ_k)` with
//! positive integer harmonic indices `n_k`. There is no constant term, so
//! every field has zero temporal mean. The three temporal symmetries that
//! control rectification are decided exactly by [`detect_symmetries`]:
//!
//! * **sym-a**: `E(t + T/2) = -E(t)`
//! * **sym-b**: `E` is even about some time `t'`
//! * **sym-c**: `E` is odd about some time `t'`

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};

/// Tolerance, in radians, for the phase congruences of the symmetry tests.
pub const ANGULAR_TOLERANCE: f64 = 1e-9;

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// One term `ε cos(n ω t + φ)` of a drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicComponent {
    pub harmonic_index: u32,
    pub amplitude: f64,
    /// Radians in `[0, 2π)`.
    pub phase: f64,
}

impl HarmonicComponent {
    pub fn new(harmonic_index: u32, amplitude: f64, phase: f64) -> Self {
        Self {
            harmonic_index,
            amplitude,
            phase: wrap_phase(phase),
        }
    }
}

/// A zero-mean periodic field with a global phase `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveField {
    fundamental_omega: f64,
    components: Vec<HarmonicComponent>,
    global_phase_alpha: f64,
    /// `±1`, multiplies the whole series.
    sign: f64,
}

impl DriveField {
    /// Builds a field from its components.
    ///
    /// Zero-amplitude terms are dropped, components are sorted by harmonic
    /// index, and a common factor of the indices is folded into the
    /// fundamental frequency so that `2π/ω` is the minimal period.
    pub fn new(
        fundamental_omega: f64,
        components: impl IntoIterator<Item = HarmonicComponent>,
    ) -> Result<Self> {
        if !(fundamental_omega > 0.0) || !fundamental_omega.is_finite() {
            return Err(Error::NonPositiveFrequency(fundamental_omega));
        }
        let mut kept = Vec::new();
        for c in components {
            if c.harmonic_index == 0 {
                return Err(Error::ZeroHarmonic);
            }
            if !(c.amplitude >= 0.0) || !c.amplitude.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "amplitude must be finite and >= 0, got {}",
                    c.amplitude
                )));
            }
            if !c.phase.is_finite() {
                return Err(Error::InvalidParameter("phase must be finite".into()));
            }
            if c.amplitude > 0.0 {
                kept.push(HarmonicComponent::new(c.harmonic_index, c.amplitude, c.phase));
            }
        }
        kept.sort_by_key(|c| c.harmonic_index);
        if let Some(w) = kept.windows(2).find(|w| w[0].harmonic_index == w[1].harmonic_index) {
            return Err(Error::DuplicateHarmonic(w[0].harmonic_index));
        }

        let mut omega = fundamental_omega;
        let g = kept.iter().fold(0, |g, c| gcd(g, c.harmonic_index));
        if g > 1 {
            for c in &mut kept {
                c.harmonic_index /= g;
            }
            omega *= f64::from(g);
        }

        Ok(Self {
            fundamental_omega: omega,
            components: kept,
            global_phase_alpha: 0.0,
            sign: 1.0,
        })
    }

    /// `ε_n cos(nωt + φ_n) + ε_m cos(mωt + φ_m)` with coprime `n`, `m`.
    pub fn bichromatic(
        n: u32,
        m: u32,
        eps_n: f64,
        eps_m: f64,
        phi_n: f64,
        phi_m: f64,
        omega: f64,
    ) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::NonPositiveFrequency(omega));
        }
        if n == 0 || m == 0 {
            return Err(Error::ZeroHarmonic);
        }
        if n == m {
            return Err(Error::DuplicateHarmonic(n));
        }
        if gcd(n, m) != 1 {
            return Err(Error::NonCoprimeIndices(n, m));
        }
        Self::new(
            omega,
            [
                HarmonicComponent::new(n, eps_n, phi_n),
                HarmonicComponent::new(m, eps_m, phi_m),
            ],
        )
    }

    /// A field with no components (`E ≡ 0`) and period `2π/ω`.
    pub fn zero(omega: f64) -> Result<Self> {
        Self::new(omega, [])
    }

    pub fn with_global_phase(mut self, alpha: f64) -> Self {
        self.global_phase_alpha = wrap_phase(alpha);
        self
    }

    /// `−E(t)`, bit for bit. The components are unchanged and the overall
    /// sign flips.
    pub fn negated(&self) -> Self {
        Self { sign: -self.sign, ..self.clone() }
    }

    /// This field carrying the overall sign of `other`.
    pub fn signed_like(mut self, other: &DriveField) -> Self {
        self.sign = other.sign;
        self
    }

    /// Overall sign of the series, `+1` unless negated.
    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn fundamental_omega(&self) -> f64 {
        self.fundamental_omega
    }

    pub fn period(&self) -> f64 {
        TAU / self.fundamental_omega
    }

    pub fn components(&self) -> &[HarmonicComponent] {
        &self.components
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase_alpha
    }

    pub fn max_harmonic(&self) -> u32 {
        self.components.iter().map(|c| c.harmonic_index).max().unwrap_or(0)
    }

    /// Sum of amplitudes, an upper bound on `‖E‖∞`.
    pub fn amplitude_sum(&self) -> f64 {
        self.components.iter().map(|c| c.amplitude).sum()
    }

    /// Phase of component `c` with the global phase folded in, `φ + nα`.
    pub fn effective_phase(&self, c: &HarmonicComponent) -> f64 {
        c.phase + f64::from(c.harmonic_index) * self.global_phase_alpha
    }

    /// `E(t + αT/2π)`.
    pub fn evaluate(&self, t: f64) -> f64 {
        let wt = self.fundamental_omega * t;
        let sum: f64 = self
            .components
            .iter()
            .map(|c| c.amplitude * (f64::from(c.harmonic_index) * wt + self.effective_phase(c)).cos())
            .sum();
        self.sign * sum
    }

    /// Largest `|E|` over a uniform grid of `samples` points in one period.
    pub fn sup_norm(&self, samples: usize) -> f64 {
        let t = self.period();
        (0..samples)
            .map(|i| self.evaluate(t * i as f64 / samples as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// Which of the three temporal symmetries a field has.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSymmetryReport {
    /// sym-a: `E(t + T/2) = -E(t)`.
    pub half_period_antisymmetric: bool,
    /// sym-b witness: a `t'` in `[0, T)` about which `E` is even.
    pub even_point: Option<f64>,
    /// sym-c witness: a `t'` in `[0, T)` about which `E` is odd.
    pub odd_point: Option<f64>,
}

impl FieldSymmetryReport {
    pub fn any(&self) -> bool {
        self.half_period_antisymmetric || self.even_point.is_some() || self.odd_point.is_some()
    }
}

fn angular_distance_mod_pi(angle: f64) -> f64 {
    let r = angle.rem_euclid(PI);
    r.min(PI - r)
}

/// Smallest `t'` in `[0, T)` with `n_k ω t' + ψ_k ≡ offset (mod π)` for every
/// component, where `ψ_k` is the effective phase.
fn congruence_point(field: &DriveField, offset: f64) -> Option<f64> {
    let first = field.components.first()?;
    let n1 = f64::from(first.harmonic_index);
    let psi1 = field.effective_phase(first);
    (0..2 * first.harmonic_index)
        .map(|j| wrap_phase((offset + f64::from(j) * PI - psi1) / n1))
        .filter(|&theta| {
            field.components.iter().all(|c| {
                let arg = f64::from(c.harmonic_index) * theta + field.effective_phase(c) - offset;
                angular_distance_mod_pi(arg) <= ANGULAR_TOLERANCE
            })
        })
        .map(|theta| theta / field.fundamental_omega)
        .min_by(f64::total_cmp)
}

/// Decides sym-a exactly from index parity and searches for sym-b/sym-c points.
pub fn detect_symmetries(field: &DriveField) -> Result<FieldSymmetryReport> {
    if field.components.is_empty() {
        return Err(Error::EmptyField);
    }
    Ok(FieldSymmetryReport {
        half_period_antisymmetric: field.components.iter().all(|c| c.harmonic_index % 2 == 1),
        even_point: congruence_point(field, 0.0),
        odd_point: congruence_point(field, FRAC_PI_2),
    })
}
