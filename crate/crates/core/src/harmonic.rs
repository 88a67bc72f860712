//! Closed-form motion of a driven harmonic oscillator.
//!
//! For `m ẍ = -m ω₀² x + q E(t)` with `E(t) = Σ_k ε_k cos(Ω_k t + φ_k)` and no
//! component at `ω₀`, the trajectory is
//!
//! ```text
//! x(t) = x₀ cos ω₀t + p₀/(mω₀) sin ω₀t
//!      + Σ_k A_k [cos(Ω_k t + φ_k) − cos φ_k cos ω₀t + (Ω_k/ω₀) sin φ_k sin ω₀t]
//! A_k  = q ε_k / (m (ω₀² − Ω_k²))
//! ```
//!
//! The motion contains only the frequencies `ω₀` and `Ω_k`, so its time
//! average vanishes for any unbiased drive. This is the reference used to
//! validate both engines.

use crate::error::{Error, Result};
use crate::field::DriveField;

const RESONANCE_TOLERANCE: f64 = 1e-12;

/// Initial condition, oscillator parameters and drive for the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSolution {
    pub x0: f64,
    pub p0: f64,
    pub omega0: f64,
    pub mass: f64,
    pub charge: f64,
    pub field: DriveField,
}

struct Term {
    amp: f64,
    freq: f64,
    phase: f64,
}

impl HarmonicSolution {
    pub fn new(x0: f64, p0: f64, omega0: f64, mass: f64, charge: f64, field: DriveField) -> Result<Self> {
        if !(omega0 > 0.0) || !(mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega0 and mass must be > 0, got {omega0}, {mass}"
            )));
        }
        let sol = Self { x0, p0, omega0, mass, charge, field };
        sol.check_resonance()?;
        Ok(sol)
    }

    fn check_resonance(&self) -> Result<()> {
        let w = self.field.fundamental_omega();
        for c in self.field.components() {
            let freq = f64::from(c.harmonic_index) * w;
            if (freq - self.omega0).abs() <= RESONANCE_TOLERANCE * self.omega0 {
                return Err(Error::ResonantComponent(freq));
            }
        }
        Ok(())
    }

    fn terms(&self) -> impl Iterator<Item = Term> + '_ {
        let w = self.field.fundamental_omega();
        let w0sq = self.omega0 * self.omega0;
        self.field.components().iter().map(move |c| {
            let freq = f64::from(c.harmonic_index) * w;
            Term {
                amp: self.field.sign() * self.charge * c.amplitude / (self.mass * (w0sq - freq * freq)),
                freq,
                phase: self.field.effective_phase(c),
            }
        })
    }

    /// `(x(t), p(t))`.
    pub fn trajectory(&self, t: f64) -> Result<(f64, f64)> {
        self.check_resonance()?;
        let w0 = self.omega0;
        let (s0, c0) = (w0 * t).sin_cos();
        let mut x = self.x0 * c0 + self.p0 / (self.mass * w0) * s0;
        let mut v = -self.x0 * w0 * s0 + self.p0 / self.mass * c0;
        for term in self.terms() {
            let (sp, cp) = term.phase.sin_cos();
            let (sd, cd) = (term.freq * t + term.phase).sin_cos();
            let ratio = term.freq / w0;
            x += term.amp * (cd - cp * c0 + ratio * sp * s0);
            v += term.amp * (-term.freq * sd + w0 * cp * s0 + term.freq * sp * c0);
        }
        Ok((x, self.mass * v))
    }

    /// `(1/τ) ∫₀^τ x(t) dt` over `τ = n_periods · T`.
    pub fn dc_component(&self, n_periods: u32) -> Result<f64> {
        if n_periods == 0 {
            return Err(Error::InvalidParameter("n_periods must be >= 1".into()));
        }
        self.check_resonance()?;
        let tau = f64::from(n_periods) * self.field.period();
        let w0 = self.omega0;
        let (s0, c0) = (w0 * tau).sin_cos();
        // ∫ cos ω₀t / τ and ∫ sin ω₀t / τ
        let mean_cos = s0 / (w0 * tau);
        let mean_sin = (1.0 - c0) / (w0 * tau);
        let mut dc = self.x0 * mean_cos + self.p0 / (self.mass * w0) * mean_sin;
        for term in self.terms() {
            let (sp, cp) = term.phase.sin_cos();
            let driven = ((term.freq * tau + term.phase).sin() - sp) / (term.freq * tau);
            dc += term.amp * (driven - cp * mean_cos + term.freq / w0 * sp * mean_sin);
        }
        Ok(dc)
    }
}

/// Free-function form of [`HarmonicSolution::trajectory`].
pub fn exact_harmonic_trajectory(sol: &HarmonicSolution, t: f64) -> Result<(f64, f64)> {
    sol.trajectory(t)
}

/// Free-function form of [`HarmonicSolution::dc_component`].
pub fn harmonic_dc_component(sol: &HarmonicSolution, n_periods: u32) -> Result<f64> {
    sol.dc_component(n_periods)
}
