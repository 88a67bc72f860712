//! Wavefunctions on a uniform periodic grid, evolved by Strang splitting.
//!
//! One step of length `dt` is
//!
//! ```text
//! ψ ← e^{-i T dt/2ħ} e^{-i (V(x) − q E(t + dt/2) x) dt/ħ} e^{-i T dt/2ħ} ψ
//! ```
//!
//! with the kinetic factors applied in momentum space. Consecutive half
//! kinetic factors between two recorded samples are fused, so a step costs
//! two FFTs.

mod ground;
mod wigner;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::classical::{check_step, MeanSeries};
use crate::error::{Error, Result};
use crate::field::DriveField;
use crate::potential::PotentialSpec;

pub use ground::{ground_state, ground_state_with_mass};
pub use wigner::{wigner_transform, WignerGrid};

/// Tolerated deviation of the norm from its initial value.
pub const NORM_TOLERANCE: f64 = 1e-8;
/// Largest allowed probability in the outer 5% of the box on either side.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

/// Uniform grid `x_j = x_min + j dx`, `dx = (x_max − x_min)/n`, periodic
/// with period `x_max − x_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub hbar: f64,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, hbar: f64) -> Result<Self> {
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidParameter(format!("need x_max > x_min, got [{x_min}, {x_max}]")));
        }
        if n_points < 128 || !n_points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "n_points must be a power of two >= 128, got {n_points}"
            )));
        }
        if !(hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be > 0, got {hbar}")));
        }
        Ok(Self { x_min, x_max, n_points, hbar })
    }

    /// Box `[-half_width, half_width)`.
    pub fn symmetric(half_width: f64, n_points: usize, hbar: f64) -> Result<Self> {
        Self::new(-half_width, half_width, n_points, hbar)
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Spacing `2πħ/L` of the momentum grid.
    pub fn dp(&self) -> f64 {
        2.0 * PI * self.hbar / self.length()
    }

    /// Momenta in FFT order: `0, dp, …, (n/2 − 1) dp, −(n/2) dp, …, −dp`.
    pub fn momenta(&self) -> Vec<f64> {
        let n = self.n_points as isize;
        (0..n)
            .map(|j| {
                let f = if j < n / 2 { j } else { j - n };
                f as f64 * self.dp()
            })
            .collect()
    }

    /// Index of the grid point at `−x_j`, when the box is centred at zero.
    pub fn mirror(&self, j: usize) -> usize {
        (self.n_points - j) % self.n_points
    }
}

/// A pure state `ψ(x_j)` at time `time` for a particle of the given mass and charge.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    pub grid: GridSpec,
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
    pub mass: f64,
    pub charge: f64,
}

impl Wavefunction {
    pub fn new(grid: GridSpec, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points {
            return Err(Error::InvalidParameter(format!(
                "expected {} amplitudes, got {}",
                grid.n_points,
                amplitudes.len()
            )));
        }
        Ok(Self { grid, amplitudes, time: 0.0, mass: 1.0, charge: 1.0 })
    }

    pub fn with_particle(mut self, mass: f64, charge: f64) -> Self {
        self.mass = mass;
        self.charge = charge;
        self
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalize(&mut self) {
        let s = 1.0 / self.norm().sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a *= s);
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn mean_x(&self) -> f64 {
        let g = &self.grid;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| g.x(j) * a.norm_sqr())
            .sum::<f64>()
            * g.dx()
    }

    pub fn mean_x2(&self) -> f64 {
        let g = &self.grid;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| g.x(j) * g.x(j) * a.norm_sqr())
            .sum::<f64>()
            * g.dx()
    }

    /// `(⟨p⟩, ⟨p²⟩)` from the momentum representation.
    pub fn momentum_moments(&self) -> (f64, f64) {
        let mut buf = self.amplitudes.clone();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        momentum_moments_from_spectrum(&self.grid, &buf)
    }

    pub fn mean_p(&self) -> f64 {
        self.momentum_moments().0
    }

    /// `⟨p²/2m + V(x) − q e x⟩` for a fixed field value `e`.
    pub fn energy(&self, spec: &PotentialSpec, e: f64) -> f64 {
        let (_, p2) = self.momentum_moments();
        let g = &self.grid;
        let pot: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| (spec.value(g.x(j)) - self.charge * e * g.x(j)) * a.norm_sqr())
            .sum::<f64>()
            * g.dx();
        0.5 * p2 / self.mass + pot
    }

    /// Probability in the outer 5% of the box on either side.
    pub fn boundary_occupancy(&self) -> f64 {
        boundary_occupancy(&self.grid, &self.amplitudes)
    }

    /// `⟨φ|ψ⟩`.
    pub fn overlap(&self, other: &Wavefunction) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }
}

fn momentum_moments_from_spectrum(grid: &GridSpec, spectrum: &[Complex64]) -> (f64, f64) {
    let scale = grid.dx() / grid.n_points as f64;
    let (mut p1, mut p2) = (0.0, 0.0);
    for (p, a) in grid.momenta().iter().zip(spectrum) {
        let w = a.norm_sqr();
        p1 += p * w;
        p2 += p * p * w;
    }
    (p1 * scale, p2 * scale)
}

fn boundary_occupancy(grid: &GridSpec, amplitudes: &[Complex64]) -> f64 {
    let edge = 0.05 * grid.length();
    let (lo, hi) = (grid.x_min + edge, grid.x_max - edge);
    amplitudes
        .iter()
        .enumerate()
        .filter(|(j, _)| {
            let x = grid.x(*j);
            x < lo || x > hi
        })
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        * grid.dx()
}

/// Origin-centred real Gaussian with `⟨x²⟩ = σ²`.
pub fn init_gaussian_state(grid: GridSpec, sigma: f64) -> Result<Wavefunction> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    if 4.0 * sigma >= grid.length() / 2.0 {
        return Err(Error::BoxTooSmall(format!(
            "4σ = {} must be below half the box length {}",
            4.0 * sigma,
            grid.length() / 2.0
        )));
    }
    let amps = (0..grid.n_points)
        .map(|j| {
            let x = grid.x(j);
            Complex64::new((-x * x / (4.0 * sigma * sigma)).exp(), 0.0)
        })
        .collect();
    let mut psi = Wavefunction::new(grid, amps)?;
    psi.normalize();
    Ok(psi)
}

/// Reusable FFT plans and scratch space for one grid.
pub(crate) struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Spectral {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self { forward, inverse, scratch: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub(crate) fn forward(&mut self, buf: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, &mut self.scratch);
    }

    pub(crate) fn inverse(&mut self, buf: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, &mut self.scratch);
    }
}

/// `exp(-i p² t / 2mħ) / n` for each FFT momentum; the `1/n` undoes the
/// unnormalized inverse transform.
fn kinetic_factors(grid: &GridSpec, mass: f64, t: f64) -> Vec<Complex64> {
    let scale = 1.0 / grid.n_points as f64;
    grid.momenta()
        .iter()
        .map(|p| Complex64::from_polar(scale, -p * p / (2.0 * mass * grid.hbar) * t))
        .collect()
}

fn apply(buf: &mut [Complex64], factors: &[Complex64]) {
    buf.iter_mut().zip(factors).for_each(|(a, f)| *a *= f);
}

/// Evolves `psi` in place for `n_steps` steps and records `⟨x⟩`, `⟨p⟩`, the
/// norm and `⟨H(t)⟩` at the start and after every `record_every` steps.
pub fn propagate_wavefunction(
    psi: &mut Wavefunction,
    spec: &PotentialSpec,
    field: &DriveField,
    dt: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<MeanSeries> {
    if !spec.is_bound() {
        return Err(Error::UnboundPotential);
    }
    spec.validate()?;
    check_step(field, dt)?;
    if record_every == 0 {
        return Err(Error::InvalidParameter("record_every must be >= 1".into()));
    }
    let grid = psi.grid;
    let n = grid.n_points;
    let hbar = grid.hbar;
    let xs = grid.positions();
    // Phase per step: a_j + E·b_j with a_j = −V dt/ħ and b_j = q x dt/ħ.
    let static_phase: Vec<f64> = xs.iter().map(|&x| -spec.value(x) * dt / hbar).collect();
    let dipole_phase: Vec<f64> = xs.iter().map(|&x| psi.charge * x * dt / hbar).collect();
    let half_kin = kinetic_factors(&grid, psi.mass, 0.5 * dt);
    let full_kin = kinetic_factors(&grid, psi.mass, dt);
    let mut fft = Spectral::new(n);
    let t0 = psi.time;
    let norm0 = psi.norm();

    let n_rec = n_steps / record_every + 1;
    let mut series = MeanSeries {
        times: Vec::with_capacity(n_rec),
        mean_x: Vec::with_capacity(n_rec),
        mean_p: Vec::with_capacity(n_rec),
        energy: Vec::with_capacity(n_rec),
        norm: Some(Vec::with_capacity(n_rec)),
    };

    let record = |series: &mut MeanSeries, amps: &[Complex64], spectrum: &[Complex64], t: f64| -> Result<()> {
        let e = field.evaluate(t);
        let dx = grid.dx();
        let (mut norm, mut mx, mut pot) = (0.0, 0.0, 0.0);
        for ((a, &x), v) in amps.iter().zip(&xs).zip(spec_values(spec, &xs)) {
            let w = a.norm_sqr();
            norm += w;
            mx += x * w;
            pot += v * w;
        }
        norm *= dx;
        mx *= dx;
        pot *= dx;
        let (p1, p2) = momentum_moments_from_spectrum(&grid, spectrum);
        if !norm.is_finite() || (norm - norm0).abs() > NORM_TOLERANCE {
            return Err(Error::NormDrift { norm, t });
        }
        let occupancy = boundary_occupancy(&grid, amps);
        if occupancy > BOUNDARY_TOLERANCE {
            return Err(Error::BoundaryContamination { occupancy, t });
        }
        series.times.push(t);
        series.mean_x.push(mx);
        series.mean_p.push(p1);
        series.norm.as_mut().unwrap().push(norm);
        series.energy.push(0.5 * p2 / psi.mass + pot - psi.charge * e * mx);
        Ok(())
    };

    let amps = &mut psi.amplitudes;
    let mut spectrum = amps.clone();
    fft.forward(&mut spectrum);
    record(&mut series, amps, &spectrum, t0)?;

    let mut step = 0;
    while step < n_steps {
        let block = record_every.min(n_steps - step);
        fft.forward(amps);
        apply(amps, &half_kin);
        fft.inverse(amps);
        for s in 0..block {
            let e = field.evaluate(t0 + (step as f64 + 0.5) * dt);
            for ((a, &sp), &dp) in amps.iter_mut().zip(&static_phase).zip(&dipole_phase) {
                let (sin, cos) = (sp + e * dp).sin_cos();
                *a *= Complex64::new(cos, sin);
            }
            fft.forward(amps);
            if s + 1 == block {
                spectrum.copy_from_slice(amps);
                apply(amps, &half_kin);
            } else {
                apply(amps, &full_kin);
            }
            fft.inverse(amps);
            step += 1;
        }
        let t = t0 + step as f64 * dt;
        if block == record_every {
            record(&mut series, amps, &spectrum, t)?;
        } else {
            // Trailing partial block: still enforce the contracts.
            let mut scratch = MeanSeries { norm: Some(Vec::new()), ..Default::default() };
            record(&mut scratch, amps, &spectrum, t)?;
        }
    }
    psi.time = t0 + n_steps as f64 * dt;
    Ok(series)
}

fn spec_values<'a>(spec: &'a PotentialSpec, xs: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
    xs.iter().map(move |&x| spec.value(x))
}
