//! Double averaging over time and global phase, and relative-phase scans.
//!
//! For each `α_k = 2πk/K` the configured engine runs from `t = 0` with the
//! drive shifted to global phase `α_k`. The first `n_periods_discard` periods
//! are dropped and the rest is averaged with the trapezoid rule over an
//! integer number of periods. The `K` windowed means are then averaged
//! uniformly.

mod config;

use std::f64::consts::TAU;
use std::io::{self, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use config::{default_k_alpha, ConfigMap};

use crate::classical::{propagate_ensemble_blocks, sample_symmetric_ensemble, MeanSeries, SymmetryClass};
use crate::error::{Error, Result};
use crate::field::{detect_symmetries, DriveField, HarmonicComponent};
use crate::output::num;
use crate::potential::PotentialSpec;
use crate::predictor::{predict_transport, FieldSymmetry, verify_prediction, TransportPrediction, Verdict};
use crate::quantum::{ground_state_with_mass, init_gaussian_state, propagate_wavefunction, GridSpec, Wavefunction};

/// Engine and engine-specific initial state.
#[derive(Debug, Clone, PartialEq)]
pub enum Engine {
    Classical {
        ensemble_size: usize,
        class: SymmetryClass,
        sigma_x: f64,
        sigma_p: f64,
    },
    Quantum {
        grid: GridSpec,
        init: QuantumInit,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuantumInit {
    /// Origin-centred Gaussian with `⟨x²⟩ = σ²`.
    Gaussian { sigma: f64 },
    /// Ground state of the undriven potential.
    GroundState { tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimSettings {
    /// Steps per field period; at least 200.
    pub steps_per_period: usize,
    pub n_periods_total: usize,
    pub n_periods_discard: usize,
    pub k_alpha: usize,
    /// Recorded samples per period; must divide `steps_per_period`.
    pub samples_per_period: usize,
}

impl SimSettings {
    fn record_every(&self) -> usize {
        self.steps_per_period / self.samples_per_period
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub engine: Engine,
    pub potential: PotentialSpec,
    /// Drive template. Its global phase is replaced by each `α_k`.
    pub field: DriveField,
    pub mass: f64,
    pub charge: f64,
    pub sim: SimSettings,
    pub seed: u64,
    /// Number of relative phases in a scan.
    pub scan_points: usize,
    /// Initial `(x, p)` of the single trajectory compared with the closed form.
    pub probe: (f64, f64),
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let sim = &self.sim;
        let min_k = 2 * self.field.max_harmonic() as usize + 1;
        if sim.k_alpha < min_k {
            return Err(Error::InvalidParameter(format!(
                "sim.k_alpha = {} must be at least 2·max harmonic + 1 = {min_k}",
                sim.k_alpha
            )));
        }
        if sim.n_periods_total <= sim.n_periods_discard {
            return Err(Error::InvalidParameter(format!(
                "sim.n_periods_total = {} must exceed sim.n_periods_discard = {}",
                sim.n_periods_total, sim.n_periods_discard
            )));
        }
        if sim.steps_per_period < 200 {
            return Err(Error::InvalidParameter(format!(
                "sim.dt_per_period = {} is below the minimum of 200",
                sim.steps_per_period
            )));
        }
        if sim.samples_per_period == 0 || !sim.steps_per_period.is_multiple_of(sim.samples_per_period) {
            return Err(Error::InvalidParameter(format!(
                "sim.samples_per_period = {} must divide sim.dt_per_period = {}",
                sim.samples_per_period, sim.steps_per_period
            )));
        }
        if !(self.mass > 0.0) || !self.charge.is_finite() {
            return Err(Error::InvalidParameter("particle.mass must be > 0 and particle.charge finite".into()));
        }
        self.potential.validate()?;
        match &self.engine {
            Engine::Classical { ensemble_size, class, sigma_x, sigma_p } => {
                if *ensemble_size == 0 {
                    return Err(Error::InvalidParameter("ensemble.size must be > 0".into()));
                }
                if *class == SymmetryClass::All && ensemble_size % 4 != 0 {
                    return Err(Error::InvalidParameter("ensemble.size must be a multiple of 4 for init.class = all".into()));
                }
                if !(*sigma_x >= 0.0 && *sigma_p >= 0.0) {
                    return Err(Error::InvalidParameter("init widths must be >= 0".into()));
                }
            }
            Engine::Quantum { .. } => {
                if !self.potential.is_bound() {
                    return Err(Error::UnboundPotential);
                }
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.field.period() / self.sim.steps_per_period as f64
    }

    /// Symmetry class of the initial state. Quantum states are origin-centred
    /// and parity-even, so they belong to every class.
    pub fn initial_symmetry(&self) -> SymmetryClass {
        match self.engine {
            Engine::Classical { class, .. } => class,
            Engine::Quantum { .. } => SymmetryClass::All,
        }
    }

    pub fn prediction(&self) -> Result<TransportPrediction> {
        Ok(predict_transport(&detect_symmetries(&self.field)?, self.initial_symmetry()))
    }

    /// The prediction that verdicts are judged against. On an unbound
    /// potential `⟨x⟩` drifts with any current and has no time average, so the
    /// position flag is dropped there.
    pub fn judged_prediction(&self) -> Result<TransportPrediction> {
        let mut pred = self.prediction()?;
        if !self.potential.is_bound() {
            pred.position_must_vanish = false;
            pred.reasons.retain(|(s, _)| *s != FieldSymmetry::OddPoint);
        }
        Ok(pred)
    }

    /// Copy of the configuration with another drive.
    pub fn with_field(&self, field: DriveField) -> Self {
        Self { field, ..self.clone() }
    }
}

/// Seed of the task for global phase `alpha_index` at scan point `scan_index`.
pub fn task_seed(master: u64, alpha_index: usize, scan_index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((scan_index as u64) << 32) | alpha_index as u64);
    rng.next_u64()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// `|mean over the full window − mean over its first half|`.
    pub convergence_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaRow {
    pub alpha: f64,
    pub mean_x: f64,
    pub mean_p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportEstimate {
    pub mean_x: ObservableEstimate,
    pub mean_p: ObservableEstimate,
    /// One row per global phase.
    pub per_alpha: Vec<AlphaRow>,
    /// Set when a convergence delta exceeds ten standard errors. On unbound
    /// potentials only `⟨p⟩` is checked.
    pub non_convergent: bool,
}

impl TransportEstimate {
    pub fn write_alpha_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "alpha,mean_x,mean_p")?;
        for r in &self.per_alpha {
            writeln!(out, "{},{},{}", num(r.alpha), num(r.mean_x), num(r.mean_p))?;
        }
        Ok(())
    }
}

/// Trapezoid average of samples `lo..=hi`.
fn window_mean(values: &[f64], lo: usize, hi: usize) -> f64 {
    let inner: f64 = values[lo..=hi].iter().sum();
    (inner - 0.5 * (values[lo] + values[hi])) / (hi - lo) as f64
}

/// Windowed means of one cell: full window and first half.
#[derive(Debug, Clone, Copy)]
struct CellMeans {
    weight: f64,
    x: f64,
    p: f64,
    x_half: f64,
    p_half: f64,
}

/// Output of the engine for one global phase.
struct AlphaRun {
    cells: Vec<CellMeans>,
    series: MeanSeries,
    final_state: Option<Wavefunction>,
}

fn window(sim: &SimSettings) -> (usize, usize, usize) {
    let s = sim.samples_per_period;
    let lo = sim.n_periods_discard * s;
    let hi = sim.n_periods_total * s;
    let span = sim.n_periods_total - sim.n_periods_discard;
    let half = lo + span.div_ceil(2) * s;
    (lo, hi, half)
}

fn cell_means(series: &MeanSeries, sim: &SimSettings, weight: f64) -> CellMeans {
    let (lo, hi, half) = window(sim);
    CellMeans {
        weight,
        x: window_mean(&series.mean_x, lo, hi),
        p: window_mean(&series.mean_p, lo, hi),
        x_half: window_mean(&series.mean_x, lo, half),
        p_half: window_mean(&series.mean_p, lo, half),
    }
}

/// Initial wavefunction shared by every global phase of a quantum run.
fn initial_wavefunction(cfg: &ExperimentConfig) -> Result<Option<Wavefunction>> {
    match &cfg.engine {
        Engine::Classical { .. } => Ok(None),
        Engine::Quantum { grid, init } => {
            let psi = match *init {
                QuantumInit::Gaussian { sigma } => init_gaussian_state(*grid, sigma)?,
                QuantumInit::GroundState { tol } => ground_state_with_mass(*grid, &cfg.potential, cfg.mass, tol)?,
            };
            Ok(Some(psi.with_particle(cfg.mass, cfg.charge)))
        }
    }
}

fn run_alpha(
    cfg: &ExperimentConfig,
    psi0: Option<&Wavefunction>,
    alpha_index: usize,
    scan_index: usize,
) -> Result<AlphaRun> {
    let sim = &cfg.sim;
    let alpha = TAU * alpha_index as f64 / sim.k_alpha as f64;
    let field = cfg.field.clone().with_global_phase(alpha);
    let n_steps = sim.n_periods_total * sim.steps_per_period;
    match (&cfg.engine, psi0) {
        (Engine::Classical { ensemble_size, class, sigma_x, sigma_p }, _) => {
            let seed = task_seed(cfg.seed, alpha_index, scan_index);
            let mut ens = sample_symmetric_ensemble(*ensemble_size, *sigma_x, *sigma_p, seed, *class)?
                .with_particle(cfg.mass, cfg.charge);
            let out = propagate_ensemble_blocks(&mut ens, &cfg.potential, &field, cfg.dt(), n_steps, sim.record_every())?;
            let mut remaining = *ensemble_size;
            let cells = out
                .blocks
                .iter()
                .map(|b| {
                    let size = remaining.min(crate::classical::BLOCK_SIZE);
                    remaining -= size;
                    cell_means(b, sim, size as f64)
                })
                .collect();
            Ok(AlphaRun { cells, series: out.total, final_state: None })
        }
        (Engine::Quantum { .. }, Some(psi0)) => {
            let mut psi = psi0.clone();
            let series = propagate_wavefunction(&mut psi, &cfg.potential, &field, cfg.dt(), n_steps, sim.record_every())?;
            Ok(AlphaRun {
                cells: vec![cell_means(&series, sim, 1.0)],
                series,
                final_state: Some(psi),
            })
        }
        (Engine::Quantum { .. }, None) => unreachable!("quantum runs carry an initial state"),
    }
}

/// Weighted mean and its standard error over cells.
fn mean_and_stderr(values: &[(f64, f64)]) -> (f64, f64) {
    let total: f64 = values.iter().map(|(w, _)| w).sum();
    let mean = values.iter().map(|(w, v)| w * v).sum::<f64>() / total;
    let c = values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let spread: f64 = values.iter().map(|(w, v)| (w * (v - mean)).powi(2)).sum();
    (mean, (c / (c - 1.0) * spread).sqrt() / total)
}

/// `bound` selects whether `⟨x⟩` enters the convergence flag.
fn combine(sim: &SimSettings, runs: &[AlphaRun], bound: bool) -> TransportEstimate {
    let cells: Vec<CellMeans> = runs.iter().flat_map(|r| r.cells.iter().copied()).collect();
    let pick = |f: fn(&CellMeans) -> f64| -> Vec<(f64, f64)> { cells.iter().map(|c| (c.weight, f(c))).collect() };
    let (mx, sx) = mean_and_stderr(&pick(|c| c.x));
    let (mp, sp) = mean_and_stderr(&pick(|c| c.p));
    let (mx_half, _) = mean_and_stderr(&pick(|c| c.x_half));
    let (mp_half, _) = mean_and_stderr(&pick(|c| c.p_half));
    let per_alpha = runs
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let w: f64 = r.cells.iter().map(|c| c.weight).sum();
            AlphaRow {
                alpha: TAU * k as f64 / sim.k_alpha as f64,
                mean_x: r.cells.iter().map(|c| c.weight * c.x).sum::<f64>() / w,
                mean_p: r.cells.iter().map(|c| c.weight * c.p).sum::<f64>() / w,
            }
        })
        .collect();
    let mean_x = ObservableEstimate { mean: mx, stderr: sx, convergence_delta: (mx - mx_half).abs() };
    let mean_p = ObservableEstimate { mean: mp, stderr: sp, convergence_delta: (mp - mp_half).abs() };
    let non_convergent = (bound && mean_x.convergence_delta > 10.0 * mean_x.stderr)
        || mean_p.convergence_delta > 10.0 * mean_p.stderr;
    TransportEstimate { mean_x, mean_p, per_alpha, non_convergent }
}

fn run_all_alphas(cfg: &ExperimentConfig, psi0: Option<&Wavefunction>, scan_index: usize) -> Result<Vec<AlphaRun>> {
    (0..cfg.sim.k_alpha)
        .into_par_iter()
        .map(|k| run_alpha(cfg, psi0, k, scan_index))
        .collect()
}

/// Double-averaged `⟨x⟩` and `⟨p⟩`.
pub fn averaged_transport(cfg: &ExperimentConfig) -> Result<TransportEstimate> {
    Ok(averaged_transport_detailed(cfg)?.estimate)
}

/// An estimate together with the `α = 0` run it contains.
#[derive(Debug, Clone)]
pub struct DetailedRun {
    pub estimate: TransportEstimate,
    /// Mean series of the `α = 0` run.
    pub series: MeanSeries,
    /// Final wavefunction of the `α = 0` run, for the quantum engine.
    pub final_state: Option<Wavefunction>,
}

pub fn averaged_transport_detailed(cfg: &ExperimentConfig) -> Result<DetailedRun> {
    cfg.validate()?;
    let psi0 = initial_wavefunction(cfg)?;
    let mut runs = run_all_alphas(cfg, psi0.as_ref(), 0)?;
    let estimate = combine(&cfg.sim, &runs, cfg.potential.is_bound());
    let first = runs.swap_remove(0);
    Ok(DetailedRun { estimate, series: first.series, final_state: first.final_state })
}

#[derive(Debug, Clone)]
pub struct PhaseScanPoint {
    pub delta_phi: f64,
    pub estimate: TransportEstimate,
    pub prediction: TransportPrediction,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct PhaseScanResult {
    /// Harmonic indices `(n, m)`, `n < m`.
    pub indices: (u32, u32),
    pub points: Vec<PhaseScanPoint>,
}

impl PhaseScanResult {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "delta_phi,mean_x,stderr_x,mean_p,stderr_p,predicted_x_zero,predicted_p_zero")?;
        for pt in &self.points {
            let e = &pt.estimate;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                num(pt.delta_phi),
                num(e.mean_x.mean),
                num(e.mean_x.stderr),
                num(e.mean_p.mean),
                num(e.mean_p.stderr),
                pt.prediction.position_must_vanish,
                pt.prediction.momentum_must_vanish
            )?;
        }
        Ok(())
    }
}

/// The `(n, m)` field with relative phase `Δφ = n·φ_m − m·φ_n`, keeping the
/// template's amplitudes and `φ_n`. For `(1, 2)` this is `φ₂ − 2φ₁`.
pub fn with_relative_phase(template: &DriveField, delta_phi: f64) -> Result<DriveField> {
    let (lo, hi) = bichromatic_pair(template)?;
    let n = lo.harmonic_index as f64;
    let m = hi.harmonic_index as f64;
    let phi_m = (delta_phi + m * lo.phase) / n;
    Ok(DriveField::new(
        template.fundamental_omega(),
        [lo, HarmonicComponent::new(hi.harmonic_index, hi.amplitude, phi_m)],
    )?
    .with_global_phase(template.global_phase())
    .signed_like(template))
}

fn bichromatic_pair(field: &DriveField) -> Result<(HarmonicComponent, HarmonicComponent)> {
    match field.components() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::NotBichromatic),
    }
}

/// Sweeps `Δφ` over `n_points` uniform values in `[0, 2π)`.
pub fn phase_scan(cfg: &ExperimentConfig, n_points: usize) -> Result<PhaseScanResult> {
    let (lo, hi) = bichromatic_pair(&cfg.field)?;
    if n_points < 8 {
        return Err(Error::InvalidParameter(format!("a phase scan needs at least 8 points, got {n_points}")));
    }
    cfg.validate()?;
    let psi0 = initial_wavefunction(cfg)?;
    let points = (0..n_points)
        .into_par_iter()
        .map(|j| {
            let delta_phi = TAU * j as f64 / n_points as f64;
            let point_cfg = cfg.with_field(with_relative_phase(&cfg.field, delta_phi)?);
            let runs = run_all_alphas(&point_cfg, psi0.as_ref(), j)?;
            let estimate = combine(&cfg.sim, &runs, cfg.potential.is_bound());
            let prediction = point_cfg.prediction()?;
            let verdict = verify_prediction(&point_cfg.judged_prediction()?, &estimate, 3.0);
            Ok(PhaseScanPoint { delta_phi, estimate, prediction, verdict })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseScanResult { indices: (lo.harmonic_index, hi.harmonic_index), points })
}

/// Engine trajectory next to the closed-form harmonic solution.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicComparison {
    pub times: Vec<f64>,
    pub exact: Vec<f64>,
    pub numeric: Vec<f64>,
}

impl HarmonicComparison {
    pub fn max_abs_error(&self) -> f64 {
        self.exact.iter().zip(&self.numeric).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,x_exact,x_numeric,abs_error")?;
        for ((t, a), b) in self.times.iter().zip(&self.exact).zip(&self.numeric) {
            writeln!(out, "{},{},{},{}", num(*t), num(*a), num(*b), num((a - b).abs()))?;
        }
        Ok(())
    }
}

/// Runs the configured engine at `α = 0` on a harmonic potential and compares
/// `x(t)` (classical, single particle at `probe`) or `⟨x⟩(t)` (quantum,
/// origin-centred initial state) with the closed form.
pub fn validate_harmonic(cfg: &ExperimentConfig) -> Result<HarmonicComparison> {
    cfg.validate()?;
    let PotentialSpec::Harmonic { omega0, mass: spring_mass } = cfg.potential else {
        return Err(Error::InvalidParameter("validate-harmonic needs potential.kind = harmonic".into()));
    };
    // V = m_s ω₀² x²/2 acting on a particle of mass m oscillates at ω₀ √(m_s/m).
    let omega_eff = omega0 * (spring_mass / cfg.mass).sqrt();
    let sim = &cfg.sim;
    let n_steps = sim.n_periods_total * sim.steps_per_period;
    let (series, x0, p0) = match &cfg.engine {
        Engine::Classical { .. } => {
            let (x0, p0) = cfg.probe;
            let mut ens = crate::classical::Ensemble::new(vec![x0], vec![p0], cfg.mass, cfg.charge)?;
            let s = propagate_ensemble_blocks(&mut ens, &cfg.potential, &cfg.field, cfg.dt(), n_steps, sim.record_every())?;
            (s.total, x0, p0)
        }
        Engine::Quantum { .. } => {
            if cfg.probe != (0.0, 0.0) {
                return Err(Error::InvalidParameter("the quantum engine starts at the origin; init.x0 and init.p0 must be 0".into()));
            }
            let mut psi = initial_wavefunction(cfg)?.expect("quantum engine");
            let s = propagate_wavefunction(&mut psi, &cfg.potential, &cfg.field, cfg.dt(), n_steps, sim.record_every())?;
            (s, 0.0, 0.0)
        }
    };
    let sol = crate::harmonic::HarmonicSolution::new(x0, p0, omega_eff, cfg.mass, cfg.charge, cfg.field.clone())?;
    let exact = series.times.iter().map(|&t| sol.trajectory(t).map(|(x, _)| x)).collect::<Result<_>>()?;
    Ok(HarmonicComparison { times: series.times, exact, numeric: series.mean_x })
}
