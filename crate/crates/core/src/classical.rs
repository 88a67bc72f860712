//! Classical ensembles under `H = p²/2m + V(x) − q E(t) x`.
//!
//! Trajectories are advanced with velocity Verlet (kick, drift, kick). The
//! drive enters each kick through its value at the midpoint of the step, so
//! a step from `t` with `dt` and the step back from `t + dt` with `-dt` see
//! the same field and the map is exactly reversible up to rounding.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::DriveField;
use crate::output::num;
use crate::potential::PotentialSpec;

/// Trajectories are grouped in blocks of this size. Block results are merged
/// in block order, so means do not depend on how blocks are scheduled.
pub const BLOCK_SIZE: usize = 64;

/// Symmetry imposed on an initial phase-space density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryClass {
    /// `ρ(x, p) = ρ(−x, −p)`.
    Reflection,
    /// `ρ(x, p) = ρ(x, −p)`.
    EvenInP,
    /// `ρ(x, p) = ρ(−x, p)`.
    EvenInX,
    /// All three at once.
    All,
}

impl SymmetryClass {
    pub const SINGLE: [SymmetryClass; 3] = [Self::Reflection, Self::EvenInP, Self::EvenInX];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Reflection => "reflection",
            Self::EvenInP => "even_in_p",
            Self::EvenInX => "even_in_x",
            Self::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "reflection" => Some(Self::Reflection),
            "even_in_p" => Some(Self::EvenInP),
            "even_in_x" => Some(Self::EvenInX),
            "all" => Some(Self::All),
            _ => None,
        }
    }
}

/// A sample `{(x_i, p_i)}` of identical particles at a common time.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub positions: Vec<f64>,
    pub momenta: Vec<f64>,
    pub time: f64,
    pub mass: f64,
    pub charge: f64,
}

impl Ensemble {
    pub fn new(positions: Vec<f64>, momenta: Vec<f64>, mass: f64, charge: f64) -> Result<Self> {
        if positions.len() != momenta.len() || positions.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "positions ({}) and momenta ({}) must be non-empty and of equal length",
                positions.len(),
                momenta.len()
            )));
        }
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be > 0, got {mass}")));
        }
        Ok(Self { positions, momenta, time: 0.0, mass, charge })
    }

    pub fn with_particle(mut self, mass: f64, charge: f64) -> Self {
        self.mass = mass;
        self.charge = charge;
        self
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn mean_x(&self) -> f64 {
        self.positions.iter().sum::<f64>() / self.len() as f64
    }

    pub fn mean_p(&self) -> f64 {
        self.momenta.iter().sum::<f64>() / self.len() as f64
    }

    /// `(x, p) → (−x, −p)` for every member.
    pub fn reflected(&self) -> Self {
        let mut out = self.clone();
        out.positions.iter_mut().for_each(|x| *x = -*x);
        out.momenta.iter_mut().for_each(|p| *p = -*p);
        out
    }
}

/// Draws an origin-centred Gaussian sample with the requested symmetry
/// imposed exactly by antithetic pairing.
///
/// `Reflection` pairs `(x, p)` with `(−x, −p)`. `EvenInP` pairs `(x, p)` with
/// `(x, −p)` and, in groups of four, mirrors the next pair in `x` so the mean
/// position also vanishes; `EvenInX` is the same with the roles swapped.
/// `All` emits the four images `(±x, ±p)` and needs `n` divisible by four.
pub fn sample_symmetric_ensemble(
    n: usize,
    sigma_x: f64,
    sigma_p: f64,
    seed: u64,
    class: SymmetryClass,
) -> Result<Ensemble> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddSampleCount(n));
    }
    if class == SymmetryClass::All && !n.is_multiple_of(4) {
        return Err(Error::InvalidParameter(format!(
            "class 'all' needs a multiple of four samples, got {n}"
        )));
    }
    if !(sigma_x > 0.0) || !(sigma_p > 0.0) {
        return Err(Error::InvalidParameter("sigmas must be > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> (f64, f64) {
        let x: f64 = StandardNormal.sample(&mut rng);
        let p: f64 = StandardNormal.sample(&mut rng);
        (sigma_x * x, sigma_p * p)
    };
    let mut xs = Vec::with_capacity(n);
    let mut ps = Vec::with_capacity(n);
    let mut push = |x: f64, p: f64| {
        xs.push(x);
        ps.push(p);
    };
    let mut remaining = n;
    while remaining > 0 {
        let quad = remaining >= 4;
        let (x, p) = draw();
        match class {
            SymmetryClass::Reflection => {
                push(x, p);
                push(-x, -p);
                remaining -= 2;
                continue;
            }
            SymmetryClass::All => {
                push(x, p);
                push(-x, p);
                push(x, -p);
                push(-x, -p);
                remaining -= 4;
                continue;
            }
            SymmetryClass::EvenInP => {
                push(x, p);
                push(x, -p);
                if quad {
                    let (_, q) = draw();
                    push(-x, q);
                    push(-x, -q);
                }
            }
            SymmetryClass::EvenInX => {
                push(x, p);
                push(-x, p);
                if quad {
                    let (y, _) = draw();
                    push(y, -p);
                    push(-y, -p);
                }
            }
        }
        remaining -= if quad { 4 } else { 2 };
    }
    Ensemble::new(xs, ps, 1.0, 1.0)
}

/// Ensemble means sampled along a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeanSeries {
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub energy: Vec<f64>,
    /// Wavefunction norm; only quantum runs fill this.
    pub norm: Option<Vec<f64>>,
}

impl MeanSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,mean_x,mean_p,energy`, or `t,mean_x,mean_p,norm,energy`
    /// when a norm column is present.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        match &self.norm {
            Some(norm) => {
                writeln!(out, "t,mean_x,mean_p,norm,energy")?;
                for (i, n) in norm.iter().enumerate() {
                    writeln!(
                        out,
                        "{},{},{},{},{}",
                        num(self.times[i]),
                        num(self.mean_x[i]),
                        num(self.mean_p[i]),
                        num(*n),
                        num(self.energy[i])
                    )?;
                }
            }
            None => {
                writeln!(out, "t,mean_x,mean_p,energy")?;
                for i in 0..self.len() {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        num(self.times[i]),
                        num(self.mean_x[i]),
                        num(self.mean_p[i]),
                        num(self.energy[i])
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Result of a blocked propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedSeries {
    /// Means over the whole ensemble.
    pub total: MeanSeries,
    /// Means over each block of [`BLOCK_SIZE`] consecutive trajectories.
    pub blocks: Vec<MeanSeries>,
}

pub(crate) fn check_step(field: &DriveField, dt: f64) -> Result<()> {
    let limit = field.period() / 200.0;
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("time step must be finite and non-zero, got {dt}")));
    }
    if dt.abs() > limit {
        return Err(Error::StepTooLarge { dt, limit });
    }
    Ok(())
}

struct BlockSums {
    x: Vec<f64>,
    p: Vec<f64>,
    energy: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn run_block(
    xs: &mut [f64],
    ps: &mut [f64],
    t0: f64,
    mass: f64,
    charge: f64,
    spec: &PotentialSpec,
    field: &DriveField,
    dt: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<BlockSums> {
    let n_rec = n_steps / record_every + 1;
    let mut sums = BlockSums {
        x: Vec::with_capacity(n_rec),
        p: Vec::with_capacity(n_rec),
        energy: Vec::with_capacity(n_rec),
    };
    let inv_m = 1.0 / mass;
    let mut force: Vec<f64> = xs.iter().map(|&x| spec.force(x)).collect();
    let mut record = |xs: &[f64], ps: &[f64], t: f64| -> Result<()> {
        let e = field.evaluate(t);
        let (mut sx, mut sp, mut se) = (0.0, 0.0, 0.0);
        for (&x, &p) in xs.iter().zip(ps) {
            sx += x;
            sp += p;
            se += 0.5 * p * p * inv_m + spec.value(x) - charge * e * x;
        }
        if !(sx.is_finite() && sp.is_finite() && se.is_finite()) {
            return Err(Error::NonFiniteState(t));
        }
        sums.x.push(sx);
        sums.p.push(sp);
        sums.energy.push(se);
        Ok(())
    };
    record(xs, ps, t0)?;
    let half = 0.5 * dt;
    for step in 0..n_steps {
        let drive = charge * field.evaluate(t0 + (step as f64 + 0.5) * dt);
        for ((x, p), f) in xs.iter_mut().zip(ps.iter_mut()).zip(force.iter_mut()) {
            *p += half * (*f + drive);
            *x += dt * *p * inv_m;
            *f = spec.force(*x);
            *p += half * (*f + drive);
        }
        if (step + 1) % record_every == 0 {
            record(xs, ps, t0 + (step + 1) as f64 * dt)?;
        }
    }
    if xs.iter().chain(ps.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState(t0 + n_steps as f64 * dt));
    }
    Ok(sums)
}

/// Propagates the ensemble in place and returns whole-ensemble and per-block
/// means, recorded at the start and after every `record_every` steps.
///
/// `dt` may be negative (backward integration); its magnitude is capped at
/// one two-hundredth of the field period.
pub fn propagate_ensemble_blocks(
    ens: &mut Ensemble,
    spec: &PotentialSpec,
    field: &DriveField,
    dt: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<BlockedSeries> {
    check_step(field, dt)?;
    spec.validate()?;
    if record_every == 0 {
        return Err(Error::InvalidParameter("record_every must be >= 1".into()));
    }
    let t0 = ens.time;
    let (mass, charge) = (ens.mass, ens.charge);
    let n = ens.len();
    let results: Vec<Result<BlockSums>> = ens
        .positions
        .par_chunks_mut(BLOCK_SIZE)
        .zip(ens.momenta.par_chunks_mut(BLOCK_SIZE))
        .map(|(xs, ps)| run_block(xs, ps, t0, mass, charge, spec, field, dt, n_steps, record_every))
        .collect();
    let blocks: Vec<BlockSums> = results.into_iter().collect::<Result<_>>()?;
    ens.time = t0 + n_steps as f64 * dt;

    let n_rec = n_steps / record_every + 1;
    let times: Vec<f64> = (0..n_rec).map(|i| t0 + (i * record_every) as f64 * dt).collect();
    let mut total = MeanSeries {
        times: times.clone(),
        mean_x: vec![0.0; n_rec],
        mean_p: vec![0.0; n_rec],
        energy: vec![0.0; n_rec],
        norm: None,
    };
    let mut per_block = Vec::with_capacity(blocks.len());
    for (b, sums) in blocks.iter().enumerate() {
        let size = BLOCK_SIZE.min(n - b * BLOCK_SIZE) as f64;
        for i in 0..n_rec {
            total.mean_x[i] += sums.x[i];
            total.mean_p[i] += sums.p[i];
            total.energy[i] += sums.energy[i];
        }
        per_block.push(MeanSeries {
            times: times.clone(),
            mean_x: sums.x.iter().map(|s| s / size).collect(),
            mean_p: sums.p.iter().map(|s| s / size).collect(),
            energy: sums.energy.iter().map(|s| s / size).collect(),
            norm: None,
        });
    }
    let inv_n = 1.0 / n as f64;
    for i in 0..n_rec {
        total.mean_x[i] *= inv_n;
        total.mean_p[i] *= inv_n;
        total.energy[i] *= inv_n;
    }
    Ok(BlockedSeries { total, blocks: per_block })
}

/// Propagates the ensemble in place and returns its mean series.
pub fn propagate_ensemble(
    ens: &mut Ensemble,
    spec: &PotentialSpec,
    field: &DriveField,
    dt: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<MeanSeries> {
    propagate_ensemble_blocks(ens, spec, field, dt, n_steps, record_every).map(|b| b.total)
}
