//! Ground states by imaginary-time split-step relaxation.

use num_complex::Complex64;

use super::{init_gaussian_state, momentum_moments_from_spectrum, GridSpec, Spectral, Wavefunction};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

const MAX_ITERATIONS: usize = 400_000;
/// Imaginary time steps, coarse to fine. The splitting error of the fixed
/// point is O(τ²) in the state and O(τ⁴) in the energy.
const TAU_SCHEDULE: [f64; 3] = [0.05, 0.01, 0.002];

/// Ground state for a unit-mass particle.
pub fn ground_state(grid: GridSpec, spec: &PotentialSpec, tol: f64) -> Result<Wavefunction> {
    ground_state_with_mass(grid, spec, 1.0, tol)
}

/// Relaxes `e^{-Hτ}` applied to a Gaussian until the energy changes by less
/// than `tol` per unit imaginary time on the finest step. The state is
/// symmetrized `ψ(x) ← (ψ(x) + ψ(−x))/2` after every step.
pub fn ground_state_with_mass(
    grid: GridSpec,
    spec: &PotentialSpec,
    mass: f64,
    tol: f64,
) -> Result<Wavefunction> {
    if !spec.is_bound() {
        return Err(Error::UnboundPotential);
    }
    spec.validate()?;
    if !(tol > 0.0) || !(mass > 0.0) {
        return Err(Error::InvalidParameter("tol and mass must be > 0".into()));
    }
    let mut psi = init_gaussian_state(grid, (grid.length() / 20.0).min(1.0))?.with_particle(mass, 1.0);
    let n = grid.n_points;
    let xs = grid.positions();
    let momenta = grid.momenta();
    let mut fft = Spectral::new(n);
    let mut buf = psi.amplitudes.clone();
    let mut energy = relaxed_energy(&mut fft, &mut buf, &psi, spec);
    let mut iterations = 0;

    for &tau in &TAU_SCHEDULE {
        let scale = 1.0 / n as f64;
        let kin: Vec<f64> = momenta
            .iter()
            .map(|p| scale * (-p * p / (2.0 * mass * grid.hbar) * 0.5 * tau).exp())
            .collect();
        let pot: Vec<f64> = xs.iter().map(|&x| (-spec.value(x) * tau / grid.hbar).exp()).collect();
        loop {
            iterations += 1;
            if iterations > MAX_ITERATIONS {
                return Err(Error::NoConvergence(MAX_ITERATIONS));
            }
            let amps = &mut psi.amplitudes;
            fft.forward(amps);
            amps.iter_mut().zip(&kin).for_each(|(a, k)| *a *= k);
            fft.inverse(amps);
            amps.iter_mut().zip(&pot).for_each(|(a, v)| *a *= v);
            fft.forward(amps);
            amps.iter_mut().zip(&kin).for_each(|(a, k)| *a *= k);
            fft.inverse(amps);
            symmetrize(&grid, amps);
            psi.normalize();
            let next = relaxed_energy(&mut fft, &mut buf, &psi, spec);
            if !next.is_finite() {
                return Err(Error::NoConvergence(iterations));
            }
            let change = (next - energy).abs() / tau;
            energy = next;
            if change < tol {
                break;
            }
        }
    }
    Ok(psi)
}

fn relaxed_energy(fft: &mut Spectral, buf: &mut [Complex64], psi: &Wavefunction, spec: &PotentialSpec) -> f64 {
    buf.copy_from_slice(&psi.amplitudes);
    fft.forward(buf);
    let (_, p2) = momentum_moments_from_spectrum(&psi.grid, buf);
    let g = &psi.grid;
    let pot: f64 = psi
        .amplitudes
        .iter()
        .enumerate()
        .map(|(j, a)| spec.value(g.x(j)) * a.norm_sqr())
        .sum::<f64>()
        * g.dx();
    0.5 * p2 / psi.mass + pot
}

fn symmetrize(grid: &GridSpec, amps: &mut [Complex64]) {
    let n = amps.len();
    for j in 1..n / 2 {
        let m = grid.mirror(j);
        let avg = 0.5 * (amps[j] + amps[m]);
        amps[j] = avg;
        amps[m] = avg;
    }
}
