//! Discrete Wigner transform of a pure state.
//!
//! ```text
//! W(x, p) = (1/2πħ) ∫ du e^{ipu/ħ} ψ(x − u/2) ψ*(x + u/2)
//! ```
//!
//! On the grid `u = 2 s dx` for integer `s`, which turns the integral into a
//! length-`n` transform over `s` for every `x_j`. The resulting momentum grid
//! is `p_l = πħ l / L`, half the spacing of the wavefunction's momentum grid,
//! covering `|p| < πħ/(2 dx)`.

use std::f64::consts::PI;
use std::io::{self, Write};

use ndarray::Array2;
use num_complex::Complex64;

use super::{Spectral, Wavefunction};
use crate::output::num;

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x_values: Vec<f64>,
    /// Increasing momenta.
    pub p_values: Vec<f64>,
    /// `w_values[[i, l]] = W(x_i, p_l)`.
    pub w_values: Array2<f64>,
    /// Largest discarded imaginary part.
    pub max_imag_residue: f64,
}

impl WignerGrid {
    pub fn dx(&self) -> f64 {
        self.x_values[1] - self.x_values[0]
    }

    pub fn dp(&self) -> f64 {
        self.p_values[1] - self.p_values[0]
    }

    /// `∫∫ W dx dp`.
    pub fn total(&self) -> f64 {
        self.w_values.sum() * self.dx() * self.dp()
    }

    /// `∫ W dp` at each `x_i`.
    pub fn position_marginal(&self) -> Vec<f64> {
        self.w_values.rows().into_iter().map(|r| r.sum() * self.dp()).collect()
    }

    /// `∫ W dx` at each `p_l`.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        self.w_values.columns().into_iter().map(|c| c.sum() * self.dx()).collect()
    }

    pub fn min(&self) -> f64 {
        self.w_values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Dense CSV: a row `x,<x values>`, a row `p,<p values>`, then one row of
    /// `W(x_i, ·)` per position.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let row = |label: &str, values: &[f64]| {
            let mut s = String::from(label);
            for v in values {
                s.push(',');
                s.push_str(&num(*v));
            }
            s
        };
        writeln!(out, "{}", row("x", &self.x_values))?;
        writeln!(out, "{}", row("p", &self.p_values))?;
        for r in self.w_values.rows() {
            let values: Vec<String> = r.iter().map(|v| num(*v)).collect();
            writeln!(out, "{}", values.join(","))?;
        }
        Ok(())
    }
}

pub fn wigner_transform(psi: &Wavefunction) -> WignerGrid {
    let grid = &psi.grid;
    let n = grid.n_points;
    let half = (n / 2) as isize;
    let hbar = grid.hbar;
    let dx = grid.dx();
    let prefactor = dx / (PI * hbar);
    let dp = PI * hbar / grid.length();
    let p_values: Vec<f64> = (-half..half).map(|l| l as f64 * dp).collect();
    let amps = &psi.amplitudes;

    let mut fft = Spectral::new(n);
    let mut w = Array2::<f64>::zeros((n, n));
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut residue: f64 = 0.0;
    for j in 0..n as isize {
        for s in -half..half {
            let (a, b) = (j - s, j + s);
            let c = if a >= 0 && b >= 0 && a < n as isize && b < n as isize {
                amps[a as usize] * amps[b as usize].conj()
            } else {
                Complex64::new(0.0, 0.0)
            };
            buf[s.rem_euclid(n as isize) as usize] = c;
        }
        // Σ_s c_s e^{+2πi l s / n}
        fft.inverse(&mut buf);
        for (col, l) in (-half..half).enumerate() {
            let v = buf[l.rem_euclid(n as isize) as usize] * prefactor;
            residue = residue.max(v.im.abs());
            w[[j as usize, col]] = v.re;
        }
    }
    WignerGrid {
        x_values: grid.positions(),
        p_values,
        w_values: w,
        max_imag_residue: residue,
    }
}
