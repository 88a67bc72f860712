//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! lines appear in plain `cargo test` output.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rectify::classical::{propagate_ensemble, sample_symmetric_ensemble, Ensemble, SymmetryClass};
use rectify::field::{detect_symmetries, wrap_phase, DriveField, FieldSymmetryReport};
use rectify::harmonic::HarmonicSolution;
use rectify::harness::{averaged_transport, phase_scan, ConfigMap, ExperimentConfig, PhaseScanResult};
use rectify::potential::PotentialSpec;
use rectify::predictor::predict_transport;
use rectify::quantum::{
    ground_state, init_gaussian_state, propagate_wavefunction, wigner_transform, GridSpec, Wavefunction,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn config(base: &str, overrides: &[&str]) -> ExperimentConfig {
    let mut map = ConfigMap::parse(base).expect("config");
    for o in overrides {
        map.apply_override(o).expect("override");
    }
    ExperimentConfig::from_map(&map).expect("config")
}

fn harmonic_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let spec_mass = 1.0;
    let mut worst: f64 = 0.0;
    let mut configs = 0;
    while configs < 20 {
        let omega0: f64 = rng.random_range(0.8..1.25);
        let omega: f64 = rng.random_range(0.6..1.6);
        if [omega, 2.0 * omega].iter().any(|w| (w - omega0).abs() < 0.2 * omega0) {
            continue;
        }
        let field = DriveField::bichromatic(
            1,
            2,
            rng.random_range(0.05..0.3),
            rng.random_range(0.05..0.3),
            rng.random_range(0.0..TAU),
            rng.random_range(0.0..TAU),
            omega,
        )
        .unwrap();
        let (x0, p0) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let spec = PotentialSpec::Harmonic { omega0, mass: spec_mass };
        let sol = HarmonicSolution::new(x0, p0, omega0, 1.0, 1.0, field.clone()).unwrap();

        // Velocity Verlet shifts the free frequency by ω₀³dt²/24, which
        // accumulates; the error of the forced response stays O((Ωdt)²).
        let periods = 100;
        let t_end = periods as f64 * field.period();
        let secular = (24.0 * 2e-7 / (omega0.powi(3) * t_end)).sqrt();
        let forced = (12.0 * 1e-7f64).sqrt() / (2.0 * omega);
        let per_period = ((field.period() / secular.min(forced)).ceil() as usize).div_ceil(100) * 100;
        let dt = field.period() / per_period as f64;
        let mut ens = Ensemble::new(vec![x0], vec![p0], 1.0, 1.0).unwrap();
        let series = propagate_ensemble(&mut ens, &spec, &field, dt, per_period * periods, per_period / 10).unwrap();
        for (t, x) in series.times.iter().zip(&series.mean_x) {
            worst = worst.max((x - sol.trajectory(*t).unwrap().0).abs());
        }
        configs += 1;
    }
    outcome(worst <= 1e-6, format!("max |x_engine - x_exact| = {worst:.2e} over 20 configurations"))
}

const HARMONIC_BASE: &str = "
    engine.kind = classical
    potential.kind = harmonic
    potential.omega0 = 1
    field.omega = 0.3
    field.components = 1:0.3:0, 2:0.3:45
    init.class = reflection
    ensemble.size = 256
    grid.half_width = 8
    grid.n_points = 128
    sim.dt_per_period = 200
    sim.n_periods_total = 1250
    sim.n_periods_discard = 250
";

fn harmonic_no_dc() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for engine in ["classical", "quantum"] {
        let cfg = config(HARMONIC_BASE, &[&format!("engine.kind={engine}")]);
        let est = averaged_transport(&cfg).unwrap();
        // q ε / m ω₀² with the largest component.
        let scale = 0.3;
        let bound = (3.0 * est.mean_x.stderr).max(1e-6 * scale);
        pass &= est.mean_x.mean.abs() <= bound;
        detail.push(format!("{engine} mean_x = {:.2e} (bound {bound:.2e})", est.mean_x.mean));
    }
    outcome(pass, detail.join(", "))
}

const QUARTIC_QUANTUM_BASE: &str = "
    engine.kind = quantum
    potential.kind = quartic
    potential.a = 1
    potential.b = 1
    field.omega = 0.3
    field.components = 1:0.3:0, 2:0.3:0
    init.class = reflection
    ensemble.size = 256
    grid.half_width = 8
    grid.n_points = 128
    sim.dt_per_period = 200
    sim.n_periods_total = 60
    sim.n_periods_discard = 12
    sim.k_alpha = 8
";

fn omega_three_omega_null() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for engine in ["classical", "quantum"] {
        let cfg = config(
            QUARTIC_QUANTUM_BASE,
            &[
                &format!("engine.kind={engine}"),
                "field.components=1:0.3:0, 3:0.3:40",
                "sim.n_periods_total=200",
                "sim.n_periods_discard=40",
            ],
        );
        assert!(cfg.prediction().unwrap().momentum_must_vanish && cfg.prediction().unwrap().position_must_vanish);
        let est = averaged_transport(&cfg).unwrap();
        let zx = est.mean_x.mean.abs() / est.mean_x.stderr;
        let zp = est.mean_p.mean.abs() / est.mean_p.stderr;
        pass &= zx <= 3.0 && zp <= 3.0;
        detail.push(format!("{engine} z_x = {zx:.2}, z_p = {zp:.2}"));
    }
    outcome(pass, detail.join(", "))
}

fn z(mean: f64, stderr: f64) -> f64 {
    mean.abs() / stderr
}

fn point(scan: &PhaseScanResult, delta_phi: f64) -> &rectify::harness::PhaseScanPoint {
    scan.points
        .iter()
        .find(|p| (p.delta_phi - delta_phi).abs() < 1e-9)
        .expect("scan point")
}

fn dipole_phase_zeros() -> Outcome {
    let cfg = config(QUARTIC_QUANTUM_BASE, &[]);
    let scan = phase_scan(&cfg, 16).unwrap();
    let x = |d: f64| point(&scan, d).estimate.mean_x;
    let zeros = [FRAC_PI_2, 3.0 * FRAC_PI_2].map(|d| z(x(d).mean, x(d).stderr));
    let peaks = [0.0, PI].map(|d| z(x(d).mean, x(d).stderr));
    let opposite = x(0.0).mean * x(PI).mean < 0.0;
    let pass = zeros.iter().all(|&v| v <= 3.0) && peaks.iter().all(|&v| v >= 5.0) && opposite;
    outcome(
        pass,
        format!(
            "z at π/2, 3π/2 = {:.2}, {:.2}; z at 0, π = {:.1}, {:.1}; signs {}",
            zeros[0],
            zeros[1],
            peaks[0],
            peaks[1],
            if opposite { "opposite" } else { "equal" }
        ),
    )
}

const LATTICE_BASE: &str = "
    engine.kind = classical
    potential.kind = cosine
    potential.v0 = 1
    potential.k = 1
    field.omega = 1
    field.components = 1:1:0, 2:1:0
    init.class = all
    init.sigma_x = 0.5
    init.sigma_p = 0.5
    ensemble.size = 256
    sim.dt_per_period = 200
    sim.n_periods_total = 200
    sim.n_periods_discard = 40
    sim.k_alpha = 8
";

fn current_phase_zeros() -> Outcome {
    let cfg = config(LATTICE_BASE, &[]);
    let scan = phase_scan(&cfg, 16).unwrap();
    let p = |d: f64| point(&scan, d).estimate.mean_p;
    let zeros = [0.0, PI].map(|d| z(p(d).mean, p(d).stderr));
    let peaks = [FRAC_PI_2, 3.0 * FRAC_PI_2].map(|d| z(p(d).mean, p(d).stderr));
    let opposite = p(FRAC_PI_2).mean * p(3.0 * FRAC_PI_2).mean < 0.0;
    let pass = zeros.iter().all(|&v| v <= 3.0) && peaks.iter().all(|&v| v >= 5.0) && opposite;
    outcome(
        pass,
        format!(
            "z at 0, π = {:.2}, {:.2}; z at π/2, 3π/2 = {:.1}, {:.1}; signs {}",
            zeros[0],
            zeros[1],
            peaks[0],
            peaks[1],
            if opposite { "opposite" } else { "equal" }
        ),
    )
}

fn congruent(angle: f64, target: f64) -> bool {
    let r = wrap_phase(angle - target) % PI;
    r.min(PI - r) <= 1e-9
}

fn detector_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pairs = [(1u32, 2u32), (1, 3), (2, 3), (1, 4), (3, 4), (2, 5), (3, 5), (1, 6), (5, 7)];
    let mut disagreements = 0;
    let mut positives = (0, 0);
    for _ in 0..1000 {
        let (n, m) = pairs[rng.random_range(0..pairs.len())];
        let (nf, mf) = (f64::from(n), f64::from(m));
        let phi_n: f64 = rng.random_range(0.0..TAU);
        // A third of the fields meet the even condition, a third the odd one.
        let phi_m = match rng.random_range(0..3) {
            0 => (mf * phi_n + PI * f64::from(rng.random_range(0..4u8))) / nf,
            1 => (mf * phi_n - (mf - nf) * FRAC_PI_2 + PI * f64::from(rng.random_range(0..4u8))) / nf,
            _ => rng.random_range(0.0..TAU),
        };
        let alpha = rng.random_range(0.0..TAU);
        let field = DriveField::bichromatic(n, m, 1.0, rng.random_range(0.1..2.0), phi_n, phi_m, 1.0)
            .unwrap()
            .with_global_phase(alpha);
        let report = detect_symmetries(&field).unwrap();
        let (psi_n, psi_m) = (phi_n + nf * alpha, phi_m + mf * alpha);
        let combo = mf * psi_n - nf * psi_m;
        let even = congruent(combo, 0.0);
        let odd = congruent(combo, (mf - nf) * FRAC_PI_2);
        let half = n % 2 == 1 && m % 2 == 1;
        positives.0 += usize::from(even);
        positives.1 += usize::from(odd);
        if report.even_point.is_some() != even || report.odd_point.is_some() != odd || report.half_period_antisymmetric != half {
            disagreements += 1;
        }
    }
    outcome(
        disagreements == 0,
        format!("{disagreements} disagreements in 1000 fields ({} even, {} odd)", positives.0, positives.1),
    )
}

fn momentum_density(psi: &Wavefunction, p: f64) -> f64 {
    let g = &psi.grid;
    let sum: Complex64 = psi
        .amplitudes
        .iter()
        .enumerate()
        .map(|(j, a)| a * Complex64::from_polar(1.0, -p * g.x(j) / g.hbar))
        .sum();
    (sum * g.dx()).norm_sqr() / (TAU * g.hbar)
}

fn quantum_contracts() -> Outcome {
    let quartic = PotentialSpec::Quartic { a: 1.0, b: 1.0 };
    let grid = GridSpec::symmetric(10.0, 256, 1.0).unwrap();

    let field = DriveField::bichromatic(1, 2, 0.5, 0.5, 0.0, 0.3, 1.0).unwrap();
    let mut psi = init_gaussian_state(grid, 0.7).unwrap();
    let s = propagate_wavefunction(&mut psi, &quartic, &field, field.period() / 400.0, 10_000, 100).unwrap();
    let norms = s.norm.unwrap();
    let norm_drift = norms.iter().map(|n| (n - norms[0]).abs()).fold(0.0, f64::max);

    let g128 = GridSpec::symmetric(8.0, 128, 1.0).unwrap();
    let mut ground = ground_state(g128, &quartic, 1e-12).unwrap();
    let free = DriveField::zero(1.0).unwrap();
    let spp = 2000;
    let s = propagate_wavefunction(&mut ground, &quartic, &free, free.period() / spp as f64, spp * 1000, spp * 10).unwrap();
    let e0 = s.energy[0];
    let energy_drift = s.energy.iter().map(|e| ((e - e0) / e0).abs()).fold(0.0, f64::max);

    let harmonic = PotentialSpec::Harmonic { omega0: 1.0, mass: 1.0 };
    let hg = ground_state(GridSpec::symmetric(10.0, 256, 1.0).unwrap(), &harmonic, 1e-12).unwrap();
    let e_ground = hg.energy(&harmonic, 0.0);

    let w = wigner_transform(&psi);
    let total_err = (w.total() - 1.0).abs();
    let density = psi.density();
    let x_err: f64 =
        w.position_marginal().iter().zip(&density).map(|(a, b)| (a - b).abs()).sum::<f64>() * w.dx();
    let p_err: f64 = w
        .momentum_marginal()
        .iter()
        .zip(&w.p_values)
        .map(|(a, &p)| (a - momentum_density(&psi, p)).abs())
        .sum::<f64>()
        * w.dp();

    let pass = norm_drift <= 1e-10
        && energy_drift <= 1e-8
        && (e_ground - 0.5).abs() <= 1e-6
        && total_err <= 1e-8
        && x_err <= 1e-8
        && p_err <= 1e-8;
    outcome(
        pass,
        format!(
            "norm drift {norm_drift:.1e}, energy drift {energy_drift:.1e}, E0 - 0.5 = {:.1e}, Wigner total/x/p errors {total_err:.1e}/{x_err:.1e}/{p_err:.1e}",
            e_ground - 0.5
        ),
    )
}

fn prediction_table() -> Outcome {
    use SymmetryClass::*;
    // Rules: sym-a with reflection zeroes both; an even point with even_in_p
    // zeroes the current; an odd point with even_in_x zeroes the dipole.
    // (a, b, c, class, momentum zero, position zero)
    #[rustfmt::skip]
    let table = [
        (false, false, false, Reflection, false, false),
        (false, false, false, EvenInP,    false, false),
        (false, false, false, EvenInX,    false, false),
        (false, false, true,  Reflection, false, false),
        (false, false, true,  EvenInP,    false, false),
        (false, false, true,  EvenInX,    false, true),
        (false, true,  false, Reflection, false, false),
        (false, true,  false, EvenInP,    true,  false),
        (false, true,  false, EvenInX,    false, false),
        (false, true,  true,  Reflection, false, false),
        (false, true,  true,  EvenInP,    true,  false),
        (false, true,  true,  EvenInX,    false, true),
        (true,  false, false, Reflection, true,  true),
        (true,  false, false, EvenInP,    false, false),
        (true,  false, false, EvenInX,    false, false),
        (true,  false, true,  Reflection, true,  true),
        (true,  false, true,  EvenInP,    false, false),
        (true,  false, true,  EvenInX,    false, true),
        (true,  true,  false, Reflection, true,  true),
        (true,  true,  false, EvenInP,    true,  false),
        (true,  true,  false, EvenInX,    false, false),
        (true,  true,  true,  Reflection, true,  true),
        (true,  true,  true,  EvenInP,    true,  false),
        (true,  true,  true,  EvenInX,    false, true),
    ];
    let mismatches = table
        .iter()
        .filter(|&&(a, b, c, class, mom, pos)| {
            let report = FieldSymmetryReport {
                half_period_antisymmetric: a,
                even_point: b.then_some(0.0),
                odd_point: c.then_some(0.0),
            };
            let pred = predict_transport(&report, class);
            pred.momentum_must_vanish != mom
                || pred.position_must_vanish != pos
                || pred.reasons.is_empty() == (mom || pos)
        })
        .count();
    outcome(mismatches == 0, format!("{mismatches} mismatches in {} rows", table.len()))
}

fn equivariance() -> Outcome {
    let spec = PotentialSpec::Quartic { a: 1.0, b: 1.0 };
    let field = DriveField::bichromatic(1, 2, 1.0, 1.0, 0.2, 0.9, 0.9).unwrap();
    let dt = field.period() / 400.0;
    let steps = 400 * 50;
    let ens = sample_symmetric_ensemble(256, 0.5, 0.5, 9, SymmetryClass::EvenInP).unwrap();

    let mut a = ens.clone();
    let sa = propagate_ensemble(&mut a, &spec, &field, dt, steps, 40).unwrap();
    let mut b = ens.reflected();
    let sb = propagate_ensemble(&mut b, &spec, &field.negated(), dt, steps, 40).unwrap();
    let reflect_err = sa
        .mean_x
        .iter()
        .zip(&sb.mean_x)
        .chain(sa.mean_p.iter().zip(&sb.mean_p))
        .map(|(u, v)| (u + v).abs())
        .fold(0.0, f64::max);

    // Global phase as a time shift, in the regular regime where rounding
    // differences are not amplified.
    let weak = DriveField::bichromatic(1, 2, 0.3, 0.3, 0.2, 0.9, 0.3).unwrap();
    let dt = weak.period() / 400.0;
    let alpha = 2.1;
    let mut c = ens.clone();
    let sc = propagate_ensemble(&mut c, &spec, &weak.clone().with_global_phase(alpha), dt, steps, 40).unwrap();
    let mut d = ens.with_time(alpha / weak.fundamental_omega());
    let sd = propagate_ensemble(&mut d, &spec, &weak, dt, steps, 40).unwrap();
    let shift_err = sc
        .mean_x
        .iter()
        .zip(&sd.mean_x)
        .chain(sc.mean_p.iter().zip(&sd.mean_p))
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);

    outcome(
        reflect_err <= 1e-9 && shift_err <= 1e-8,
        format!("reflection error {reflect_err:.1e}, global-phase shift error {shift_err:.1e}"),
    )
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "harmonic oracle equivalence", Duration::from_secs(10), harmonic_oracle),
        (2, "no DC from a harmonic potential", Duration::from_secs(120), harmonic_no_dc),
        (3, "omega + 3 omega null test", Duration::from_secs(120), omega_three_omega_null),
        (4, "dipole phase zeros", Duration::from_secs(600), dipole_phase_zeros),
        (5, "current phase zeros", Duration::from_secs(600), current_phase_zeros),
        (6, "symmetry detector exactness", Duration::from_secs(1), detector_exactness),
        (7, "quantum contracts", Duration::from_secs(60), quantum_contracts),
        (8, "prediction table", Duration::from_secs(1), prediction_table),
        (9, "equivariance", Duration::from_secs(30), equivariance),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (id, name, limit, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || f == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = out.pass && in_time;
        failures += usize::from(!pass);
        println!(
            "criterion {id} {name}: {} ({}; {:.1} s of {} s{})",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", over time" }
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
