use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rectify::field::detect_symmetries;
use rectify::harness::{
    averaged_transport_detailed, phase_scan, validate_harmonic, ConfigMap, Engine, ExperimentConfig,
};
use rectify::predictor::{init_label, predict_transport, verify_prediction};
use rectify::quantum::wigner_transform;

#[derive(Parser)]
#[command(name = "rectify", version, about = "Symmetry-breaking transport in driven symmetric systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the temporal symmetries of the drive and the resulting prediction.
    AnalyzeField(Common),
    /// Compute the double-averaged position and momentum.
    Run {
        #[command(flatten)]
        common: Common,
        /// Write the mean series of the α = 0 run here.
        #[arg(long)]
        series: Option<PathBuf>,
        /// Write the final Wigner function of the α = 0 run here (quantum engine).
        #[arg(long)]
        wigner: Option<PathBuf>,
        /// Write the per-α windowed means here.
        #[arg(long)]
        alpha_table: Option<PathBuf>,
    },
    /// Sweep the relative phase of a two-colour drive.
    PhaseScan {
        #[command(flatten)]
        common: Common,
        /// Number of phases; overrides scan.points.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Compare the engine with the closed-form harmonic trajectory.
    ValidateHarmonic {
        #[command(flatten)]
        common: Common,
        /// Exit with status 3 if the largest error exceeds this.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    config: PathBuf,
    /// Override a configuration key, e.g. `--set sim.k_alpha=16`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Data output path; defaults to the `output` key, then standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Failure of a numerical contract, as opposed to bad input.
#[derive(Debug)]
struct ContractViolation(String);

impl std::fmt::Display for ContractViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ContractViolation {}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| rectify::error::Error::Config(format!("{}: {e}", common.config.display())))?;
    let mut map = ConfigMap::parse(&text)?;
    for pair in &common.overrides {
        map.apply_override(pair)?;
    }
    Ok(ExperimentConfig::from_map(&map)?)
}

fn sink(common: &Common, cfg: &ExperimentConfig) -> Result<Box<dyn Write>> {
    let path = common.output.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(create(&p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

fn analyze_field(common: &Common) -> Result<()> {
    let cfg = load(common)?;
    let report = detect_symmetries(&cfg.field)?;
    let init = cfg.initial_symmetry();
    let pred = predict_transport(&report, init);
    let mut out = sink(common, &cfg)?;
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    let at = |t: Option<f64>| t.map(|t| format!("yes (t' = {})", num(t))).unwrap_or_else(|| "no".into());
    writeln!(out, "omega: {}", num(cfg.field.fundamental_omega()))?;
    for c in cfg.field.components() {
        writeln!(
            out,
            "component: n = {}, amplitude = {}, phase = {}",
            c.harmonic_index,
            num(c.amplitude),
            num(c.phase)
        )?;
    }
    writeln!(out, "sym-a: {}", yes_no(report.half_period_antisymmetric))?;
    writeln!(out, "sym-b: {}", at(report.even_point))?;
    writeln!(out, "sym-c: {}", at(report.odd_point))?;
    writeln!(out, "initial state: {} ({})", init.label(), init_label(init))?;
    writeln!(out, "{pred}")?;
    let summary = match (pred.position_must_vanish, pred.momentum_must_vanish) {
        (true, true) => "both-zero",
        (true, false) => "position-zero",
        (false, true) => "momentum-zero",
        (false, false) => "none",
    };
    writeln!(out, "prediction: {summary}")?;
    out.flush()?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn run(common: &Common, series: Option<&Path>, wigner: Option<&Path>, alpha_table: Option<&Path>) -> Result<()> {
    let cfg = load(common)?;
    if wigner.is_some() && !matches!(cfg.engine, Engine::Quantum { .. }) {
        bail!(rectify::error::Error::Config("--wigner needs engine.kind = quantum".into()));
    }
    let detailed = averaged_transport_detailed(&cfg)?;
    let est = &detailed.estimate;
    let pred = cfg.prediction()?;
    let verdict = verify_prediction(&cfg.judged_prediction()?, est, 3.0);

    let mut out = sink(common, &cfg)?;
    writeln!(out, "observable,mean,stderr,convergence_delta")?;
    for (name, o) in [("mean_x", &est.mean_x), ("mean_p", &est.mean_p)] {
        writeln!(
            out,
            "{name},{},{},{}",
            num(o.mean),
            num(o.stderr),
            num(o.convergence_delta)
        )?;
    }
    out.flush()?;

    if let Some(path) = series {
        detailed.series.write_csv(BufWriter::new(create(path)?))?;
    }
    if let Some(path) = alpha_table {
        est.write_alpha_csv(BufWriter::new(create(path)?))?;
    }
    if let (Some(path), Some(psi)) = (wigner, &detailed.final_state) {
        wigner_transform(psi).write_csv(BufWriter::new(create(path)?))?;
    }

    eprintln!("{pred}");
    eprintln!("{verdict}");
    if est.non_convergent {
        eprintln!("warning: convergence delta exceeds 10 standard errors; lengthen the window");
    }
    Ok(())
}

fn scan(common: &Common, points: Option<usize>) -> Result<()> {
    let cfg = load(common)?;
    let n = points.unwrap_or(cfg.scan_points);
    let result = phase_scan(&cfg, n)?;
    let mut out = sink(common, &cfg)?;
    result.write_csv(&mut out)?;
    out.flush()?;
    let failed = result.points.iter().filter(|p| !p.verdict.pass).count();
    let unconverged = result.points.iter().filter(|p| p.estimate.non_convergent).count();
    eprintln!(
        "{} points, {} prediction failures, {} not converged",
        result.points.len(),
        failed,
        unconverged
    );
    Ok(())
}

fn harmonic(common: &Common, tolerance: Option<f64>) -> Result<()> {
    let cfg = load(common)?;
    let cmp = validate_harmonic(&cfg)?;
    let mut out = sink(common, &cfg)?;
    cmp.write_csv(&mut out)?;
    out.flush()?;
    let err = cmp.max_abs_error();
    eprintln!("max abs error: {err:e}");
    if let Some(tol) = tolerance {
        // A NaN error must fail too.
        if err.is_nan() || err > tol {
            bail!(ContractViolation(format!("max abs error {err:e} exceeds tolerance {tol:e}")));
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ContractViolation>().is_some() {
        return 3;
    }
    match err.downcast_ref::<rectify::error::Error>() {
        Some(e) if e.is_numerical() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::AnalyzeField(common) => analyze_field(common),
        Command::Run { common, series, wigner, alpha_table } => {
            run(common, series.as_deref(), wigner.as_deref(), alpha_table.as_deref())
        }
        Command::PhaseScan { common, points } => scan(common, *points),
        Command::ValidateHarmonic { common, tolerance } => harmonic(common, *tolerance),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
