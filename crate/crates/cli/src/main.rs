use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use illpose::experiment::{parse_levels, run_experiment, ExperimentConfig, ExperimentKind, FailureKind};
use illpose::regularization::GeneratorFamily;
use illpose::spectral::IndexWindow;
use illpose::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_OTHER: u8 = 1;

/// Runs one ill-posedness experiment and writes CSV/JSON artifacts.
#[derive(Debug, Parser)]
#[command(name = "illpose", version)]
struct Cli {
    /// spectrum, compare, factorize, douglas, dichotomy, multiplier, codim or paper-suite
    experiment: String,

    /// Flat `key = value` experiment file
    #[arg(long)]
    config: PathBuf,

    /// Output directory (overrides `output_dir`)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Comma-separated discretization levels, e.g. 64,128,256
    #[arg(long)]
    levels: Option<String>,

    /// Index window `a:b`
    #[arg(long)]
    window: Option<String>,

    /// tikhonov, cutoff or landweber
    #[arg(long)]
    family: Option<String>,
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let kind: ExperimentKind = cli.experiment.parse()?;
    let mut cfg = ExperimentConfig::from_file(&cli.config, Some(kind))?;
    let as_config = |e: Error| match e {
        Error::InvalidArgument(m) => Error::Config(m),
        other => other,
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(levels) = &cli.levels {
        cfg.levels = parse_levels(levels)?;
    }
    if let Some(w) = &cli.window {
        cfg.window = Some(w.parse::<IndexWindow>().map_err(as_config)?);
    }
    if let Some(f) = &cli.family {
        cfg.family = Some(f.parse::<GeneratorFamily>()?);
    }
    if let Ok(seed) = std::env::var("ILLPOSE_SEED") {
        cfg.seed = Some(seed);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match configure(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("illpose: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("illpose: {e}");
            let code = match e {
                Error::Config(_) => EXIT_CONFIG,
                Error::NumericalFailure { .. } => EXIT_NUMERICAL,
                _ => EXIT_OTHER,
            };
            return ExitCode::from(code);
        }
    };
    let report_path = cfg.output_dir.join("report.json");
    for child in &report.children {
        println!("{:<28} {}", child.name, child.verdict);
    }
    println!("verdict: {}", report.verdict.summary());
    println!("report: {}", report_path.display());
    if let Some(seed) = &cfg.seed {
        println!("seed: {seed} (unused)");
    }
    match &report.failure {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("illpose: stage `{}` failed: {}", f.stage, f.message);
            match f.kind {
                FailureKind::Numerical => ExitCode::from(EXIT_NUMERICAL),
                FailureKind::InvalidInput => ExitCode::from(EXIT_CONFIG),
            }
        }
    }
}
