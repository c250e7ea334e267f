use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use saf_relay::experiment::{read_config, run_experiment, Variant};

/// Runs SAF / IAF / static-AF relay experiments described by a TOML file.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Experiment config (TOML).
    config: PathBuf,

    /// Output directory, overriding `output_dir`.
    #[arg(short, long)]
    output: Option<PathBuf>,

    /// Variants to run (saf, iaf, static_af, saf_delay), overriding
    /// `variants`. Repeat or comma-separate.
    #[arg(long, value_delimiter = ',')]
    variant: Vec<String>,

    /// Power levels in dBm, overriding `sweep_dbm`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    sweep: Vec<f64>,

    /// Parse and validate the config, print it resolved, and exit.
    #[arg(long)]
    validate_only: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();

    let mut spec = match read_config(&cli.config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(dir) = cli.output {
        spec.output_dir = dir;
    }
    if !cli.sweep.is_empty() {
        spec.sweep_dbm = cli.sweep;
    }
    if !cli.variant.is_empty() {
        let mut variants = Vec::new();
        for name in &cli.variant {
            // Keep options from the config file for variants it already lists.
            let from_file = spec.variants.iter().find(|v| v.name() == name).cloned();
            match from_file.or_else(|| Variant::from_name(name)) {
                Some(v) => variants.push(v),
                None => {
                    eprintln!("unknown variant {name:?}");
                    return ExitCode::from(2);
                }
            }
        }
        spec.variants = variants;
    }
    if let Err(e) = spec.validate() {
        eprintln!("{e}");
        return ExitCode::from(2);
    }
    if cli.validate_only {
        print!("{}", spec.render());
        return ExitCode::SUCCESS;
    }

    match run_experiment(&spec) {
        Ok(report) => {
            let failed = report.failures().count();
            for r in report.failures() {
                if let Err(e) = &r.result {
                    eprintln!("{}: {e}", r.dir.display());
                }
            }
            if failed > 0 {
                eprintln!("{failed} of {} runs failed", report.runs.len());
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
