use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use gcselect::commands;
use gcselect::config::{parse_overrides, RunConfig};
use gcselect::validation::{self, Overrides};

/// Division-mutation-selection model: simulation, spectra, sweeps and validation.
#[derive(Parser)]
#[command(name = "gcselect", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the finite-element solver and write timeseries.csv and snapshots.
    Simulate(Common),
    /// Exact and asymptotic eigenpairs: spectrum.csv and eigvec_<k>.csv.
    Spectrum(Common),
    /// Threshold time estimates along one parameter axis: sweep_<axis>.csv.
    Sweep(Common),
    /// Run the validation suite and write validation.csv.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (same as the `out` key).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and validation.
    #[arg(long, env = "GCSELECT_JOBS")]
    jobs: Option<usize>,
    /// Key overrides: --key value or --key=value.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

const EXIT_IO: u8 = 1;
const EXIT_NO_THRESHOLD: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut pairs = parse_overrides(&self.overrides)?;
        if let Some(out) = &self.out {
            pairs.insert(0, ("out".into(), out.display().to_string()));
        }
        if let Some(jobs) = self.jobs {
            pairs.insert(0, ("jobs".into(), jobs.to_string()));
        }
        Ok(RunConfig::load(self.config.as_deref(), &pairs)?)
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = c.load()?;
            let report = commands::simulate(&cfg)?;
            match report.threshold_time {
                Some(t) => println!("threshold_time {t:.12e}"),
                None => {
                    println!("threshold not reached by t = {}", cfg.t_max);
                    if cfg.stop_at_threshold {
                        return Ok(EXIT_NO_THRESHOLD);
                    }
                }
            }
        }
        Command::Spectrum(c) => {
            let cfg = c.load()?;
            let files = commands::spectrum(&cfg)?;
            println!("wrote {} files to {}", files.len(), cfg.out.display());
        }
        Command::Sweep(c) => {
            let cfg = c.load()?;
            let (path, rows) = commands::sweep(&cfg, cfg.jobs)?;
            let failed = rows.iter().filter(|r| !r.errors.is_empty()).count();
            println!("wrote {} ({} points, {failed} with errors)", path.display(), rows.len());
        }
        Command::Validate(c) => {
            let cfg = c.load()?;
            let overrides = Overrides {
                dt: cfg.is_set("dt").then_some(cfg.dt),
                n_cells: cfg.is_set("n_cells").then_some(cfg.n_cells),
            };
            let checks = validation::run_all(&overrides, cfg.jobs)?;
            print!("{}", validation::table(&checks));
            let path = validation::write_report(&cfg.out, &checks)?;
            println!("wrote {}", path.display());
            if checks.iter().any(|c| !c.passed) {
                return Ok(EXIT_VALIDATION);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_IO)
        }
    }
}
