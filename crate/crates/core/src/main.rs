//! Command-line runner for the spatial-mode entanglement simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hgbeam::scenario::{self, RunOptions};

#[derive(Parser)]
#[command(name = "hgbeam", version, about = "Simulate squeezing and entanglement between \
the first-order Hermite-Gaussian modes of a single beam", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write traces, inseparability results, and a report.
    Run {
        /// Config file path, or the name of a bundled scenario.
        #[arg(long)]
        config: String,
        /// Output directory for CSV files and the run report.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the RNG seed of the measurement.
        #[arg(long)]
        seed: Option<u64>,
        /// Output format (only `csv` is supported).
        #[arg(long, default_value = "csv")]
        format: String,
        /// Skip the Monte Carlo stage, keeping analytic outputs only.
        #[arg(long)]
        no_montecarlo: bool,
    },
    /// Check a config and print diagnostics without running it.
    Validate {
        #[arg(long)]
        config: String,
    },
    /// Re-run the analytic pipeline over a list of values for one scalar
    /// parameter (dot-separated path, e.g. `source.relative_phase_rad`).
    Sweep {
        #[arg(long)]
        config: String,
        #[arg(long)]
        param: String,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// List the bundled scenarios.
    ListScenarios,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> hgbeam::Result<()> {
    match cli.command {
        Command::Run { config, out, seed, format, no_montecarlo } => {
            if format != "csv" {
                return Err(hgbeam::Error::InvalidConfig(format!(
                    "unsupported output format `{format}` (only `csv`)"
                )));
            }
            let cfg = scenario::load_config(&config)?;
            let opts = RunOptions { out_dir: out, seed, no_monte_carlo: no_montecarlo };
            let artifacts = scenario::run_scenario(&cfg, &opts)?;
            println!(
                "scenario `{}` done; wrote {} file(s) to {}",
                artifacts.report.scenario,
                artifacts.report.files.len() + 1,
                opts.out_dir.display()
            );
            if let Some(res) = &artifacts.inseparability_analytic {
                println!(
                    "inseparability (analytic): phi0 = {:.6} rad, I_raw = {:.4}, \
                     I_corrected = {:.4}",
                    res.phi0, res.i_raw, res.i_corrected
                );
            }
            if let Some(res) = &artifacts.inseparability_monte_carlo {
                println!(
                    "inseparability (Monte Carlo): phi0 = {:.6} rad, I_raw = {:.4}, \
                     I_corrected = {:.4}",
                    res.phi0, res.i_raw, res.i_corrected
                );
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = scenario::load_config(&config)?;
            let diagnostics = scenario::validate(&cfg);
            if diagnostics.is_empty() {
                println!("ok: `{}` is runnable", cfg.name);
                Ok(())
            } else {
                for d in &diagnostics {
                    eprintln!("{d}");
                }
                Err(hgbeam::Error::InvalidConfig(format!(
                    "{} diagnostic(s)",
                    diagnostics.len()
                )))
            }
        }
        Command::Sweep { config, param, values, out } => {
            let cfg = scenario::load_config(&config)?;
            let table = scenario::sweep(&cfg, &param, &values)?;
            std::fs::create_dir_all(&out)?;
            let path = out.join(format!("{}_sweep.csv", cfg.name));
            let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
            table.write_csv(&mut file)?;
            for row in &table.rows {
                println!(
                    "{} = {}: I = {:.6}, V_sum = {:.6}, V_diff = {:.6}",
                    param, row.value, row.i, row.v_sum, row.v_diff
                );
            }
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::ListScenarios => {
            for name in scenario::bundled_names() {
                let cfg = scenario::bundled(name).expect("bundled scenario parses");
                println!("{name:<18} {}", cfg.description);
            }
            Ok(())
        }
    }
}
