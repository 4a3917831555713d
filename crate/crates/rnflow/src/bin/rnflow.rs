//! Thin CLI over [`rnflow::config`]. Exit codes: 0 success, 1 failed
//! hypothesis check, 2 config or I/O error, 3 numerical abort.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rnflow::config::{check_hypotheses, run_experiment, sweep_experiment, ExperimentConfig};
use rnflow::Error;

#[derive(Parser)]
#[command(name = "rnflow", version, about = "Tikhonov-regularized Newton flows for convex problems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate one experiment; writes trajectory.csv and report.json
    Run {
        config: PathBuf,
        /// Print the parsed config as canonical JSON and exit
        #[arg(long)]
        dump_config: bool,
    },
    /// Rerun the experiment across values of one axis (mu, T, h, p, c)
    Sweep {
        config: PathBuf,
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Test the slow-regime convergence hypotheses without integrating
    Check { config: PathBuf },
}

fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::NonFiniteState { .. } | Error::NonFiniteValue(_) => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

fn dispatch(cmd: Cmd) -> Result<ExitCode, Error> {
    match cmd {
        Cmd::Run { config, dump_config } => {
            let cfg = ExperimentConfig::load(&config)?;
            if dump_config {
                print!("{}", cfg.dump());
                return Ok(ExitCode::SUCCESS);
            }
            let out = run_experiment(&cfg)?;
            println!(
                "run: wrote {} (dist_to_target={:.6e}, phi_gap={:.6e})",
                out.dir.display(),
                out.report.dist_to_target,
                out.report.phi_gap
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep { config, axis, values } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = sweep_experiment(&cfg, &axis, &values)?;
            for row in &out.rows {
                if let Some(err) = &row.error {
                    eprintln!("sweep: cell {axis}={} failed: {err}", row.value);
                }
            }
            println!("sweep: wrote {} ({} cells)", out.dir.join("sweep_summary.csv").display(), out.rows.len());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Check { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = check_hypotheses(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&out.summary).expect("summary serializes"));
            Ok(if out.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
