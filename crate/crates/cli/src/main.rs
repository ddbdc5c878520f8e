use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use qmt_cli::model::builtin_models;
use qmt_cli::{rows_to_csv, run_convergence, run_sweep, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "qmt", version, about = "Quantum metric sweeps, comparisons and convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file and write CSV plus diagnostics.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.path`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Landau rows at one field strength for several gauge values, as CSV on stdout.
    Compare {
        #[arg(long = "B", allow_negative_numbers = true)]
        b: f64,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        g: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        m: u32,
    },
    /// Grid and step convergence at the config's first sweep point.
    Convergence {
        #[arg(long)]
        config: PathBuf,
    },
    /// List built-in models.
    Models,
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Sweep { config, output } => {
            let mut config = RunConfig::load(&config)?;
            if let Some(path) = output {
                config.output.path = path;
            }
            let rows = run_sweep(&config)?;
            eprintln!("wrote {} rows to {}", rows.len(), config.output.path.display());
        }
        Command::Compare { b, g, m } => {
            let config = RunConfig::landau_point(b, g, m)?;
            let rows = qmt_cli::compute_rows(&config)?;
            print!("{}", String::from_utf8(rows_to_csv(&rows)).expect("csv is utf-8"));
        }
        Command::Convergence { config } => {
            let config = RunConfig::load(&config)?;
            let report = run_convergence(&config)?;
            print!("{}", report.render());
            if !report.passed() {
                return Err(CliError::Numerical("convergence checks failed".into()));
            }
        }
        Command::Models => {
            for (name, about) in builtin_models() {
                println!("{name:<8} {about}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
