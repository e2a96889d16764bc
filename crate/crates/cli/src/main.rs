use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use susy_pert_cli::{reproduce_paper, run_scenario, write_ledger, CliError, OutputFormat, RunOptions, ToleranceProfile};

#[derive(Parser)]
#[command(name = "susypt", version, about = "Supersymmetric perturbation runs and the reproduction ledger")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory receiving the output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Override the scenario's grid size (odd, ≥ 201).
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// Override the scenario's number of orders.
    #[arg(long, global = true)]
    orders: Option<usize>,
    /// Write only one file family; both by default.
    #[arg(long, global = true)]
    format: Option<Format>,
    #[arg(long, global = true, value_enum, default_value = "default")]
    tolerance_profile: Profile,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { path: PathBuf },
    /// Rebuild the claims ledger.
    ReproducePaper,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Strict,
    Default,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match cli.format {
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Json) => OutputFormat::Json,
        None => OutputFormat::Both,
    };
    let tolerance = match cli.tolerance_profile {
        Profile::Strict => ToleranceProfile::Strict,
        Profile::Default => ToleranceProfile::Default,
    };
    let result: Result<Vec<PathBuf>, CliError> = match cli.command {
        Command::Run { path } => {
            let options = RunOptions { out_dir: cli.out_dir, grid_points: cli.grid_points, orders: cli.orders, format, tolerance };
            run_scenario(&path, &options)
        }
        Command::ReproducePaper => write_ledger(&reproduce_paper(tolerance), &cli.out_dir, format),
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
