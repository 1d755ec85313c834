use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use overalg::model::{Alpha, CoefMatrix};
use overalg_cli::{density_rows, parse_alpha, parse_grid, run_verify, write_density, CliError, RunConfig, SMaxArg, Suite};

#[derive(Parser, Debug)]
#[command(name = "overalg", version, about = "Verify the spectral-side operator identities and export Plancherel densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Tabulate the Plancherel density in both closed forms as CSV.
    Density(DensityArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value = "2.0", value_parser = parse_alpha)]
    alpha: f64,
    /// Total degree of the random test functions.
    #[arg(long, default_value_t = 6)]
    degree: usize,
    #[arg(long, default_value_t = 100)]
    num_points: usize,
    #[arg(long, default_value_t = 0.05)]
    pole_margin: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Upper end of the s-integration, or "auto".
    #[arg(long, default_value = "auto")]
    s_max: SMaxArg,
    /// Number of random test functions.
    #[arg(long, default_value_t = 20)]
    functions: usize,
    /// Coefficient matrix JSON to test instead of random functions.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[arg(long, default_value = "2.0", value_parser = parse_alpha)]
    alpha: f64,
    /// `start:stop:step` or a comma-separated list, inside [0, 50].
    #[arg(long, default_value = "0:12:0.1", allow_hyphen_values = true)]
    s_grid: String,
    /// CSV path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn configure_threads() {
    let threads = std::env::var("OVERALG_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    if threads > 0 {
        // Fails only if a pool exists already, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
}

fn sink(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn verify(args: VerifyArgs) -> Result<bool, CliError> {
    let config = RunConfig {
        alpha: args.alpha,
        degree: args.degree,
        num_points: args.num_points,
        pole_margin: args.pole_margin,
        seed: args.seed,
        tolerance: args.tolerance,
        s_max: args.s_max,
        functions: args.functions,
    };
    let input = args
        .input
        .as_ref()
        .map(|p| -> Result<CoefMatrix, CliError> { Ok(CoefMatrix::from_json(&std::fs::read_to_string(p)?)?) })
        .transpose()?;
    let report = run_verify(&config, args.suite, input.as_ref())?;
    let mut out = sink(args.output.as_ref())?;
    out.write_all(report.to_json()?.as_bytes())?;
    out.flush()?;
    for line in report.failures() {
        eprintln!("FAIL {line}");
    }
    Ok(report.passed)
}

fn density(args: DensityArgs) -> Result<(), CliError> {
    let alpha = Alpha::new(args.alpha)?;
    let grid = parse_grid(&args.s_grid)?;
    write_density(sink(args.output.as_ref())?, &density_rows(alpha, &grid))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let outcome = match cli.command {
        Command::Verify(args) => verify(args),
        Command::Density(args) => density(args).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
