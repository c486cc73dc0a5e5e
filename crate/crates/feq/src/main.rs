use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use feq::commands::{self, RunArgs, EXIT_INPUT};

#[derive(Debug, Parser)]
#[command(name = "feq", version, about = "Solve and certify linear functional equations on [-1, 1]")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, clap::Args)]
struct RunOpts {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    boundary_samples: Option<usize>,
}

impl From<RunOpts> for RunArgs {
    fn from(o: RunOpts) -> Self {
        RunArgs { config: o.config, out: o.out, tol: o.tol, max_iter: o.max_iter, boundary_samples: o.boundary_samples }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certify the hypotheses, solve, and write report.json, solution.csv, coeffs.csv.
    Solve(RunOpts),
    /// Write the hypothesis certificate only.
    Certify(RunOpts),
    /// Estimate sup_n (|psi^(n)|/n!)^(1/n) for an expression in x.
    Lambda {
        expression: String,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the Chebyshev coefficient decay of a coeffs.csv table.
    Diagnose {
        coeffs: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in example instances.
    Examples {
        #[command(subcommand)]
        cmd: ExamplesCommand,
    },
}

#[derive(Debug, Subcommand)]
enum ExamplesCommand {
    /// Print the run config of example `id` (1 to 4).
    Export {
        id: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    // usage errors share the config-error exit code; 2 means a failed certificate
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = match cli.cmd {
        Command::Solve(o) => commands::solve(&o.into()),
        Command::Certify(o) => commands::certify(&o.into()),
        Command::Lambda { expression, nmax, out } => commands::lambda(&expression, nmax, out.as_deref()),
        Command::Diagnose { coeffs, k, out } => commands::diagnose(&coeffs, k, out.as_deref()),
        Command::Examples { cmd: ExamplesCommand::Export { id, out } } => commands::export_example(id, out.as_deref()),
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
