use clap::{Parser, Subcommand};
use nadmm_cli::{
    cmd_diagnose, cmd_gallery, cmd_run, seed_from_env, CliError, DiagnoseOptions, EXIT_ERROR,
    EXIT_NOT_CONVERGED, EXIT_OK,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nadmm",
    version,
    about = "Multi-block nonconvex ADMM with convergence diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a TOML config and write its trace.
    /// Exit status: 0 converged, 2 not converged, 1 error.
    Run { config: PathBuf },
    /// Run a named example and compare it with its closed-form iterates.
    Gallery {
        name: String,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// Also write the trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Post-hoc checks on a trace CSV. Exit status: 0 all passed, 2 some failed, 1 error.
    Diagnose {
        trace: PathBuf,
        /// TOML file with l_g, l_h, mbar and sigma_min_b; enables the dual-control check.
        #[arg(long)]
        constants: Option<PathBuf>,
        /// Where to write the JSON report (default: next to the trace).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Fraction of the trace, from the end, used by the descent check.
        #[arg(long, default_value_t = 1.0)]
        window: f64,
    },
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Run { config } => {
            let outcome = cmd_run(&config, seed_from_env()?, &mut out)?;
            Ok(if outcome.summary.converged {
                EXIT_OK
            } else {
                EXIT_NOT_CONVERGED
            })
        }
        Command::Gallery {
            name,
            beta,
            iters,
            trace,
        } => {
            cmd_gallery(&name, beta, iters, trace.as_deref(), &mut out)?;
            Ok(EXIT_OK)
        }
        Command::Diagnose {
            trace,
            constants,
            report,
            window,
        } => {
            let opts = DiagnoseOptions {
                window,
                ..Default::default()
            };
            let outcome = cmd_diagnose(
                &trace,
                constants.as_deref(),
                report.as_deref(),
                opts,
                &mut out,
            )?;
            Ok(if outcome.all_passed() {
                EXIT_OK
            } else {
                EXIT_NOT_CONVERGED
            })
        }
    }
}

fn main() -> ExitCode {
    let code = match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
