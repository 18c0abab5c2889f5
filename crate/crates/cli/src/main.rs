use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lls_cli::{cmd_check, cmd_simulate, cmd_study, StudyKind};

#[derive(Parser)]
#[command(name = "lls", version, about = "Stochastic LLG wire simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one path and write snapshots, diagnostics and a manifest.
    Simulate {
        config: PathBuf,
        #[arg(short, long, env = "LLS_OUT_DIR", default_value = "out")]
        out: PathBuf,
        /// Also write packed binary snapshots.
        #[arg(long)]
        binary: bool,
    },
    /// Run the identity battery on random inputs.
    Check {
        config: PathBuf,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Run a multi-resolution or multi-path study.
    Study {
        config: PathBuf,
        #[arg(long)]
        kind: StudyKind,
        #[arg(short, long, env = "LLS_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    // usage errors count as validation errors, not clap's default of 2
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.command {
        Command::Simulate { config, out, binary } => cmd_simulate(&config, &out, binary).map(|_| ()),
        Command::Check { config, trials } => cmd_check(&config, trials),
        Command::Study { config, kind, out } => cmd_study(&config, kind, &out),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
