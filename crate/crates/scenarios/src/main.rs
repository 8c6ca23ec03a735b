use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dataspace_core::NetworkError;
use dataspace_scenarios::{
    compare_golden, default_goldens_dir, find, render, run_scenario, scenarios, RunOptions,
    Scenario,
};

#[derive(Parser)]
#[command(
    name = "dataspace",
    about = "Run dataspace scenarios and compare their traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List scenario names.
    List,
    /// Run a scenario and print its trace.
    Run {
        name: String,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Write the trace here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario and compare its trace with the stored golden.
    Check {
        name: String,
        #[arg(long)]
        goldens: Option<PathBuf>,
    },
    /// Run a scenario with from-scratch visibility checks after every step.
    Oracle { name: String },
}

const UNKNOWN: u8 = 2;
const NON_QUIESCENT: u8 = 3;
const MISMATCH: u8 = 1;

fn lookup(name: &str) -> Result<&'static Scenario, ExitCode> {
    find(name).ok_or_else(|| {
        eprintln!("unknown scenario `{name}`; try `dataspace list`");
        ExitCode::from(UNKNOWN)
    })
}

fn failed(name: &str, e: NetworkError) -> ExitCode {
    eprintln!("{name}: {e}");
    match e {
        NetworkError::NonQuiescent(_) => ExitCode::from(NON_QUIESCENT),
        NetworkError::OracleDivergence { .. } => ExitCode::FAILURE,
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => {
            for s in scenarios() {
                println!("{:<24} {}", s.name, s.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            name,
            max_steps,
            out,
        } => {
            let s = match lookup(&name) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let opts = RunOptions {
                max_steps,
                ..RunOptions::default()
            };
            let text = match run_scenario(s, &opts) {
                Ok(t) => render(&t),
                Err(e) => return failed(&name, e),
            };
            let written = match out {
                Some(path) => fs::write(&path, text),
                None => io::stdout().lock().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("{name}: {e}");
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Command::Check { name, goldens } => {
            let s = match lookup(&name) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let path = goldens
                .unwrap_or_else(default_goldens_dir)
                .join(s.golden_file());
            let golden = match fs::read_to_string(&path) {
                Ok(g) => g,
                Err(e) => {
                    eprintln!("{}: {e}", path.display());
                    return ExitCode::from(MISMATCH);
                }
            };
            let actual = match run_scenario(s, &RunOptions::default()) {
                Ok(t) => render(&t),
                Err(e) => return failed(&name, e),
            };
            match compare_golden(&golden, &actual) {
                Ok(()) => {
                    println!("{name}: ok");
                    ExitCode::SUCCESS
                }
                Err(m) => {
                    eprintln!(
                        "{name}: trace differs from {} at line {}",
                        path.display(),
                        m.line
                    );
                    eprintln!("- {}", m.expected.as_deref().unwrap_or("<end of file>"));
                    eprintln!("+ {}", m.found.as_deref().unwrap_or("<end of trace>"));
                    ExitCode::from(MISMATCH)
                }
            }
        }
        Command::Oracle { name } => {
            let s = match lookup(&name) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let opts = RunOptions {
                oracle: true,
                ..RunOptions::default()
            };
            match run_scenario(s, &opts) {
                Ok(t) => {
                    println!("{name}: ok ({} trace entries)", t.len());
                    ExitCode::SUCCESS
                }
                Err(e) => failed(&name, e),
            }
        }
    }
}
