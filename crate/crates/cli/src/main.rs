mod check;
mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit code for malformed invocations and unreadable inputs.
pub const USAGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "scwb", version, about = "Secure compilation workbench: compile, run, back-translate and check robust criteria")]
pub struct Cli {
    /// Seed for generator-backed commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Emit one structured JSON document instead of the plain form.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compile a source program to the untyped target language.
    Compile {
        file: PathBuf,
    },
    /// Run a whole program and print its trace as JSON lines.
    Run(RunArgs),
    /// Back-translate a target context into a source context.
    #[command(name = "backtranslate-ctx")]
    BacktranslateCtx {
        #[arg(long)]
        iface: PathBuf,
        ctx: PathBuf,
    },
    /// Back-translate a set of informative trace prefixes into one source context.
    #[command(name = "backtranslate-traces")]
    BacktranslateTraces(TracesArgs),
    /// Check a robust criterion on a compilation chain.
    Check(check::CheckArgs),
    /// Classify a property monitor as safety, dense, both or neither.
    Classify {
        spec: PathBuf,
        /// Prefix length explored by the bounded density check.
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Run one of the built-in separation demos.
    Demo {
        name: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lang {
    Src,
    Tgt,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub lang: Lang,
    #[arg(long)]
    pub program: PathBuf,
    #[arg(long)]
    pub context: PathBuf,
    /// Comma-separated input script, e.g. `5,7`.
    #[arg(long, value_delimiter = ',', default_value = "")]
    pub inputs: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    pub budget: u64,
    /// Record calls and returns across the program boundary.
    #[arg(long)]
    pub informative: bool,
}

#[derive(Args, Debug)]
pub struct TracesArgs {
    #[arg(long)]
    pub iface: PathBuf,
    /// JSON array of informative traces, each an array of event objects ending in a terminal mark.
    #[arg(long)]
    pub prefixes: PathBuf,
    /// Source programs to replay the result against, one per prefix.
    #[arg(long, num_args = 1..)]
    pub programs: Vec<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub budget: u64,
}

/// A failed invocation: message for stderr plus exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: USAGE, message: message.into() }
    }
}

/// Stdout text and exit code of a successful dispatch.
pub struct Outcome {
    pub stdout: String,
    pub code: u8,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.stdout.as_bytes());
            let _ = stdout.flush();
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("scwb: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
