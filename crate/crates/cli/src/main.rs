//! `balgraph`: batch driver for building, verifying and using balanced
//! extractor graphs.
//!
//! Exit codes: 0 pass, 1 usage error, 2 construction or parameter failure,
//! 3 capacity exceeded.

mod commands;
mod config;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "balgraph", version, about = "Balanced extractor graphs and list approximation")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Rejection-sample a table graph and verify it exactly.
    BuildRandom,
    /// Build the linear backend from (n, ε) and check its guarantees.
    BuildLinear,
    /// Check every prefix view of a graph file plus the degree condition.
    Verify,
    /// Heavy/bad classification of a set B.
    Congestion,
    /// Export the list f(x), or one element of it.
    Amplify,
    /// Write the set {x : C(x) <= k} of an oracle.
    MakeBset,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::BuildRandom => "build-random",
            Command::BuildLinear => "build-linear",
            Command::Verify => "verify",
            Command::Congestion => "congestion",
            Command::Amplify => "amplify",
            Command::MakeBset => "make-bset",
        }
    }
}

/// Flags override the matching config fields.
#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    index: Option<u64>,
    #[arg(long, global = true)]
    bset: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Largest number of subsets an exact check may visit.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[arg(long = "sampled-trials", global = true)]
    sampled_trials: Option<u64>,
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Left node in hex.
    #[arg(long, global = true)]
    x: Option<String>,
    #[arg(long, global = true)]
    k: Option<u32>,
}

impl Flags {
    fn apply(&self, c: &mut RunConfig) {
        macro_rules! set {
            ($($f:ident => $g:ident),*) => {$(
                if let Some(v) = &self.$f {
                    c.$g = Some(v.clone());
                }
            )*};
        }
        set!(seed => seed, index => index, bset => bset, out => out, budget => max_subsets,
             sampled_trials => sampled_trials, graph => graph, report => report, x => x, k => k);
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    pub fn failure(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<balgraph::Error> for CliError {
    fn from(e: balgraph::Error) -> Self {
        let code = match e {
            balgraph::Error::Capacity(_) => 3,
            balgraph::Error::Io(_) => 1,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::failure(e.to_string())
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut config = match &cli.flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.flags.apply(&mut config);
    commands::check_inputs(&config)?;
    let outcome = match cli.command {
        Command::BuildRandom => commands::build_random(&mut config)?,
        Command::BuildLinear => commands::build_linear(&mut config)?,
        Command::Verify => commands::verify(&mut config)?,
        Command::Congestion => commands::congestion(&mut config)?,
        Command::Amplify => commands::amplify(&mut config)?,
        Command::MakeBset => commands::make_bset(&mut config)?,
    };
    let pass = outcome.pass;
    report::emit(cli.command.name(), &config, outcome)?;
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
