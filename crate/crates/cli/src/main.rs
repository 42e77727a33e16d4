//! `rvrp`: solve, benchmark and replay redundant robot assignment.
//!
//! Exit codes: 0 on success, 1 on invalid input, 2 when a size guard refuses
//! the request.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rvrp_core::bench::BenchError;
use rvrp_core::solvers::SolverError;

#[derive(Parser)]
#[command(name = "rvrp", version, about = "Redundant robot assignment under positional uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Args, Clone)]
pub struct Common {
    /// Flat key=value file; flags override its values. A manifest works too.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base seed; falls back to the config, then RVRP_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a 4-connected grid graph.
    GenGrid(commands::GenGridArgs),
    /// Sample robot and goal nodes into an instance file.
    GenInstance(commands::GenInstanceArgs),
    /// Run one planning method on an instance file.
    Solve(commands::SolveArgs),
    /// Monte Carlo benchmark over deployment caps.
    Bench(commands::BenchArgs),
    /// Monte Carlo benchmark over noise scales.
    Sweep(commands::BenchArgs),
    /// Replay a request trace through the batched dispatcher.
    Replay(commands::ReplayArgs),
    /// Write a synthetic Poisson request trace.
    GenTrace(commands::GenTraceArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::GenGrid(a) => commands::gen_grid(a),
        Command::GenInstance(a) => commands::gen_instance(a),
        Command::Solve(a) => commands::solve(a),
        Command::Bench(a) => commands::bench(a, false),
        Command::Sweep(a) => commands::bench(a, true),
        Command::Replay(a) => commands::replay(a),
        Command::GenTrace(a) => commands::gen_trace(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_guard_refusal(&e) { 2 } else { 1 })
        }
    }
}

fn is_guard_refusal(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(c.downcast_ref::<SolverError>(), Some(SolverError::TooLarge { .. }))
            || matches!(c.downcast_ref::<BenchError>(), Some(BenchError::Solver(SolverError::TooLarge { .. })))
    })
}
