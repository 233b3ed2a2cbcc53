use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nonlocal_lab::{exit_status, run_config, RunOptions, TaskKind};

#[derive(Parser)]
#[command(
    name = "nonlocal-lab",
    version,
    about = "Run nonlocal p-Laplace experiments from a JSON config"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config's output block.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel kernels.
    #[arg(long)]
    threads: Option<usize>,
    /// Base seed for random test functions.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Dini and scaling checks of the configured kernel.
    CheckKernel(Common),
    /// Solve the Dirichlet problem and write the solution.
    Solve(Common),
    /// Evaluate nonlocal tails.
    Tail(Common),
    /// Run the configured inequality reports.
    Verify(Common),
    /// Energy curves and local-limit studies in s.
    Stability(Common),
    /// Run every task of the config in order.
    Run(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (only, args) = match cli.command {
        Command::CheckKernel(a) => (Some(TaskKind::CheckKernel), a),
        Command::Solve(a) => (Some(TaskKind::Solve), a),
        Command::Tail(a) => (Some(TaskKind::Tail), a),
        Command::Verify(a) => (Some(TaskKind::Verify), a),
        Command::Stability(a) => (Some(TaskKind::Stability), a),
        Command::Run(a) => (None, a),
    };
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let opts = RunOptions {
        only,
        out: args.out,
        seed: args.seed,
    };
    let result = run_config(&args.config, &opts);
    match &result {
        Ok(outcome) => {
            // single-record kinds print the record itself
            let as_json = matches!(opts.only, Some(TaskKind::CheckKernel | TaskKind::Tail));
            for rec in &outcome.records {
                if as_json {
                    let line = serde_json::json!({"name": rec.name, "pass": rec.pass, "record": rec.body});
                    println!("{line}");
                } else {
                    println!("{} {}", if rec.pass { "ok  " } else { "FAIL" }, rec.name);
                }
            }
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_status(&result) as u8)
}
