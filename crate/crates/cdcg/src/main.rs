use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cdcg::cli::{cmd_brute, cmd_run, cmd_verify, cmd_weights, exit_code, ExperimentConfig};

/// Decentralized submodular maximization experiments: consensus
/// continuous-greedy vs. sequential greedy, with bound verification.
#[derive(Parser)]
#[command(name = "cdcg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (defaults to the number of cores). Results are
    /// identical for every value.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the configured scenario and write trace/summary artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the exact-mode solver and verify every convergence bound.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print Metropolis weights and the spectral gap of an edge-list graph.
    Weights {
        /// Edge-list file: first line `n`, then `i j` pairs (0-based).
        graph: PathBuf,
    },
    /// Brute-force the configured instance.
    Brute {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: failed to size the thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn run(command: Command) -> cdcg::Result<ExitCode> {
    match command {
        Command::Run { config, out, seed } => {
            let config = ExperimentConfig::load(&config)?.with_seed(seed);
            let artifacts = cmd_run(&config, out.as_deref())?;
            println!("wrote {}", artifacts.summary_path.display());
            println!("wrote {}", artifacts.trace_path.display());
            println!("wrote {}", artifacts.positions_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { config, out, seed } => {
            let config = ExperimentConfig::load(&config)?.with_seed(seed);
            let report = cmd_verify(&config, out.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            if report.all_pass {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("error: one or more bound checks failed");
                Ok(ExitCode::from(1))
            }
        }
        Command::Weights { graph } => {
            let weights = cmd_weights(&graph)?;
            print!("{}", weights.to_csv());
            println!("beta = {}", weights.beta());
            Ok(ExitCode::SUCCESS)
        }
        Command::Brute { config, seed } => {
            let config = ExperimentConfig::load(&config)?.with_seed(seed);
            let (solution, combinations) = cmd_brute(&config)?;
            let body = serde_json::json!({
                "chosen": solution.chosen,
                "value": solution.value,
                "combinations_enumerated": combinations.to_string(),
            });
            println!("{}", serde_json::to_string_pretty(&body).expect("serializes"));
            Ok(ExitCode::SUCCESS)
        }
    }
}
