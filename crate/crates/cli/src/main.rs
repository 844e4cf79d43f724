use std::path::PathBuf;
use std::process::ExitCode;

use bbm_core::experiments::{list_experiments, run_from_text, ExitStatus, ExperimentConfig, ExperimentId};
use clap::{Parser, Subcommand};

/// Stochastic BBM experiments.
#[derive(Parser)]
#[command(name = "bbm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// `key=value` override, dotted keys address sections (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Ensemble worker threads; results do not depend on it.
        #[arg(long, env = "BBM_WORKERS", default_value_t = default_workers())]
        workers: usize,
        /// Replaces `seed.master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Replaces `out_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List experiment ids.
    List,
    /// Print the full default config of an experiment.
    Defaults { experiment: String },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn,bbm_core::solvers=error")).init();
    match Cli::parse().command {
        Command::List => {
            for (id, description, statement) in list_experiments() {
                println!("{id:<17} {description}\n{:<17} checks: {statement}", "");
            }
            ExitCode::SUCCESS
        }
        Command::Defaults { experiment } => match ExperimentId::parse(&experiment) {
            Some(id) => match ExperimentConfig::defaults(id).to_toml() {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(ExitStatus::Runtime as u8)
                }
            },
            None => {
                eprintln!("error: unknown experiment '{experiment}'");
                ExitCode::from(ExitStatus::Schema as u8)
            }
        },
        Command::Run {
            config,
            mut set,
            workers,
            seed,
            out,
        } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", config.display());
                    return ExitCode::from(ExitStatus::Schema as u8);
                }
            };
            if let Some(s) = seed {
                set.push(format!("seed.master_seed={s}"));
            }
            let outcome = run_from_text(&text, &set, out.as_deref(), workers.max(1));
            if let Some(msg) = &outcome.message {
                eprintln!("error: {msg}");
            }
            if let Some(res) = &outcome.result {
                for g in &res.gates {
                    println!("{} {:<45} {}", if g.passed { "PASS" } else { "FAIL" }, g.name, g.detail);
                }
            }
            ExitCode::from(outcome.status as u8)
        }
    }
}
