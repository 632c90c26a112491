use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hdqn::agent::load_checkpoint;
use hdqn::harness::{evaluate_policy, run_experiment, solve_chain, Backend, ExperimentConfig};
use hdqn::Error;

#[derive(Parser)]
#[command(name = "hdqn", about = "Hierarchical Q-learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train over the configured seeds and write CSVs and checkpoints.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run only this seed instead of the configured list.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        backend: Option<Backend>,
    },
    /// Roll out a saved checkpoint with fixed exploration.
    Eval {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Solve the fully observed chain exactly and print V* and π*.
    Oracle {
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<ExperimentConfig, Error> {
    match path {
        Some(p) => ExperimentConfig::from_file(p).map_err(|e| match e {
            Error::Io(io) => Error::Config {
                line: 0,
                message: format!("{}: {io}", p.display()),
            },
            other => other,
        }),
        None => Ok(ExperimentConfig::default()),
    }
}

fn exit_code(err: &Error) -> ExitCode {
    match err {
        Error::Config { .. } | Error::Layout(_) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            backend,
        } => {
            let mut cfg = load_config(config.as_ref())?;
            if let Some(s) = seed {
                cfg.seeds = vec![s];
            }
            if let Some(b) = backend {
                cfg.backend = b;
            }
            cfg.validate()?;
            let report = run_experiment(&cfg, &out)?;
            for run in &report.runs {
                println!(
                    "seed {}: {} episodes, final {}-episode mean reward {:.4} ({:.1}s)",
                    run.seed,
                    run.episodes.len(),
                    cfg.final_window,
                    run.final_mean(cfg.final_window),
                    run.elapsed.as_secs_f64()
                );
            }
            println!("wrote {} files to {}", report.files.len(), out.display());
        }
        Command::Eval {
            config,
            checkpoint,
            seed,
            episodes,
            epsilon,
        } => {
            let cfg = load_config(config.as_ref())?;
            let ckpt = load_checkpoint(&checkpoint, cfg.hdqn_settings(), seed)?;
            let report = evaluate_policy(
                &ckpt,
                &cfg,
                episodes.unwrap_or(cfg.eval_episodes),
                epsilon.unwrap_or(cfg.eval_epsilon),
                seed,
            )?;
            print!("{report}");
        }
        Command::Oracle { gamma } => {
            let sol = solve_chain(gamma);
            println!("gamma {gamma}, {} iterations, residual {:e}", sol.iterations, sol.residual);
            println!("state,position,visited,v,q_left,q_right,policy");
            for (s, v) in sol.values.iter().enumerate() {
                let policy = if sol.policy[s].0 == 0 { "left" } else { "right" };
                println!(
                    "{s},{},{},{v},{},{},{policy}",
                    s % 6 + 1,
                    u8::from(s >= 6),
                    sol.q[s][0],
                    sol.q[s][1]
                );
            }
            println!("V*(s2) = {}", sol.start_value());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
