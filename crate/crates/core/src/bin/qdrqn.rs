use std::path::PathBuf;
use std::process::{Command, ExitCode};

use clap::Parser;

use qdrqn::experiment::{parameter_report, run_experiment, seed_dir, verify_parameters, ExperimentSpec, Observability};
use qdrqn::recurrent::ModelKind;
use qdrqn::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

/// Train quantum (QLSTM) and classical (LSTM) recurrent Q-learning agents on Cart-Pole.
#[derive(Debug, Parser)]
#[command(name = "qdrqn", version)]
struct Cli {
    /// qlstm-1, qlstm-2, lstm-8 or lstm-16 (any qlstm-<layers> / lstm-<hidden> works).
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelKind>,

    /// Observation mode.
    #[arg(long, value_parser = parse_obs, default_value = "full")]
    obs: Observability,

    /// Training episodes. Defaults to 1000 for LSTM models; required for QLSTM.
    #[arg(long)]
    episodes: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    /// Output directory for scores.csv, config.json and reward_curve.svg.
    #[arg(long, default_value = "runs/latest")]
    out: PathBuf,

    /// Print the model's trainable parameter count and exit.
    #[arg(long)]
    print_params: bool,

    /// Check all eight published parameter counts and exit.
    #[arg(long)]
    verify_params: bool,

    /// Discount factor.
    #[arg(long)]
    gamma: Option<f64>,

    /// Episode step cap.
    #[arg(long)]
    max_steps: Option<usize>,

    /// Pole angle at which an episode ends, in degrees.
    #[arg(long)]
    angle_limit_deg: Option<f64>,

    /// Run this many consecutive seeds in parallel processes, each into OUT/seed-<n>.
    #[arg(long, default_value_t = 1)]
    jobs: usize,

    /// Re-run from a config.json written by an earlier run; other flags override it.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Suppress per-episode progress on stderr.
    #[arg(long)]
    quiet: bool,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_obs(s: &str) -> Result<Observability, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}\n\nFor more information, try '--help'.");
    ExitCode::from(EXIT_USAGE)
}

fn resolve(cli: &Cli) -> Result<ExperimentSpec, String> {
    let mut spec = match &cli.config {
        Some(path) => ExperimentSpec::load(path).map_err(|e| format!("{}: {e}", path.display()))?,
        None => {
            let model = cli.model.ok_or("--model is required")?;
            if model.is_quantum() && cli.episodes.is_none() && !cli.print_params {
                return Err("--episodes is required for qlstm models (circuit simulation is slow)".into());
            }
            ExperimentSpec::new(model, cli.obs)
        }
    };
    if cli.config.is_some() {
        if let Some(model) = cli.model {
            spec.model = model;
        }
    }
    if let Some(v) = cli.episodes {
        spec.train.episodes = v;
    }
    if let Some(v) = cli.seed {
        spec.train.seed = v;
    }
    if let Some(v) = cli.gamma {
        spec.train.gamma = v;
    }
    if let Some(v) = cli.max_steps {
        spec.env.max_steps = v;
    }
    if let Some(v) = cli.angle_limit_deg {
        spec.env.angle_limit = v.to_radians();
    }
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn run_jobs(cli: &Cli, spec: &ExperimentSpec) -> ExitCode {
    let exe = match std::env::current_exe() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot locate executable: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    let config_path = cli.out.join("base-config.json");
    if let Err(e) = std::fs::create_dir_all(&cli.out).and_then(|_| std::fs::write(&config_path, spec.to_json())) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_RUNTIME);
    }
    let children: Vec<_> = (0..cli.jobs as u64)
        .map(|k| {
            let seed = spec.train.seed + k;
            let mut cmd = Command::new(&exe);
            cmd.arg("--config")
                .arg(&config_path)
                .arg("--seed")
                .arg(seed.to_string())
                .arg("--out")
                .arg(seed_dir(&cli.out, seed))
                .arg("--quiet");
            (seed, cmd.spawn())
        })
        .collect();
    let mut worst = 0u8;
    for (seed, child) in children {
        let code = match child.and_then(|mut c| c.wait()) {
            Ok(status) => status.code().unwrap_or(EXIT_RUNTIME as i32) as u8,
            Err(e) => {
                eprintln!("seed {seed}: {e}");
                EXIT_RUNTIME
            }
        };
        if code != 0 {
            eprintln!("seed {seed} exited with status {code}");
        }
        worst = worst.max(code);
    }
    ExitCode::from(worst)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    if cli.verify_params {
        print!("{}", parameter_report(&verify_parameters()));
        return ExitCode::SUCCESS;
    }

    let spec = match resolve(&cli) {
        Ok(s) => s,
        Err(msg) => return usage(msg),
    };

    if cli.print_params {
        return match spec.parameter_count() {
            Ok(n) => {
                println!("{n}");
                ExitCode::SUCCESS
            }
            Err(e) => usage(e),
        };
    }

    if cli.jobs == 0 {
        return usage("--jobs must be at least 1");
    }
    if cli.jobs > 1 {
        return run_jobs(&cli, &spec);
    }

    let quiet = cli.quiet;
    let result = run_experiment(&spec, &cli.out, |e| {
        if !quiet && (e.episode % 10 == 0 || e.episode == 1) {
            eprintln!(
                "episode {:>5}  score {:>5}  loss {:>10}  eps {:.4}",
                e.episode,
                e.score,
                e.mean_loss.map_or("-".to_string(), |l| format!("{l:.4}")),
                e.epsilon
            );
        }
    });
    match result {
        Ok(log) => {
            let scores = log.scores();
            let tail = &scores[scores.len().saturating_sub(100)..];
            if !tail.is_empty() {
                println!(
                    "{} episodes, mean score of last {}: {:.2}; artifacts in {}",
                    scores.len(),
                    tail.len(),
                    tail.iter().sum::<f64>() / tail.len() as f64,
                    cli.out.display()
                );
            }
            ExitCode::SUCCESS
        }
        Err(e @ Error::Config(_)) => usage(e),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
