use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hybridloc::eval::{run_experiment, ExperimentConfig, Stage};
use hybridloc::Error;

#[derive(Parser)]
#[command(name = "hybridloc", version, about = "Camera global localization on synthetic laps", allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// `key = value` experiment file; defaults apply to missing keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for models, logs and metrics
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// Keyframe spacing in meters
    #[arg(long, global = true)]
    spacing_m: Option<f64>,
    /// Largest keyframe to live-frame distance used for training pairs
    #[arg(long, global = true)]
    dmax_m: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Render the synthetic laps into a dataset
    Synth,
    /// Train the place memory on the keyframes
    TrainWnn,
    /// Train the relative pose network
    TrainCnn,
    /// Localize every test frame and write the fix log
    Localize,
    /// Score the fix log
    Eval,
    /// Run the stages listed in the config (all by default)
    Run,
}

fn build_config(cli: &Cli) -> hybridloc::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(p) = &cli.out {
        cfg.out_dir = p.clone();
    }
    if let Some(p) = &cli.dataset {
        cfg.dataset = p.clone();
    }
    if let Some(v) = cli.spacing_m {
        cfg.key_spacing_m = v;
    }
    if let Some(v) = cli.dmax_m {
        cfg.dmax_m = v;
    }
    let only = match cli.command {
        Command::Synth => Some(Stage::Synth),
        Command::TrainWnn => Some(Stage::TrainWnn),
        Command::TrainCnn => Some(Stage::TrainCnn),
        Command::Localize => Some(Stage::Localize),
        Command::Eval => Some(Stage::Eval),
        Command::Run => None,
    };
    if let Some(stage) = only {
        cfg.stages = vec![stage];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code(e: &Error) -> ExitCode {
    ExitCode::from(if e.is_config_error() { 2 } else { 3 })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|cfg| run_experiment(&cfg));
    match result {
        Ok(summary) => {
            if let Some(r) = &summary.train_report {
                println!(
                    "validation error {:.3} m -> {:.3} m after {} epochs",
                    r.initial_valid_err, r.best_valid_err, r.epochs_run
                );
            }
            if summary.fixes > 0 {
                println!("{} fixes written", summary.fixes);
            }
            for (name, s) in &summary.stats {
                println!("{name}: median {:.3} m, mean {:.3} m over {}", s.median, s.mean, s.n);
            }
            if let Some(c) = &summary.mae {
                let a0 = c.accuracy(0).unwrap_or(0.0);
                println!("place recall at zero frame error: {a0:.3}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
