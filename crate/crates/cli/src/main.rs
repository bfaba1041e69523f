use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use rgrl_cli as cmd;
use rgrl_core::io::Preset;

#[derive(Parser)]
#[command(name = "rgrl", version, about = "Representation-guided reinforcement learning for quantum control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the measurement dataset for the configured task.
    GenData(Common),
    /// Train the representation network on the dataset.
    TrainRepnet(Common),
    /// Train the PPO control agent against the representation network.
    TrainAgent(Common),
    /// Evaluate the trained agent on the task's scenarios.
    Eval(Common),
    /// Export a 2-D PCA of the dataset representations.
    ExportEmbedding(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Run directory holding every artifact.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse::<Preset>().map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (name, c) = match &cli.command {
        Command::GenData(c) => ("gen-data", c),
        Command::TrainRepnet(c) => ("train-repnet", c),
        Command::TrainAgent(c) => ("train-agent", c),
        Command::Eval(c) => ("eval", c),
        Command::ExportEmbedding(c) => ("export-embedding", c),
    };
    let cfg = cmd::load_config(c.config.as_deref(), c.seed, c.preset)?;
    let out = &c.out;
    match cli.command {
        Command::GenData(_) => println!("wrote {}", cmd::gen_data(&cfg, out)?.display()),
        Command::TrainRepnet(_) => {
            let r = cmd::train_repnet(&cfg, out)?;
            println!("wrote {} (final loss {:.4})", r.path.display(), r.final_loss);
            if !r.healthy {
                eprintln!("{name}: loss trace is not healthy (non-finite or not decreasing)");
                return Ok(ExitCode::from(2));
            }
        }
        Command::TrainAgent(_) => println!("wrote {}", cmd::train_agent(&cfg, out)?.display()),
        Command::Eval(_) => {
            let e = cmd::eval(&cfg, out)?;
            for s in &e.summary.scenarios {
                let base = e.summary.baseline_scenario(&s.name).map(|b| format!("  uniform {:.4}", b.mean_fidelity)).unwrap_or_default();
                println!("{:<14} fidelity {:.4} ± {:.4}  initial {:.4}{base}", s.name, s.mean_fidelity, s.ci_half_width, s.mean_initial_fidelity);
            }
        }
        Command::ExportEmbedding(_) => println!("wrote {}", cmd::export_embedding(&cfg, out)?.display()),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
