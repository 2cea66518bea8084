use std::path::PathBuf;
use std::process::ExitCode;

use antijam::darla::{rollout, Policy};
use antijam::harness::{
    compare_runs, export_waterfall_pgm, load_config, run_experiment, ExperimentConfig,
};
use antijam::jammer::JammerKind;
use antijam::qnet::QNetworkParams;
use antijam::spectrum::WaterfallState;
use antijam::Result;
use clap::{Args, Parser, Subcommand};

/// Anti-jamming channel selection experiments.
#[derive(Parser)]
#[command(name = "antijam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent and write metrics, summary, checkpoint and snapshots.
    Train {
        #[command(flatten)]
        common: Common,
        /// Run directory (overrides `out_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a policy and print throughput, reward and action histogram.
    Eval {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Roll a policy out and save the final waterfall as a PGM image.
    Export {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        policy: PolicyArgs,
        /// Output image path.
        #[arg(long, default_value = "waterfall.pgm")]
        out: PathBuf,
    },
    /// Tabulate completed runs and flag pass/fail per jammer.
    Compare {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Jammer kind: none, sweep, comb, random or intelligent.
    #[arg(long)]
    jammer: Option<JammerKind>,
    /// Training epochs for `train`; rollout length for `eval` and `export`.
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args)]
struct PolicyArgs {
    /// Checkpoint written by `train`; required for the greedy policy.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// greedy, random or fixed:<action>. Defaults to greedy when a
    /// checkpoint is given and random otherwise.
    #[arg(long)]
    policy: Option<Policy>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(kind) = self.jammer {
            cfg.jammer.kind = kind;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl PolicyArgs {
    fn resolve(&self) -> Result<(Option<QNetworkParams>, Policy)> {
        let params = self
            .checkpoint
            .as_ref()
            .map(QNetworkParams::load)
            .transpose()?;
        let policy = self.policy.unwrap_or(if params.is_some() {
            Policy::Greedy
        } else {
            Policy::Random
        });
        Ok((params, policy))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { common, out } => {
            let mut cfg = common.config()?;
            if let Some(n) = common.epochs {
                cfg.training.epochs = n;
            }
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            let s = run_experiment(&cfg)?;
            println!("run directory     {}", cfg.out_dir.display());
            println!(
                "train throughput  {:.4}  (last {} epochs)",
                s.train_throughput, s.window
            );
            println!(
                "greedy            {:.4}  reward {:.4}",
                s.greedy_throughput, s.greedy_reward
            );
            println!(
                "random            {:.4}  reward {:.4}",
                s.random_throughput, s.random_reward
            );
            println!(
                "best fixed ({})    {:.4}  reward {:.4}",
                s.best_fixed_action, s.best_fixed_throughput, s.best_fixed_reward
            );
        }
        Command::Eval { common, policy } => {
            let cfg = common.config()?;
            let (params, policy) = policy.resolve()?;
            let epochs = common.epochs.unwrap_or(cfg.eval_epochs);
            let m = rollout(
                params.as_ref(),
                &cfg.env(),
                &cfg.network,
                epochs,
                policy,
                cfg.seed,
                |_, _| {},
            )?;
            println!("throughput   {:.6}", m.throughput);
            println!("mean reward  {:.6}", m.mean_reward);
            let probs: Vec<String> = m
                .action_histogram
                .iter()
                .map(|p| format!("{p:.4}"))
                .collect();
            println!("actions      {}", probs.join(" "));
        }
        Command::Export {
            common,
            policy,
            out,
        } => {
            let cfg = common.config()?;
            let (params, policy) = policy.resolve()?;
            let epochs = common.epochs.unwrap_or(cfg.eval_epochs);
            let mut last: Option<WaterfallState> = None;
            rollout(
                params.as_ref(),
                &cfg.env(),
                &cfg.network,
                epochs,
                policy,
                cfg.seed,
                |e, s| {
                    if e == epochs {
                        last = Some(s.clone());
                    }
                },
            )?;
            export_waterfall_pgm(&last.expect("final epoch observed"), &out)?;
            println!("{}", out.display());
        }
        Command::Compare { runs } => print!("{}", compare_runs(&runs)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("antijam: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
