use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::{read_metrics_csv, write_metrics_csv, MetricsRow};
use super::pgm::export_waterfall_pgm;
use crate::darla::{entropy, evaluate, histogram, train, EvalMetrics, Policy};
use crate::error::{Error, Result};
use crate::jammer::JammerKind;
use crate::spectrum::{Action, WaterfallState};

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";

pub fn waterfall_file(epoch: usize) -> String {
    format!("waterfall_{epoch:06}.pgm")
}

/// Headline numbers of one run, stored as `summary.txt` (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub jammer: JammerKind,
    pub epochs: usize,
    /// Length of the trailing training window and of each evaluation.
    pub window: usize,
    /// Mean throughput over the last `window` training epochs.
    pub train_throughput: f64,
    pub train_mean_reward: f64,
    /// Action distribution over the last `window` training epochs.
    pub action_probs: Vec<f64>,
    pub max_action_prob: f64,
    /// Entropy (nats) of `action_probs`.
    pub action_entropy: f64,
    pub greedy_throughput: f64,
    pub greedy_reward: f64,
    pub random_throughput: f64,
    pub random_reward: f64,
    pub best_fixed_action: usize,
    pub best_fixed_throughput: f64,
    pub best_fixed_reward: f64,
}

impl RunSummary {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("summary fields are plain numbers")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::format("run summary", e.message().to_string()))
    }
}

/// Seed of the evaluation environments, distinct from the training one.
fn eval_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Trains, evaluates the greedy policy against the random and best fixed
/// channel baselines, and writes six files into `cfg.out_dir`: metrics,
/// summary, checkpoint and waterfall snapshots at epochs 0, T/2 and T.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let env = cfg.env();
    let t = cfg.training.epochs;
    let marks = [0, t / 2, t];
    let mut snapshots: Vec<(usize, WaterfallState)> = Vec::new();
    let report = train(
        &env,
        &cfg.network,
        &cfg.training,
        cfg.seed,
        |epoch, state| {
            if marks.contains(&epoch) {
                snapshots.push((epoch, state.clone()));
            }
        },
    )?;

    let rows: Vec<MetricsRow> = report.records.iter().map(MetricsRow::from).collect();
    write_metrics_csv(&rows, dir.join(METRICS_FILE))?;
    report.params.save(dir.join(CHECKPOINT_FILE))?;
    for (epoch, state) in &snapshots {
        export_waterfall_pgm(state, dir.join(waterfall_file(*epoch)))?;
    }

    let actions = env.action_space()?.count;
    let seed = eval_seed(cfg.seed);
    let run = |policy| {
        evaluate(
            Some(&report.params),
            &env,
            &cfg.network,
            cfg.eval_epochs,
            policy,
            seed,
        )
    };
    let greedy = run(Policy::Greedy)?;
    let random = run(Policy::Random)?;
    let mut best: Option<(usize, EvalMetrics)> = None;
    for a in 0..actions {
        let m = run(Policy::Fixed(Action(a)))?;
        if best
            .as_ref()
            .is_none_or(|(_, b)| m.throughput > b.throughput)
        {
            best = Some((a, m));
        }
    }
    let (best_fixed_action, best_fixed) = best.expect("at least one action");

    let window = cfg.eval_epochs;
    let tail = &report.records[report.records.len().saturating_sub(window)..];
    let n = tail.len().max(1) as f64;
    let action_probs = histogram(tail.iter().map(|r| r.action), actions);
    let summary = RunSummary {
        seed: cfg.seed,
        jammer: cfg.jammer.kind,
        epochs: t,
        window,
        train_throughput: tail.iter().map(|r| r.throughput).sum::<f64>() / n,
        train_mean_reward: tail.iter().map(|r| r.reward).sum::<f64>() / n,
        max_action_prob: action_probs.iter().cloned().fold(0.0, f64::max),
        action_entropy: entropy(&action_probs),
        action_probs,
        greedy_throughput: greedy.throughput,
        greedy_reward: greedy.mean_reward,
        random_throughput: random.throughput,
        random_reward: random.mean_reward,
        best_fixed_action,
        best_fixed_throughput: best_fixed.throughput,
        best_fixed_reward: best_fixed.mean_reward,
    };
    let path = dir.join(SUMMARY_FILE);
    std::fs::write(&path, summary.to_text()).map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}

/// Pass/fail of one run against the threshold for its jammer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// No threshold applies, or the summary is missing.
    NotApplicable,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "-",
        })
    }
}

/// One row of [`compare_runs`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub dir: PathBuf,
    pub jammer: Option<JammerKind>,
    /// Last trailing-average throughput in the metrics file.
    pub final_throughput: f64,
    /// Mean reward over the final (up to) 2000 metrics rows.
    pub mean_reward: f64,
    pub max_action_prob: f64,
    pub action_entropy: f64,
    pub verdict: Verdict,
}

const TAIL_ROWS: usize = 2000;

fn verdict(s: &RunSummary, max_p: f64, h: f64) -> Verdict {
    let ok = match s.jammer {
        JammerKind::Comb => s.train_throughput >= 0.90,
        JammerKind::Sweep => {
            s.greedy_throughput >= 0.75 && s.greedy_throughput >= 1.5 * s.random_throughput
        }
        JammerKind::Random => s.greedy_throughput >= s.random_throughput + 0.15,
        JammerKind::Intelligent => {
            max_p <= 0.25
                && h >= 0.90 * (s.action_probs.len() as f64).ln()
                && s.greedy_throughput >= s.random_throughput
        }
        JammerKind::None => return Verdict::NotApplicable,
    };
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

pub fn summarize_run(dir: impl AsRef<Path>) -> Result<RunRow> {
    let dir = dir.as_ref();
    let rows = read_metrics_csv(dir.join(METRICS_FILE))?;
    let summary = match std::fs::read_to_string(dir.join(SUMMARY_FILE)) {
        Ok(text) => Some(RunSummary::from_text(&text)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(Error::io(dir.join(SUMMARY_FILE), e)),
    };
    let tail = &rows[rows.len().saturating_sub(TAIL_ROWS)..];
    let actions = summary
        .as_ref()
        .map(|s| s.action_probs.len())
        .unwrap_or(0)
        .max(tail.iter().map(|r| r.action + 1).max().unwrap_or(0));
    let probs = histogram(tail.iter().map(|r| r.action), actions);
    let max_p = probs.iter().cloned().fold(0.0, f64::max);
    let h = entropy(&probs);
    Ok(RunRow {
        dir: dir.to_path_buf(),
        jammer: summary.as_ref().map(|s| s.jammer),
        final_throughput: rows.last().map_or(0.0, |r| r.throughput_ma),
        mean_reward: tail.iter().map(|r| r.reward).sum::<f64>() / tail.len().max(1) as f64,
        max_action_prob: max_p,
        action_entropy: h,
        verdict: summary
            .as_ref()
            .map_or(Verdict::NotApplicable, |s| verdict(s, max_p, h)),
    })
}

/// Tabulates completed run directories.
pub fn compare_runs<P: AsRef<Path>>(dirs: &[P]) -> Result<String> {
    if dirs.is_empty() {
        return Err(Error::Usage(
            "compare needs at least one run directory".into(),
        ));
    }
    let rows = dirs.iter().map(summarize_run).collect::<Result<Vec<_>>>()?;
    let mut out = format!(
        "{:<32} {:<12} {:>9} {:>9} {:>7} {:>7} {:>7}\n",
        "run", "jammer", "final_tp", "reward", "max_p", "H", "verdict"
    );
    for r in rows {
        let jammer = r.jammer.map_or("?".to_string(), |k| k.to_string());
        let _ = writeln!(
            out,
            "{:<32} {:<12} {:>9.4} {:>9.4} {:>7.3} {:>7.3} {:>7}",
            r.dir.display(),
            jammer,
            r.final_throughput,
            r.mean_reward,
            r.max_action_prob,
            r.action_entropy,
            r.verdict
        );
    }
    Ok(out)
}
