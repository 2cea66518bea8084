//! Epsilon-greedy interaction, experience replay and the Q-learning loop.

mod policy;
mod replay;

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qnet::{preprocess, NetworkConfig, QNetworkParams, Sample, StateTensor};
use crate::spectrum::{Action, EnvConfig, SpectrumEnv, WaterfallState};

pub use policy::{argmax, select_action, EpsilonSchedule};
pub use replay::ReplayBuffer;

/// One stored experience `(S, a, r, S')`.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Arc<StateTensor>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Arc<StateTensor>,
}

/// Learning hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainHyper {
    /// Number of decision epochs to train for.
    pub epochs: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Updates start once the buffer holds more than this many transitions.
    pub min_replay: usize,
    pub epsilon_delta: f64,
    /// Trailing window (epochs) of the reported moving-average throughput.
    pub throughput_window: usize,
}

impl Default for TrainHyper {
    fn default() -> Self {
        Self {
            epochs: 20_000,
            gamma: 0.9,
            learning_rate: 1e-3,
            batch_size: 32,
            buffer_capacity: 10_000,
            min_replay: 500,
            epsilon_delta: 0.00045,
            throughput_window: 500,
        }
    }
}

impl TrainHyper {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::config("training.gamma", "must lie in [0, 1)"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::config(
                "training.learning_rate",
                "must be finite and >= 0",
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::config("training.batch_size", "must be at least 1"));
        }
        if self.buffer_capacity == 0 {
            return Err(Error::config(
                "training.buffer_capacity",
                "must be at least 1",
            ));
        }
        if self.min_replay > self.buffer_capacity {
            return Err(Error::config(
                "training.min_replay",
                "must not exceed training.buffer_capacity",
            ));
        }
        if !(self.epsilon_delta.is_finite() && self.epsilon_delta >= 0.0) {
            return Err(Error::config(
                "training.epsilon_delta",
                "must be finite and >= 0",
            ));
        }
        if self.throughput_window == 0 {
            return Err(Error::config(
                "training.throughput_window",
                "must be at least 1",
            ));
        }
        Ok(())
    }
}

/// TD targets `y = r + gamma * max_a' Q(S', a')` under `params`. The task
/// is continuing, so no transition is terminal.
pub fn td_target(batch: &[&Transition], params: &QNetworkParams, gamma: f64) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|t| {
            let q = params.forward(&t.next_state)?;
            Ok(t.reward + gamma * q[argmax(&q)])
        })
        .collect()
}

/// What happened in one training epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Exploration rate used to pick this epoch's action.
    pub epsilon: f64,
    pub action: usize,
    pub reward: f64,
    /// Fraction of successful slots in this epoch.
    pub throughput: f64,
    /// Trailing mean of `throughput`.
    pub throughput_ma: f64,
    /// Minibatch loss, if an update ran this epoch.
    pub loss: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub records: Vec<EpochRecord>,
    pub params: QNetworkParams,
}

impl TrainingReport {
    /// Mean per-epoch throughput over the last `n` epochs.
    pub fn final_throughput(&self, n: usize) -> f64 {
        let tail = &self.records[self.records.len().saturating_sub(n)..];
        tail.iter().map(|r| r.throughput).sum::<f64>() / tail.len().max(1) as f64
    }

    /// Empirical action distribution over the last `n` epochs.
    pub fn action_histogram(&self, n: usize, actions: usize) -> Vec<f64> {
        let tail = &self.records[self.records.len().saturating_sub(n)..];
        histogram(tail.iter().map(|r| r.action), actions)
    }
}

pub(crate) fn histogram(actions: impl Iterator<Item = usize>, count: usize) -> Vec<f64> {
    let mut h = vec![0.0; count];
    let mut n = 0usize;
    for a in actions {
        h[a] += 1.0;
        n += 1;
    }
    if n > 0 {
        h.iter_mut().for_each(|v| *v /= n as f64);
    }
    h
}

/// Shannon entropy (nats) of a probability vector.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

struct Seeds {
    params: u64,
    env: u64,
    agent: u64,
}

impl Seeds {
    fn derive(seed: u64) -> Self {
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        Self {
            params: master.random(),
            env: master.random(),
            agent: master.random(),
        }
    }
}

/// Runs the learning loop for `hyper.epochs` decision epochs: sense, act
/// epsilon-greedily, step the environment, store the transition and, once
/// the buffer is ready, take one gradient step on a replayed minibatch.
///
/// `observe` sees the waterfall after reset (epoch 0) and after every epoch.
pub fn train<F>(
    env_cfg: &EnvConfig,
    net_cfg: &NetworkConfig,
    hyper: &TrainHyper,
    seed: u64,
    mut observe: F,
) -> Result<TrainingReport>
where
    F: FnMut(usize, &WaterfallState),
{
    hyper.validate()?;
    let mut env = SpectrumEnv::new(env_cfg.clone())?;
    let actions = env.action_space().count;
    let arch = net_cfg.architecture(env_cfg.band.rows, env_cfg.band.bins, actions)?;
    let seeds = Seeds::derive(seed);
    let mut params = QNetworkParams::init(arch, seeds.params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seeds.agent);
    let mut buffer: ReplayBuffer<Transition> = ReplayBuffer::new(hyper.buffer_capacity);
    let mut schedule = EpsilonSchedule::new(hyper.epsilon_delta);
    let mut window: VecDeque<f64> = VecDeque::with_capacity(hyper.throughput_window);
    let mut window_sum = 0.0;
    let mut records = Vec::with_capacity(hyper.epochs);

    let initial = env.reset(seeds.env);
    observe(0, initial);
    let mut state = Arc::new(preprocess(initial, net_cfg.decimation)?);

    for epoch in 1..=hyper.epochs {
        let epsilon = schedule.epsilon;
        let q = params.forward(&state)?;
        let action = select_action(&q, epsilon, &mut rng);
        let outcome = env.step(action)?;
        observe(epoch, &outcome.next_state);
        let next = Arc::new(preprocess(&outcome.next_state, net_cfg.decimation)?);
        buffer.push(Transition {
            state: Arc::clone(&state),
            action: action.0,
            reward: outcome.reward,
            next_state: Arc::clone(&next),
        });

        let loss = match buffer.sample(hyper.batch_size, hyper.min_replay, &mut rng) {
            Some(batch) => {
                let targets = td_target(&batch, &params, hyper.gamma)?;
                let samples: Vec<Sample> = batch
                    .iter()
                    .zip(&targets)
                    .map(|(t, &y)| Sample {
                        state: &t.state,
                        action: t.action,
                        target: y,
                    })
                    .collect();
                let (loss, grad) = params.backward(&samples)?;
                params.sgd_step(&grad, hyper.learning_rate)?;
                Some(loss)
            }
            None => None,
        };
        schedule.update();

        let throughput = outcome.throughput();
        if window.len() == hyper.throughput_window {
            window_sum -= window.pop_front().unwrap_or(0.0);
        }
        window.push_back(throughput);
        window_sum += throughput;
        records.push(EpochRecord {
            epoch,
            epsilon,
            action: action.0,
            reward: outcome.reward,
            throughput,
            throughput_ma: window_sum / window.len() as f64,
            loss,
        });
        state = next;
    }
    Ok(TrainingReport { records, params })
}

/// Policy used by [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Argmax of the trained network (no exploration).
    Greedy,
    /// Uniformly random channel every epoch.
    Random,
    /// Always the same channel.
    Fixed(Action),
}

impl std::str::FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Policy::Greedy),
            "random" => Ok(Policy::Random),
            _ => s
                .strip_prefix("fixed:")
                .and_then(|n| n.parse().ok())
                .map(|n| Policy::Fixed(Action(n)))
                .ok_or_else(|| {
                    Error::Usage(format!("unknown policy `{s}` (greedy, random, fixed:<n>)"))
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalMetrics {
    /// Mean fraction of successful slots.
    pub throughput: f64,
    pub mean_reward: f64,
    /// Fraction of epochs spent on each channel.
    pub action_histogram: Vec<f64>,
}

/// Runs `policy` for `epochs` decision epochs in a freshly reset
/// environment. `Greedy` needs trained parameters.
pub fn evaluate(
    params: Option<&QNetworkParams>,
    env_cfg: &EnvConfig,
    net_cfg: &NetworkConfig,
    epochs: usize,
    policy: Policy,
    seed: u64,
) -> Result<EvalMetrics> {
    rollout(params, env_cfg, net_cfg, epochs, policy, seed, |_, _| {})
}

/// [`evaluate`], additionally showing `observe` the waterfall after reset
/// (epoch 0) and after every epoch.
pub fn rollout<F>(
    params: Option<&QNetworkParams>,
    env_cfg: &EnvConfig,
    net_cfg: &NetworkConfig,
    epochs: usize,
    policy: Policy,
    seed: u64,
    mut observe: F,
) -> Result<EvalMetrics>
where
    F: FnMut(usize, &WaterfallState),
{
    let mut env = SpectrumEnv::new(env_cfg.clone())?;
    let actions = env.action_space().count;
    if policy == Policy::Greedy && params.is_none() {
        return Err(Error::Usage("greedy evaluation needs a checkpoint".into()));
    }
    if let Policy::Fixed(a) = policy {
        if a.0 >= actions {
            return Err(Error::Usage(format!(
                "fixed action {} outside [0, {actions})",
                a.0
            )));
        }
    }
    let seeds = Seeds::derive(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seeds.agent);
    let mut state = env.reset(seeds.env).clone();
    observe(0, &state);
    let (mut throughput, mut reward) = (0.0, 0.0);
    let mut chosen = Vec::with_capacity(epochs);
    for epoch in 1..=epochs {
        let action = match (policy, params) {
            (Policy::Greedy, Some(p)) => {
                let q = p.forward(&preprocess(&state, net_cfg.decimation)?)?;
                Action(argmax(&q))
            }
            (Policy::Fixed(a), _) => a,
            _ => Action(rng.random_range(0..actions)),
        };
        let out = env.step(action)?;
        observe(epoch, &out.next_state);
        throughput += out.throughput();
        reward += out.reward;
        chosen.push(action.0);
        state = out.next_state;
    }
    let n = epochs.max(1) as f64;
    Ok(EvalMetrics {
        throughput: throughput / n,
        mean_reward: reward / n,
        action_histogram: histogram(chosen.into_iter(), actions),
    })
}
