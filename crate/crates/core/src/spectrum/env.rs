use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::link::{compute_sinr, epoch_reward};
use super::waterfall::{render_row, WaterfallState};
use super::waveform::{mw_to_dbm, Emission, WaveformSpec};
use super::{Action, ActionSpace, BandConfig, RewardConfig};
use crate::error::{Error, Result};
use crate::jammer::{Jammer, JammerConfig};

/// The user's transmitter: waveform plus the spacing of its channel grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UserConfig {
    pub bandwidth_mhz: f64,
    pub rolloff: f64,
    pub power_dbm: f64,
    pub channel_step_mhz: f64,
}

impl Default for UserConfig {
    fn default() -> Self {
        Self {
            bandwidth_mhz: 4.0,
            rolloff: 0.3,
            power_dbm: 0.0,
            channel_step_mhz: 2.0,
        }
    }
}

impl UserConfig {
    pub fn waveform(&self) -> Result<WaveformSpec> {
        WaveformSpec::new(self.bandwidth_mhz, self.rolloff, self.power_dbm).map_err(|e| match e {
            Error::Config { key, message } => Error::config(format!("user.{key}"), message),
            other => other,
        })
    }
}

/// Everything needed to instantiate a [`SpectrumEnv`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnvConfig {
    pub band: BandConfig,
    pub user: UserConfig,
    pub reward: RewardConfig,
    pub jammers: Vec<JammerConfig>,
}

impl EnvConfig {
    pub fn with_jammer(jammer: JammerConfig) -> Self {
        Self {
            jammers: vec![jammer],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.band.validate()?;
        self.reward.validate()?;
        self.user.waveform()?;
        self.action_space()?;
        for j in &self.jammers {
            j.validate()?;
        }
        Ok(())
    }

    pub fn action_space(&self) -> Result<ActionSpace> {
        ActionSpace::for_band(
            &self.band,
            self.user.bandwidth_mhz,
            self.user.channel_step_mhz,
        )
    }

    /// Flat noise density (mW/MHz) giving `noise_power_dbm` over one user band.
    pub fn noise_density(&self) -> f64 {
        self.reward.noise_mw() / self.user.bandwidth_mhz
    }
}

/// Result of holding one action for a decision epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: WaterfallState,
    pub reward: f64,
    pub slot_success: Vec<bool>,
    pub slot_sinr_db: Vec<f64>,
    pub switched: bool,
}

impl StepOutcome {
    /// Fraction of slots in the epoch that were received successfully.
    pub fn throughput(&self) -> f64 {
        let ok = self.slot_success.iter().filter(|&&s| s).count();
        ok as f64 / self.slot_success.len().max(1) as f64
    }
}

/// Single-user spectrum environment driven one decision epoch at a time.
#[derive(Debug, Clone)]
pub struct SpectrumEnv {
    cfg: EnvConfig,
    actions: ActionSpace,
    user: WaveformSpec,
    jammers: Vec<Jammer>,
    rng: ChaCha8Rng,
    clock: u64,
    state: Option<WaterfallState>,
    prev_action: Option<Action>,
}

impl SpectrumEnv {
    pub fn new(cfg: EnvConfig) -> Result<Self> {
        cfg.validate()?;
        let actions = cfg.action_space()?;
        let user = cfg.user.waveform()?;
        let mut jammers = Vec::new();
        for j in &cfg.jammers {
            jammers.extend(j.build(&actions)?);
        }
        Ok(Self {
            cfg,
            actions,
            user,
            jammers,
            rng: ChaCha8Rng::seed_from_u64(0),
            clock: 0,
            state: None,
            prev_action: None,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn action_space(&self) -> ActionSpace {
        self.actions
    }

    pub fn jammers(&self) -> &[Jammer] {
        &self.jammers
    }

    /// Current slot index.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn state(&self) -> Option<&WaterfallState> {
        self.state.as_ref()
    }

    pub fn user_emission(&self, action: Action) -> Emission {
        Emission::new(self.actions.center_mhz(action), self.user)
    }

    fn jammer_emissions(&mut self, slot: u64) -> Vec<Emission> {
        let band = &self.cfg.band;
        let rng = &mut self.rng;
        self.jammers
            .iter_mut()
            .flat_map(|j| j.emissions(slot, band, rng))
            .collect()
    }

    /// Restarts the world: clock at zero, jammers re-initialized, and the
    /// waterfall filled by sensing `rows` slots with the user silent.
    pub fn reset(&mut self, seed: u64) -> &WaterfallState {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.clock = 0;
        self.prev_action = None;
        self.jammers.iter_mut().for_each(Jammer::reset);
        let band = self.cfg.band.clone();
        let density = self.cfg.noise_density();
        let floor = mw_to_dbm(density * band.bin_width_mhz);
        let mut state = WaterfallState::new(band.rows, band.bins, floor);
        for _ in 0..band.rows {
            let emissions = self.jammer_emissions(self.clock);
            let row = render_row(&emissions, &band, density, self.clock);
            state.push_row(row).expect("row width matches band");
            self.clock += 1;
        }
        self.state.insert(state)
    }

    /// Holds `action` for one epoch, sensing and scoring every slot.
    pub fn step(&mut self, action: Action) -> Result<StepOutcome> {
        if self.state.is_none() {
            return Err(Error::State("step called before reset".into()));
        }
        if !self.actions.contains(action) {
            return Err(Error::Usage(format!(
                "action {} outside [0, {})",
                action.0, self.actions.count
            )));
        }
        let band = self.cfg.band.clone();
        let density = self.cfg.noise_density();
        let user = self.user_emission(action);
        let mut slot_sinr_db = Vec::with_capacity(band.epoch_slots);
        for _ in 0..band.epoch_slots {
            let mut emissions = self.jammer_emissions(self.clock);
            slot_sinr_db.push(compute_sinr(&user, &emissions, &self.cfg.reward));
            emissions.push(user);
            let row = render_row(&emissions, &band, density, self.clock);
            if let Some(state) = self.state.as_mut() {
                state.push_row(row)?;
            }
            self.clock += 1;
        }
        let prev = self.prev_action.unwrap_or(action);
        let reward = epoch_reward(
            action,
            prev,
            &slot_sinr_db,
            band.epoch_slots,
            &self.cfg.reward,
        )?;
        for j in &mut self.jammers {
            j.observe(action);
        }
        self.prev_action = Some(action);
        let threshold = self.cfg.reward.sinr_threshold_db;
        Ok(StepOutcome {
            next_state: self.state.clone().expect("state set above"),
            reward,
            slot_success: slot_sinr_db.iter().map(|&s| s >= threshold).collect(),
            slot_sinr_db,
            switched: prev != action,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jammer::JammerKind;
    use crate::spectrum::success_fraction;

    fn env(kind: JammerKind) -> SpectrumEnv {
        SpectrumEnv::new(EnvConfig::with_jammer(JammerConfig::of_kind(kind))).unwrap()
    }

    fn quiet() -> SpectrumEnv {
        SpectrumEnv::new(EnvConfig::default()).unwrap()
    }

    #[test]
    fn step_before_reset_fails() {
        let mut e = quiet();
        assert!(matches!(e.step(Action(0)), Err(Error::State(_))));
    }

    #[test]
    fn reset_is_deterministic() {
        let mut a = env(JammerKind::Random);
        let mut b = env(JammerKind::Random);
        assert_eq!(a.reset(9), b.reset(9));
        assert_eq!(a.clock(), 200);
    }

    #[test]
    fn quiet_reset_is_flat_noise() {
        let mut e = quiet();
        let floor = mw_to_dbm(e.config().noise_density() * 0.1);
        let s = e.reset(0).clone();
        assert!(s
            .rows()
            .all(|r| r.values.iter().all(|&v| (v - floor).abs() < 1e-12)));
    }

    #[test]
    fn comb_reset_shows_three_static_bands() {
        let mut e = env(JammerKind::Comb);
        let floor = mw_to_dbm(e.config().noise_density() * 0.1);
        let s = e.reset(0).clone();
        let first = s.row(0).values.clone();
        assert!(s.rows().all(|r| r.values == first));
        let band = BandConfig::default();
        for (n, &v) in first.iter().enumerate() {
            let (lo, hi) = band.bin_edges(n);
            let mid = (lo + hi) / 2.0;
            let jammed = [2.0, 10.0, 18.0]
                .iter()
                .any(|c: &f64| (mid - c).abs() < 2.0);
            if jammed {
                assert!(v > floor + 30.0, "bin {n} should be jammed: {v}");
            } else {
                assert!((v - floor).abs() < 1e-9, "bin {n} should be quiet");
            }
        }
    }

    #[test]
    fn user_emission_is_rendered_into_state() {
        let mut e = quiet();
        e.reset(0);
        let out = e.step(Action(4)).unwrap();
        // Bin around 10 MHz carries the user's 0 dBm signal.
        assert!(out.next_state.value(0, 100) > -20.0);
        assert!(out.next_state.value(9, 100) > -20.0);
        assert!(out.next_state.value(10, 100) < -100.0);
        assert_eq!(out.reward, 1.0);
    }

    #[test]
    fn sweep_far_from_user_gives_full_reward() {
        // In the first epoch after reset (slots 200..209) the sweep covers
        // centers 2..11 MHz, never within 4 MHz of an 18 MHz user.
        let mut e = env(JammerKind::Sweep);
        e.reset(0);
        let out = e.step(Action(8)).unwrap();
        assert_eq!(out.reward, 1.0);
        assert!(out.slot_success.iter().all(|&s| s));
    }

    #[test]
    fn repeated_action_is_not_charged() {
        let mut e = quiet();
        e.reset(0);
        e.step(Action(2)).unwrap();
        let second = e.step(Action(2)).unwrap();
        assert!(!second.switched);
        assert_eq!(second.reward, 1.0);
        let third = e.step(Action(5)).unwrap();
        assert!(third.switched);
        assert!((third.reward - 0.8).abs() < 1e-12);
    }

    #[test]
    fn user_on_intelligent_target_is_jammed() {
        let mut e = env(JammerKind::Intelligent);
        e.reset(0);
        e.step(Action(6)).unwrap();
        // The jammer now targets the only observed channel.
        let out = e.step(Action(6)).unwrap();
        assert_eq!(out.reward, 0.0);
        assert!(out.slot_sinr_db.iter().all(|&s| (s + 30.0).abs() < 0.1));
    }

    #[test]
    fn outcome_reward_matches_recomputation() {
        let mut e = env(JammerKind::Sweep);
        e.reset(1);
        let reward_cfg = e.config().reward.clone();
        let mut prev = None;
        for i in 0..30 {
            let a = Action((i * 7) % 9);
            let out = e.step(a).unwrap();
            let s = success_fraction(&out.slot_sinr_db, &reward_cfg);
            let delta = if prev.is_some_and(|p| p != a) {
                0.2
            } else {
                0.0
            };
            assert!((out.reward - (s - delta)).abs() < 1e-12);
            prev = Some(a);
        }
    }

    #[test]
    fn trajectories_are_bit_identical() {
        let run = || {
            let mut e = env(JammerKind::Random);
            e.reset(42);
            (0..50)
                .map(|i| e.step(Action(i % 9)).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_out_of_range_action() {
        let mut e = quiet();
        e.reset(0);
        assert!(matches!(e.step(Action(9)), Err(Error::Usage(_))));
    }
}
