//! The jammed radio environment: spectrum rendering, the waterfall state,
//! link quality and rewards.

mod env;
mod link;
mod waterfall;
mod waveform;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use env::{EnvConfig, SpectrumEnv, StepOutcome, UserConfig};
pub use link::{compute_sinr, epoch_reward, success_fraction};
pub use waterfall::{render_row, SpectrumRow, WaterfallState};
pub use waveform::{band_power, dbm_to_mw, mw_to_dbm, raised_cosine_psd, Emission, WaveformSpec};

/// Sensed band geometry and time structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandConfig {
    pub lo_mhz: f64,
    pub hi_mhz: f64,
    pub bin_width_mhz: f64,
    /// Duration of one sensing slot (one waterfall row).
    pub slot_ms: f64,
    /// Rows of history kept in the waterfall.
    pub rows: usize,
    pub bins: usize,
    /// Slots per decision epoch, i.e. how long an action is held.
    pub epoch_slots: usize,
}

impl Default for BandConfig {
    fn default() -> Self {
        Self {
            lo_mhz: 0.0,
            hi_mhz: 20.0,
            bin_width_mhz: 0.1,
            slot_ms: 1.0,
            rows: 200,
            bins: 200,
            epoch_slots: 10,
        }
    }
}

impl BandConfig {
    pub fn span_mhz(&self) -> f64 {
        self.hi_mhz - self.lo_mhz
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo_mhz.is_finite() && self.hi_mhz.is_finite() && self.hi_mhz > self.lo_mhz) {
            return Err(Error::config("band.hi_mhz", "band must satisfy lo < hi"));
        }
        if !(self.bin_width_mhz.is_finite() && self.bin_width_mhz > 0.0) {
            return Err(Error::config("band.bin_width_mhz", "must be positive"));
        }
        let expected = self.span_mhz() / self.bin_width_mhz;
        if self.bins == 0 || (expected - self.bins as f64).abs() > 1e-6 {
            return Err(Error::config(
                "band.bins",
                format!(
                    "{} bins of {} MHz do not tile [{}, {}] MHz (need {expected})",
                    self.bins, self.bin_width_mhz, self.lo_mhz, self.hi_mhz
                ),
            ));
        }
        if self.rows == 0 {
            return Err(Error::config("band.rows", "must be at least 1"));
        }
        if !(self.slot_ms.is_finite() && self.slot_ms > 0.0) {
            return Err(Error::config("band.slot_ms", "must be positive"));
        }
        if self.epoch_slots == 0 {
            return Err(Error::config("band.epoch_slots", "must be at least 1"));
        }
        Ok(())
    }

    /// Frequency edges `[lo, hi)` of bin `n`.
    pub fn bin_edges(&self, n: usize) -> (f64, f64) {
        let lo = self.lo_mhz + n as f64 * self.bin_width_mhz;
        (lo, lo + self.bin_width_mhz)
    }

    pub fn slot_time_ms(&self, slot: u64) -> f64 {
        slot as f64 * self.slot_ms
    }
}

/// Index of a user channel (center frequency choice).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action(pub usize);

impl Action {
    pub fn index(self) -> usize {
        self.0
    }
}

/// The user's discrete channel grid: `count` centers starting at
/// `first_center_mhz`, spaced by `step_mhz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionSpace {
    pub first_center_mhz: f64,
    pub step_mhz: f64,
    pub count: usize,
}

impl ActionSpace {
    /// Every center whose occupied band fits inside the sensed band.
    pub fn for_band(band: &BandConfig, user_bandwidth_mhz: f64, step_mhz: f64) -> Result<Self> {
        if !(step_mhz.is_finite() && step_mhz > 0.0) {
            return Err(Error::config("user.channel_step_mhz", "must be positive"));
        }
        let room = band.span_mhz() - user_bandwidth_mhz;
        if room < -1e-9 {
            return Err(Error::config(
                "user.bandwidth_mhz",
                "user signal is wider than the sensed band",
            ));
        }
        let count = (room / step_mhz + 1e-9).floor() as usize + 1;
        Ok(Self {
            first_center_mhz: band.lo_mhz + user_bandwidth_mhz / 2.0,
            step_mhz,
            count,
        })
    }

    pub fn center_mhz(&self, action: Action) -> f64 {
        self.first_center_mhz + self.step_mhz * action.0 as f64
    }

    pub fn contains(&self, action: Action) -> bool {
        action.0 < self.count
    }

    pub fn iter(&self) -> impl Iterator<Item = Action> {
        (0..self.count).map(Action)
    }
}

/// Parameters of the per-epoch reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    /// Normalized bit rate R(a); identical for every channel.
    pub rate: f64,
    /// Switching cost as a fraction of `rate`.
    pub switch_cost: f64,
    pub sinr_threshold_db: f64,
    /// Total noise power inside one user-bandwidth, in dBm.
    pub noise_power_dbm: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            rate: 1.0,
            switch_cost: 0.2,
            sinr_threshold_db: 10.0,
            noise_power_dbm: -100.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::config("reward.rate", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.switch_cost) {
            return Err(Error::config("reward.switch_cost", "must lie in [0, 1)"));
        }
        if !self.sinr_threshold_db.is_finite() {
            return Err(Error::config("reward.sinr_threshold_db", "must be finite"));
        }
        if !self.noise_power_dbm.is_finite() {
            return Err(Error::config("reward.noise_power_dbm", "must be finite"));
        }
        Ok(())
    }

    pub fn noise_mw(&self) -> f64 {
        dbm_to_mw(self.noise_power_dbm)
    }
}
