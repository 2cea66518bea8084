use super::waveform::{mw_to_dbm, Emission};
use super::{Action, RewardConfig};
use crate::error::{Error, Result};

/// Received SINR in dB for the `user` emission against `interferers`.
/// Interference is the interferers' power inside the user's occupied band.
pub fn compute_sinr(user: &Emission, interferers: &[Emission], reward: &RewardConfig) -> f64 {
    let (lo, hi) = user.occupied();
    let interference: f64 = interferers
        .iter()
        .map(|j| j.waveform.power_in(j.center_mhz, lo, hi))
        .sum();
    mw_to_dbm(user.waveform.power_mw()) - mw_to_dbm(reward.noise_mw() + interference)
}

/// Fraction of slots whose SINR reaches the demodulation threshold.
pub fn success_fraction(slot_sinr_db: &[f64], reward: &RewardConfig) -> f64 {
    if slot_sinr_db.is_empty() {
        return 0.0;
    }
    let ok = slot_sinr_db
        .iter()
        .filter(|&&s| s >= reward.sinr_threshold_db)
        .count();
    ok as f64 / slot_sinr_db.len() as f64
}

/// Epoch reward: the success fraction times the rate, minus the switching
/// cost `lambda * R` whenever the channel changed. The threshold test is
/// applied per slot, so a fully jammed epoch yields zero before the cost.
pub fn epoch_reward(
    action: Action,
    prev_action: Action,
    slot_sinr_db: &[f64],
    epoch_slots: usize,
    reward: &RewardConfig,
) -> Result<f64> {
    if slot_sinr_db.len() != epoch_slots {
        return Err(Error::Shape(format!(
            "expected {epoch_slots} slot SINR values, got {}",
            slot_sinr_db.len()
        )));
    }
    let switched = if action != prev_action { 1.0 } else { 0.0 };
    let s = success_fraction(slot_sinr_db, reward);
    Ok(s * reward.rate - reward.switch_cost * reward.rate * switched)
}
