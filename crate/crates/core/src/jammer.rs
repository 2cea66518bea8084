//! Jamming patterns as emission generators over absolute slot time.
//!
//! Jammers run on their own clock: the sweep position and the random dwell
//! boundaries depend only on the slot index, never on the user's decision
//! epochs. Only the intelligent jammer looks at the user, once per epoch.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{Action, ActionSpace, BandConfig, Emission, WaveformSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JammerKind {
    None,
    Sweep,
    Comb,
    Random,
    Intelligent,
}

impl std::str::FromStr for JammerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(JammerKind::None),
            "sweep" => Ok(JammerKind::Sweep),
            "comb" => Ok(JammerKind::Comb),
            "random" => Ok(JammerKind::Random),
            "intelligent" => Ok(JammerKind::Intelligent),
            other => Err(Error::config(
                "jammer.kind",
                format!("unknown jammer kind `{other}`"),
            )),
        }
    }
}

impl std::fmt::Display for JammerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            JammerKind::None => "none",
            JammerKind::Sweep => "sweep",
            JammerKind::Comb => "comb",
            JammerKind::Random => "random",
            JammerKind::Intelligent => "intelligent",
        };
        f.write_str(s)
    }
}

/// Jammer description as it appears in experiment configs. Only the
/// parameters of the selected `kind` are used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JammerConfig {
    pub kind: JammerKind,
    pub bandwidth_mhz: f64,
    pub rolloff: f64,
    pub power_dbm: f64,
    pub sweep_speed_mhz_per_ms: f64,
    pub sweep_start_mhz: f64,
    pub comb_centers_mhz: Vec<f64>,
    pub random_dwell_ms: f64,
    pub random_grid_mhz: Vec<f64>,
    /// Number of user epochs remembered by the intelligent jammer.
    pub intelligent_window: usize,
}

impl Default for JammerConfig {
    fn default() -> Self {
        Self {
            kind: JammerKind::Comb,
            bandwidth_mhz: 4.0,
            rolloff: 0.3,
            power_dbm: 30.0,
            sweep_speed_mhz_per_ms: 1.0,
            sweep_start_mhz: 2.0,
            comb_centers_mhz: vec![2.0, 10.0, 18.0],
            random_dwell_ms: 20.0,
            random_grid_mhz: vec![2.0, 6.0, 10.0, 14.0, 18.0],
            intelligent_window: 200,
        }
    }
}

impl JammerConfig {
    pub fn of_kind(kind: JammerKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn waveform(&self) -> Result<WaveformSpec> {
        WaveformSpec::new(self.bandwidth_mhz, self.rolloff, self.power_dbm).map_err(|e| match e {
            Error::Config { key, message } => Error::config(format!("jammer.{key}"), message),
            other => other,
        })
    }

    /// Checks every parameter, not just those of the selected kind, so a
    /// config stays valid when only `kind` is changed.
    pub fn validate(&self) -> Result<()> {
        self.waveform()?;
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !self.sweep_speed_mhz_per_ms.is_finite() {
            return Err(Error::config(
                "jammer.sweep_speed_mhz_per_ms",
                "must be finite",
            ));
        }
        if !self.sweep_start_mhz.is_finite() {
            return Err(Error::config("jammer.sweep_start_mhz", "must be finite"));
        }
        if self.comb_centers_mhz.is_empty() || !finite(&self.comb_centers_mhz) {
            return Err(Error::config(
                "jammer.comb_centers_mhz",
                "needs at least one finite center",
            ));
        }
        if !(self.random_dwell_ms.is_finite() && self.random_dwell_ms > 0.0) {
            return Err(Error::config("jammer.random_dwell_ms", "must be positive"));
        }
        if self.random_grid_mhz.is_empty() || !finite(&self.random_grid_mhz) {
            return Err(Error::config(
                "jammer.random_grid_mhz",
                "needs at least one finite center",
            ));
        }
        if self.intelligent_window == 0 {
            return Err(Error::config(
                "jammer.intelligent_window",
                "must be at least 1",
            ));
        }
        Ok(())
    }

    /// Builds the runtime jammer, or `None` for `kind = "none"`.
    pub fn build(&self, actions: &ActionSpace) -> Result<Option<Jammer>> {
        self.validate()?;
        let waveform = self.waveform()?;
        Ok(match self.kind {
            JammerKind::None => None,
            JammerKind::Sweep => Some(Jammer::Sweep(SweepJammer {
                waveform,
                speed_mhz_per_ms: self.sweep_speed_mhz_per_ms,
                start_mhz: self.sweep_start_mhz,
            })),
            JammerKind::Comb => Some(Jammer::Comb(CombJammer {
                waveform,
                centers_mhz: self.comb_centers_mhz.clone(),
            })),
            JammerKind::Random => Some(Jammer::Random(RandomJammer::new(
                waveform,
                self.random_dwell_ms,
                self.random_grid_mhz.clone(),
            ))),
            JammerKind::Intelligent => Some(Jammer::Intelligent(IntelligentJammer::new(
                waveform,
                *actions,
                self.intelligent_window,
            ))),
        })
    }
}

/// Linear sweep that wraps around the band.
#[derive(Debug, Clone)]
pub struct SweepJammer {
    pub waveform: WaveformSpec,
    pub speed_mhz_per_ms: f64,
    pub start_mhz: f64,
}

impl SweepJammer {
    pub fn center_at(&self, t_ms: f64, band: &BandConfig) -> f64 {
        let offset = self.start_mhz - band.lo_mhz + self.speed_mhz_per_ms * t_ms;
        band.lo_mhz + offset.rem_euclid(band.span_mhz())
    }

    pub fn emissions(&self, slot: u64, band: &BandConfig) -> Vec<Emission> {
        let center = self.center_at(band.slot_time_ms(slot), band);
        vec![Emission::new(center, self.waveform)]
    }
}

/// Fixed set of simultaneous tones.
#[derive(Debug, Clone)]
pub struct CombJammer {
    pub waveform: WaveformSpec,
    pub centers_mhz: Vec<f64>,
}

impl CombJammer {
    pub fn emissions(&self) -> Vec<Emission> {
        self.centers_mhz
            .iter()
            .map(|&c| Emission::new(c, self.waveform))
            .collect()
    }
}

/// Hops to a uniformly drawn grid center at every dwell boundary.
#[derive(Debug, Clone)]
pub struct RandomJammer {
    pub waveform: WaveformSpec,
    pub dwell_ms: f64,
    pub grid_mhz: Vec<f64>,
    current: Option<(u64, f64)>,
}

impl RandomJammer {
    pub fn new(waveform: WaveformSpec, dwell_ms: f64, grid_mhz: Vec<f64>) -> Self {
        Self {
            waveform,
            dwell_ms,
            grid_mhz,
            current: None,
        }
    }

    fn dwell_index(&self, t_ms: f64) -> u64 {
        (t_ms / self.dwell_ms + 1e-9).floor() as u64
    }

    /// Center for `slot`; draws from `rng` once per new dwell.
    pub fn center_at<R: Rng + ?Sized>(&mut self, slot: u64, band: &BandConfig, rng: &mut R) -> f64 {
        let dwell = self.dwell_index(band.slot_time_ms(slot));
        match self.current {
            Some((d, c)) if d == dwell => c,
            _ => {
                let c = self.grid_mhz[rng.random_range(0..self.grid_mhz.len())];
                self.current = Some((dwell, c));
                c
            }
        }
    }

    pub fn emissions<R: Rng + ?Sized>(
        &mut self,
        slot: u64,
        band: &BandConfig,
        rng: &mut R,
    ) -> Vec<Emission> {
        vec![Emission::new(
            self.center_at(slot, band, rng),
            self.waveform,
        )]
    }

    pub fn reset(&mut self) {
        self.current = None;
    }
}

/// Jams the channel the user has occupied most often over a sliding window
/// of observed epochs. Ties go to the lowest frequency; with no observations
/// it sits in the middle of the band.
#[derive(Debug, Clone)]
pub struct IntelligentJammer {
    pub waveform: WaveformSpec,
    actions: ActionSpace,
    window: usize,
    history: VecDeque<Action>,
    counts: Vec<usize>,
}

impl IntelligentJammer {
    pub fn new(waveform: WaveformSpec, actions: ActionSpace, window: usize) -> Self {
        Self {
            waveform,
            actions,
            window,
            history: VecDeque::with_capacity(window),
            counts: vec![0; actions.count],
        }
    }

    pub fn observe(&mut self, action: Action) {
        if !self.actions.contains(action) || self.window == 0 {
            return;
        }
        if self.history.len() == self.window {
            if let Some(old) = self.history.pop_front() {
                self.counts[old.0] -= 1;
            }
        }
        self.history.push_back(action);
        self.counts[action.0] += 1;
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn target(&self) -> Option<Action> {
        if self.history.is_empty() {
            return None;
        }
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        Some(Action(best))
    }

    pub fn center_mhz(&self, band: &BandConfig) -> f64 {
        match self.target() {
            Some(a) => self.actions.center_mhz(a),
            None => (band.lo_mhz + band.hi_mhz) / 2.0,
        }
    }

    pub fn emissions(&self, band: &BandConfig) -> Vec<Emission> {
        vec![Emission::new(self.center_mhz(band), self.waveform)]
    }

    pub fn reset(&mut self) {
        self.history.clear();
        self.counts.iter_mut().for_each(|c| *c = 0);
    }
}

#[derive(Debug, Clone)]
pub enum Jammer {
    Sweep(SweepJammer),
    Comb(CombJammer),
    Random(RandomJammer),
    Intelligent(IntelligentJammer),
}

impl Jammer {
    pub fn kind(&self) -> JammerKind {
        match self {
            Jammer::Sweep(_) => JammerKind::Sweep,
            Jammer::Comb(_) => JammerKind::Comb,
            Jammer::Random(_) => JammerKind::Random,
            Jammer::Intelligent(_) => JammerKind::Intelligent,
        }
    }

    pub fn emissions<R: Rng + ?Sized>(
        &mut self,
        slot: u64,
        band: &BandConfig,
        rng: &mut R,
    ) -> Vec<Emission> {
        match self {
            Jammer::Sweep(j) => j.emissions(slot, band),
            Jammer::Comb(j) => j.emissions(),
            Jammer::Random(j) => j.emissions(slot, band, rng),
            Jammer::Intelligent(j) => j.emissions(band),
        }
    }

    /// Called once per user decision epoch with the user's chosen channel.
    pub fn observe(&mut self, action: Action) {
        if let Jammer::Intelligent(j) = self {
            j.observe(action);
        }
    }

    pub fn reset(&mut self) {
        match self {
            Jammer::Random(j) => j.reset(),
            Jammer::Intelligent(j) => j.reset(),
            Jammer::Sweep(_) | Jammer::Comb(_) => {}
        }
    }
}
