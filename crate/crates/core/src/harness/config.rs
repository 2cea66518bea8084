use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::darla::TrainHyper;
use crate::error::{Error, Result};
use crate::jammer::JammerConfig;
use crate::qnet::NetworkConfig;
use crate::spectrum::{BandConfig, EnvConfig, RewardConfig, UserConfig};

/// One experiment, as read from a TOML file. Every section and key is
/// optional; see the README for the full schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Master seed. Must fit in a signed 64-bit TOML integer.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Length of each post-training evaluation run.
    pub eval_epochs: usize,
    pub band: BandConfig,
    pub user: UserConfig,
    pub reward: RewardConfig,
    pub jammer: JammerConfig,
    pub network: NetworkConfig,
    pub training: TrainHyper,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("runs/default"),
            eval_epochs: 2000,
            band: BandConfig::default(),
            user: UserConfig::default(),
            reward: RewardConfig::default(),
            jammer: JammerConfig::default(),
            network: NetworkConfig::default(),
            training: TrainHyper::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn env(&self) -> EnvConfig {
        EnvConfig {
            band: self.band.clone(),
            user: self.user.clone(),
            reward: self.reward.clone(),
            jammers: vec![self.jammer.clone()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if i64::try_from(self.seed).is_err() {
            return Err(Error::config("seed", "must be below 2^63"));
        }
        let env = self.env();
        env.validate()?;
        let actions = env.action_space()?.count;
        self.network
            .architecture(self.band.rows, self.band.bins, actions)?;
        self.training.validate()
    }

    /// Parses and validates a config document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| Error::config("<document>", e.message().to_string()))?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let message = e.inner().message().to_string();
            Error::config(key_of(&path, &message), message)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<document>", e.to_string()))
    }
}

/// Dotted key for an error at `path` (which already ends in any unknown
/// field name, except at the top level).
fn key_of(path: &str, message: &str) -> String {
    if path != "." {
        return path.to_string();
    }
    message
        .strip_prefix("unknown field `")
        .and_then(|rest| rest.split('`').next())
        .unwrap_or("<document>")
        .to_string()
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_toml(&text)
}
