//! Anti-jamming channel selection from raw spectrum waterfalls.
//!
//! The crate simulates a frequency-agile link under sweep, comb, random and
//! adaptive jamming, renders what a wideband sensor sees as a dBm
//! waterfall, and trains a convolutional Q-network on those waterfalls with
//! epsilon-greedy exploration and experience replay.

pub mod error;
pub mod jammer;
pub mod spectrum;

pub use error::{Error, Result};
pub mod darla;
pub mod harness;
pub mod qnet;
