use std::collections::VecDeque;

use super::waveform::{mw_to_dbm, Emission};
use super::BandConfig;
use crate::error::{Error, Result};

/// One sensing snapshot: power in dBm for every frequency bin.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub values: Vec<f64>,
    pub slot: u64,
}

/// Sliding time-frequency window of the most recent rows, newest first.
/// Row `k` was sensed `k + 1` slots before the current decision instant.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterfallState {
    rows: VecDeque<SpectrumRow>,
    bins: usize,
}

impl WaterfallState {
    /// A window of `rows` rows, every bin set to `fill_dbm`.
    pub fn new(rows: usize, bins: usize, fill_dbm: f64) -> Self {
        let rows = (0..rows)
            .map(|_| SpectrumRow {
                values: vec![fill_dbm; bins],
                slot: 0,
            })
            .collect();
        Self { rows, bins }
    }

    pub fn from_rows(rows: Vec<SpectrumRow>) -> Result<Self> {
        let bins = rows.first().map_or(0, |r| r.values.len());
        if rows.iter().any(|r| r.values.len() != bins) {
            return Err(Error::Shape("waterfall rows differ in length".into()));
        }
        Ok(Self {
            rows: rows.into(),
            bins,
        })
    }

    /// Inserts `row` as the newest row and drops the oldest one.
    pub fn push_row(&mut self, row: SpectrumRow) -> Result<()> {
        if row.values.len() != self.bins {
            return Err(Error::Shape(format!(
                "row has {} bins, waterfall expects {}",
                row.values.len(),
                self.bins
            )));
        }
        if self.rows.is_empty() {
            return Ok(());
        }
        self.rows.pop_back();
        self.rows.push_front(row);
        Ok(())
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_bins(&self) -> usize {
        self.bins
    }

    pub fn row(&self, k: usize) -> &SpectrumRow {
        &self.rows[k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &SpectrumRow> {
        self.rows.iter()
    }

    pub fn value(&self, row: usize, bin: usize) -> f64 {
        self.rows[row].values[bin]
    }
}

/// Renders one sensing row: noise plus the in-bin power of every emission,
/// converted to dBm. Power outside the sensed band is not observed.
pub fn render_row(
    emissions: &[Emission],
    band: &BandConfig,
    noise_density_mw_per_mhz: f64,
    slot: u64,
) -> SpectrumRow {
    let mut linear = vec![noise_density_mw_per_mhz * band.bin_width_mhz; band.bins];
    for e in emissions {
        let (occ_lo, occ_hi) = e.occupied();
        // Only bins touching the occupied band can receive power.
        let first = ((occ_lo - band.lo_mhz) / band.bin_width_mhz)
            .floor()
            .max(0.0) as usize;
        let last = (((occ_hi - band.lo_mhz) / band.bin_width_mhz)
            .ceil()
            .max(0.0) as usize)
            .min(band.bins);
        for (n, bin) in linear.iter_mut().enumerate().take(last).skip(first) {
            let (lo, hi) = band.bin_edges(n);
            *bin += e.waveform.power_in(e.center_mhz, lo, hi);
        }
    }
    SpectrumRow {
        values: linear.into_iter().map(mw_to_dbm).collect(),
        slot,
    }
}
