//! Raised-cosine power spectral density and its exact band integral.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts dBm to milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Converts milliwatts to dBm.
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Spectral shape of a transmitter: a raised-cosine spectrum whose
/// `bandwidth_mhz` is the full occupied support, roll-off included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformSpec {
    pub bandwidth_mhz: f64,
    pub rolloff: f64,
    pub power_dbm: f64,
}

impl WaveformSpec {
    pub fn new(bandwidth_mhz: f64, rolloff: f64, power_dbm: f64) -> Result<Self> {
        let spec = Self {
            bandwidth_mhz,
            rolloff,
            power_dbm,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_mhz.is_finite() && self.bandwidth_mhz > 0.0) {
            return Err(Error::config(
                "bandwidth_mhz",
                format!("must be positive, got {}", self.bandwidth_mhz),
            ));
        }
        if !(self.rolloff > 0.0 && self.rolloff < 1.0) {
            return Err(Error::config(
                "rolloff",
                format!("must lie in (0, 1), got {}", self.rolloff),
            ));
        }
        if !self.power_dbm.is_finite() {
            return Err(Error::config("power_dbm", "must be finite"));
        }
        Ok(())
    }

    /// Symbol rate `B / (1 + alpha)` in MHz.
    pub fn symbol_rate(&self) -> f64 {
        self.bandwidth_mhz / (1.0 + self.rolloff)
    }

    pub fn power_mw(&self) -> f64 {
        dbm_to_mw(self.power_dbm)
    }

    /// PSD at `offset` MHz from the carrier, in mW/MHz. Assumes a valid spec.
    pub(crate) fn density(&self, offset: f64) -> f64 {
        let rs = self.symbol_rate();
        let a = self.rolloff;
        let height = self.power_mw() / rs;
        let flat_edge = (1.0 - a) * rs / 2.0;
        let x = offset.abs();
        if x <= flat_edge {
            height
        } else if x < self.bandwidth_mhz / 2.0 {
            height * 0.5 * (1.0 + (PI / (a * rs) * (x - flat_edge)).cos())
        } else {
            0.0
        }
    }

    /// Integral of the PSD from the carrier out to `offset` (odd in `offset`).
    fn cumulative(&self, offset: f64) -> f64 {
        let rs = self.symbol_rate();
        let a = self.rolloff;
        let height = self.power_mw() / rs;
        let flat_edge = (1.0 - a) * rs / 2.0;
        let x = offset.abs();
        let value = if x <= flat_edge {
            height * x
        } else if x < self.bandwidth_mhz / 2.0 {
            let u = x - flat_edge;
            let k = PI / (a * rs);
            height * flat_edge + 0.5 * height * (u + (k * u).sin() / k)
        } else {
            self.power_mw() / 2.0
        };
        value.copysign(offset)
    }

    /// Power in `[f_lo, f_hi]` for a carrier at `center`. Assumes a valid spec.
    pub(crate) fn power_in(&self, center: f64, f_lo: f64, f_hi: f64) -> f64 {
        let half = self.bandwidth_mhz / 2.0;
        let lo = f_lo.max(center - half);
        let hi = f_hi.min(center + half);
        if hi <= lo {
            return 0.0;
        }
        (self.cumulative(hi - center) - self.cumulative(lo - center)).max(0.0)
    }
}

/// One active transmitter during one sensing slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emission {
    pub center_mhz: f64,
    pub waveform: WaveformSpec,
}

impl Emission {
    pub fn new(center_mhz: f64, waveform: WaveformSpec) -> Self {
        Self {
            center_mhz,
            waveform,
        }
    }

    /// Occupied band `[center - B/2, center + B/2]`.
    pub fn occupied(&self) -> (f64, f64) {
        let half = self.waveform.bandwidth_mhz / 2.0;
        (self.center_mhz - half, self.center_mhz + half)
    }
}

/// Raised-cosine PSD in mW/MHz at `freq_offset_mhz` from the carrier.
pub fn raised_cosine_psd(freq_offset_mhz: f64, spec: &WaveformSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.density(freq_offset_mhz))
}

/// Power of `emission` falling inside `[f_lo, f_hi]`, in mW, integrated in
/// closed form (flat section plus the cosine antiderivative).
pub fn band_power(emission: &Emission, f_lo: f64, f_hi: f64) -> Result<f64> {
    emission.waveform.validate()?;
    if !(f_lo < f_hi) {
        return Err(Error::Usage(format!(
            "band_power needs f_lo < f_hi, got [{f_lo}, {f_hi}]"
        )));
    }
    Ok(emission.waveform.power_in(emission.center_mhz, f_lo, f_hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p_dbm: f64) -> WaveformSpec {
        WaveformSpec::new(4.0, 0.3, p_dbm).unwrap()
    }

    // Composite Simpson over [a, b]; independent of the closed-form integral.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = if n % 2 == 1 { n + 1 } else { n };
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn psd_peak_is_inverse_symbol_rate() {
        let v = raised_cosine_psd(0.0, &spec(0.0)).unwrap();
        assert!((v - 0.325).abs() < 1e-12, "{v}");
    }

    #[test]
    fn psd_vanishes_at_band_edge() {
        let s = spec(0.0);
        assert_eq!(raised_cosine_psd(2.0, &s).unwrap(), 0.0);
        assert_eq!(raised_cosine_psd(-2.0, &s).unwrap(), 0.0);
        assert_eq!(raised_cosine_psd(7.5, &s).unwrap(), 0.0);
    }

    #[test]
    fn psd_is_half_height_at_nyquist_frequency() {
        let s = spec(0.0);
        let rs = s.symbol_rate();
        let v = raised_cosine_psd(rs / 2.0, &s).unwrap();
        assert!((v - 1.0 / (2.0 * rs)).abs() < 1e-12);
    }

    #[test]
    fn psd_is_symmetric() {
        let s = spec(7.0);
        for i in 0..200 {
            let f = i as f64 * 0.013;
            assert_eq!(s.density(f), s.density(-f));
        }
    }

    #[test]
    fn psd_quadrature_recovers_total_power() {
        for &p in &[-20.0, 0.0, 30.0] {
            let s = spec(p);
            let total = simpson(|f| s.density(f), -2.0, 2.0, 200_000);
            let rel = (total - s.power_mw()).abs() / s.power_mw();
            assert!(rel < 1e-6, "p={p} total={total}");
        }
    }

    #[test]
    fn band_power_examples() {
        let e = Emission::new(10.0, spec(0.0));
        let full = band_power(&e, 8.0, 12.0).unwrap();
        assert!((full - 1.0).abs() < 1e-12);
        assert_eq!(band_power(&e, 12.0, 15.0).unwrap(), 0.0);
        assert_eq!(band_power(&e, 0.0, 7.9).unwrap(), 0.0);
        let half = band_power(&e, 10.0, 12.0).unwrap();
        assert!((half - 0.5).abs() < 1e-12);
    }

    #[test]
    fn band_power_matches_quadrature_on_partial_bands() {
        let e = Emission::new(9.3, spec(3.0));
        for &(lo, hi) in &[
            (7.0, 8.0),
            (7.5, 9.0),
            (8.1, 11.2),
            (10.5, 11.29),
            (6.0, 20.0),
        ] {
            let closed = band_power(&e, lo, hi).unwrap();
            let numeric = simpson(|f| e.waveform.density(f - 9.3), lo, hi, 400_000);
            assert!(
                (closed - numeric).abs() <= 1e-7 * e.waveform.power_mw(),
                "[{lo},{hi}] closed={closed} numeric={numeric}"
            );
        }
    }

    #[test]
    fn rejects_invalid_waveforms() {
        assert!(WaveformSpec::new(4.0, 0.0, 0.0).is_err());
        assert!(WaveformSpec::new(4.0, 1.0, 0.0).is_err());
        assert!(WaveformSpec::new(0.0, 0.3, 0.0).is_err());
        let bad = WaveformSpec {
            bandwidth_mhz: -1.0,
            rolloff: 0.3,
            power_dbm: 0.0,
        };
        assert!(matches!(
            raised_cosine_psd(0.0, &bad),
            Err(Error::Config { .. })
        ));
        let e = Emission::new(10.0, spec(0.0));
        assert!(band_power(&e, 3.0, 3.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn band_power_is_additive(
            center in 0.0f64..20.0,
            a in -2.0f64..22.0,
            w1 in 0.001f64..6.0,
            w2 in 0.001f64..6.0,
            p in -30.0f64..40.0,
        ) {
            let e = Emission::new(center, spec(p));
            let (b, c) = (a + w1, a + w1 + w2);
            let whole = band_power(&e, a, c).unwrap();
            let parts = band_power(&e, a, b).unwrap() + band_power(&e, b, c).unwrap();
            let scale = whole.abs().max(e.waveform.power_mw() * 1e-6);
            proptest::prop_assert!((whole - parts).abs() <= 1e-9 * scale);
        }
    }
}
