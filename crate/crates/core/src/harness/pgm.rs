use std::path::Path;

use crate::error::{Error, Result};
use crate::qnet::{DBM_CEIL, DBM_FLOOR};
use crate::spectrum::WaterfallState;

/// An 8-bit greyscale image, row-major from the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u8,
    pub pixels: Vec<u8>,
}

/// Grey level of one waterfall cell: the display range maps onto 0..=255.
pub fn dbm_to_gray(dbm: f64) -> u8 {
    let x = ((dbm - DBM_FLOOR) / (DBM_CEIL - DBM_FLOOR)).clamp(0.0, 1.0);
    (255.0 * x).round() as u8
}

impl Pgm {
    /// Newest slot on the top row, lowest frequency on the left.
    pub fn from_waterfall(state: &WaterfallState) -> Self {
        let pixels = state
            .rows()
            .flat_map(|row| row.values.iter().map(|&v| dbm_to_gray(v)))
            .collect();
        Self {
            width: state.num_bins(),
            height: state.num_rows(),
            maxval: 255,
            pixels,
        }
    }

    pub fn pixel(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Binary (`P5`) encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    /// Decodes a binary PGM with an 8-bit maxval. Comments are allowed in
    /// the header; the raster must be exactly `width * height` bytes.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::format("pgm", m.to_string());
        if !bytes.starts_with(b"P5") {
            return Err(bad("missing P5 magic"));
        }
        let mut pos = 2;
        let mut fields = [0usize; 3];
        for field in &mut fields {
            loop {
                match bytes.get(pos) {
                    Some(b) if b.is_ascii_whitespace() => pos += 1,
                    Some(b'#') => {
                        while bytes.get(pos).is_some_and(|&b| b != b'\n' && b != b'\r') {
                            pos += 1;
                        }
                    }
                    _ => break,
                }
            }
            let start = pos;
            while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
                pos += 1;
            }
            if start == pos || pos - start > 9 {
                return Err(bad("expected a header number"));
            }
            // Digits only, at most nine of them: always fits.
            *field = std::str::from_utf8(&bytes[start..pos])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("expected a header number"))?;
        }
        if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(bad("header must end with one whitespace byte"));
        }
        pos += 1;
        let [width, height, maxval] = fields;
        if width == 0 || height == 0 {
            return Err(bad("empty image"));
        }
        if !(1..=255).contains(&maxval) {
            return Err(bad("only 8-bit maxval is supported"));
        }
        let len = width
            .checked_mul(height)
            .ok_or_else(|| bad("image too large"))?;
        let raster = &bytes[pos..];
        if raster.len() != len {
            return Err(bad(&format!(
                "raster has {} bytes, expected {len}",
                raster.len()
            )));
        }
        if raster.iter().any(|&p| p as usize > maxval) {
            return Err(bad("pixel exceeds maxval"));
        }
        Ok(Self {
            width,
            height,
            maxval: maxval as u8,
            pixels: raster.to_vec(),
        })
    }
}

pub fn export_waterfall_pgm(state: &WaterfallState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, Pgm::from_waterfall(state).to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Pgm> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Pgm::from_bytes(&bytes)
}
