//! Convolutional Q-function approximator: two conv layers and two fully
//! connected layers, with hand-written reverse-mode gradients.

mod checkpoint;
mod gradcheck;
mod network;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::WaterfallState;

pub use gradcheck::{gradient_check, gradient_check_with, reduced_architecture};
pub use network::{BackwardFault, Layer, QNetworkParams, Sample};

/// Lower and upper dBm bounds of the input normalization.
pub const DBM_FLOOR: f64 = -100.0;
pub const DBM_CEIL: f64 = 35.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvSpec {
    pub filters: usize,
    pub kernel: usize,
    pub stride: usize,
}

impl ConvSpec {
    /// Output side length without padding; trailing pixels that do not fill
    /// a whole stride are dropped.
    pub fn output_len(&self, input: usize) -> usize {
        if input < self.kernel || self.stride == 0 {
            0
        } else {
            (input - self.kernel) / self.stride + 1
        }
    }
}

/// Layer sizes of the network for a given input geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub input_rows: usize,
    pub input_cols: usize,
    pub conv1: ConvSpec,
    pub conv2: ConvSpec,
    pub hidden: usize,
    pub actions: usize,
}

impl Architecture {
    /// Default layer sizes (16 8x8/4, 32 4x4/2, 256 hidden) for an input.
    pub fn for_input(input_rows: usize, input_cols: usize, actions: usize) -> Self {
        Self {
            input_rows,
            input_cols,
            conv1: ConvSpec {
                filters: 16,
                kernel: 8,
                stride: 4,
            },
            conv2: ConvSpec {
                filters: 32,
                kernel: 4,
                stride: 2,
            },
            hidden: 256,
            actions,
        }
    }

    pub fn conv1_out(&self) -> (usize, usize) {
        (
            self.conv1.output_len(self.input_rows),
            self.conv1.output_len(self.input_cols),
        )
    }

    pub fn conv2_out(&self) -> (usize, usize) {
        let (h, w) = self.conv1_out();
        (self.conv2.output_len(h), self.conv2.output_len(w))
    }

    pub fn flat_len(&self) -> usize {
        let (h, w) = self.conv2_out();
        self.conv2.filters * h * w
    }

    pub fn input_len(&self) -> usize {
        self.input_rows * self.input_cols
    }

    /// Weight shapes in storage order: conv1, conv2, fc1, fc2.
    pub fn weight_shapes(&self) -> [Vec<usize>; 4] {
        [
            vec![self.conv1.filters, 1, self.conv1.kernel, self.conv1.kernel],
            vec![
                self.conv2.filters,
                self.conv1.filters,
                self.conv2.kernel,
                self.conv2.kernel,
            ],
            vec![self.hidden, self.flat_len()],
            vec![self.actions, self.hidden],
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("network.input_rows", self.input_rows),
            ("network.input_cols", self.input_cols),
            ("network.conv1_filters", self.conv1.filters),
            ("network.conv1_kernel", self.conv1.kernel),
            ("network.conv1_stride", self.conv1.stride),
            ("network.conv2_filters", self.conv2.filters),
            ("network.conv2_kernel", self.conv2.kernel),
            ("network.conv2_stride", self.conv2.stride),
            ("network.hidden", self.hidden),
            ("network.actions", self.actions),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(Error::config(key, "must be at least 1"));
            }
        }
        let (h1, w1) = self.conv1_out();
        if h1 == 0 || w1 == 0 {
            return Err(Error::config(
                "network.conv1_kernel",
                format!(
                    "kernel {} does not fit a {}x{} input",
                    self.conv1.kernel, self.input_rows, self.input_cols
                ),
            ));
        }
        let (h2, w2) = self.conv2_out();
        if h2 == 0 || w2 == 0 {
            return Err(Error::config(
                "network.conv2_kernel",
                format!(
                    "kernel {} does not fit a {h1}x{w1} feature map",
                    self.conv2.kernel
                ),
            ));
        }
        Ok(())
    }
}

/// Network settings as they appear in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    /// Side of the square average-pooling block applied to the waterfall.
    pub decimation: usize,
    pub conv1_filters: usize,
    pub conv1_kernel: usize,
    pub conv1_stride: usize,
    pub conv2_filters: usize,
    pub conv2_kernel: usize,
    pub conv2_stride: usize,
    pub hidden: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        let a = Architecture::for_input(1, 1, 1);
        Self {
            decimation: 4,
            conv1_filters: a.conv1.filters,
            conv1_kernel: a.conv1.kernel,
            conv1_stride: a.conv1.stride,
            conv2_filters: a.conv2.filters,
            conv2_kernel: a.conv2.kernel,
            conv2_stride: a.conv2.stride,
            hidden: a.hidden,
        }
    }
}

impl NetworkConfig {
    /// Architecture for a `rows x bins` waterfall and `actions` outputs.
    pub fn architecture(&self, rows: usize, bins: usize, actions: usize) -> Result<Architecture> {
        let d = self.decimation;
        if d == 0 || !rows.is_multiple_of(d) || !bins.is_multiple_of(d) {
            return Err(Error::config(
                "network.decimation",
                format!("{d} does not divide a {rows}x{bins} waterfall"),
            ));
        }
        let arch = Architecture {
            input_rows: rows / d,
            input_cols: bins / d,
            conv1: ConvSpec {
                filters: self.conv1_filters,
                kernel: self.conv1_kernel,
                stride: self.conv1_stride,
            },
            conv2: ConvSpec {
                filters: self.conv2_filters,
                kernel: self.conv2_kernel,
                stride: self.conv2_stride,
            },
            hidden: self.hidden,
            actions,
        };
        arch.validate()?;
        Ok(arch)
    }
}

/// Single-channel network input with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl StateTensor {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} tensor",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Maps a dBm value onto `[0, 1]` over `[DBM_FLOOR, DBM_CEIL]`, clamping.
pub fn normalize_dbm(dbm: f64) -> f64 {
    ((dbm - DBM_FLOOR) / (DBM_CEIL - DBM_FLOOR)).clamp(0.0, 1.0)
}

/// Average-pools `decimation x decimation` blocks of the waterfall (in dBm)
/// and normalizes the result. Row 0 stays the most recent slot.
pub fn preprocess(state: &WaterfallState, decimation: usize) -> Result<StateTensor> {
    let (m, n) = (state.num_rows(), state.num_bins());
    if decimation == 0 || m % decimation != 0 || n % decimation != 0 {
        return Err(Error::config(
            "network.decimation",
            format!("{decimation} does not divide a {m}x{n} waterfall"),
        ));
    }
    let (rows, cols) = (m / decimation, n / decimation);
    let mut sums = vec![0.0; rows * cols];
    for (r, row) in state.rows().enumerate() {
        let out = &mut sums[(r / decimation) * cols..][..cols];
        for (c, chunk) in row.values.chunks_exact(decimation).enumerate() {
            out[c] += chunk.iter().sum::<f64>();
        }
    }
    let area = (decimation * decimation) as f64;
    let data = sums.into_iter().map(|s| normalize_dbm(s / area)).collect();
    Ok(StateTensor { rows, cols, data })
}
