//! Binary parameter checkpoints.
//!
//! Layout, all integers little-endian `u32`:
//!
//! ```text
//! magic    b"AJQNET01"
//! arch     input_rows input_cols
//!          conv1_filters conv1_kernel conv1_stride
//!          conv2_filters conv2_kernel conv2_stride
//!          hidden actions
//! tensors  count (= 8), then per tensor: rank, dims[rank]
//! payload  every tensor's values as little-endian f64, in header order
//! ```
//!
//! Tensor order is conv1.weight, conv1.bias, conv2.weight, conv2.bias,
//! fc1.weight, fc1.bias, fc2.weight, fc2.bias.

use std::path::Path;

use super::network::{Layer, QNetworkParams};
use super::{Architecture, ConvSpec};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"AJQNET01";
const TENSORS: usize = 8;
/// Upper bound on any single architecture field accepted when decoding.
const MAX_DIM: u32 = 1 << 16;

impl QNetworkParams {
    fn tensor_shapes(&self) -> Vec<Vec<usize>> {
        let arch = self.architecture();
        let [c1, c2, f1, f2] = arch.weight_shapes();
        vec![
            c1,
            vec![arch.conv1.filters],
            c2,
            vec![arch.conv2.filters],
            f1,
            vec![arch.hidden],
            f2,
            vec![arch.actions],
        ]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let a = self.architecture();
        let mut out = Vec::with_capacity(128 + self.num_params() * 8);
        out.extend_from_slice(MAGIC);
        let fields = [
            a.input_rows,
            a.input_cols,
            a.conv1.filters,
            a.conv1.kernel,
            a.conv1.stride,
            a.conv2.filters,
            a.conv2.kernel,
            a.conv2.stride,
            a.hidden,
            a.actions,
        ];
        let mut put = |v: usize| out.extend_from_slice(&(v as u32).to_le_bytes());
        for f in fields {
            put(f);
        }
        let shapes = self.tensor_shapes();
        put(shapes.len());
        for s in &shapes {
            put(s.len());
            for &d in s {
                put(d);
            }
        }
        for v in self.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::format("checkpoint", "bad magic"));
        }
        let mut f = [0usize; 10];
        for v in &mut f {
            *v = r.dim()?;
        }
        let arch = Architecture {
            input_rows: f[0],
            input_cols: f[1],
            conv1: ConvSpec {
                filters: f[2],
                kernel: f[3],
                stride: f[4],
            },
            conv2: ConvSpec {
                filters: f[5],
                kernel: f[6],
                stride: f[7],
            },
            hidden: f[8],
            actions: f[9],
        };
        arch.validate()
            .map_err(|e| Error::format("checkpoint", format!("architecture: {e}")))?;

        let expected = QNetworkParams::zeros_shapes(&arch)?;
        if r.u32()? as usize != TENSORS {
            return Err(Error::format("checkpoint", "expected 8 tensors"));
        }
        for (i, want) in expected.iter().enumerate() {
            let rank = r.u32()? as usize;
            if rank != want.len() {
                return Err(Error::format(
                    "checkpoint",
                    format!("tensor {i}: rank {rank}"),
                ));
            }
            for &d in want {
                if r.u32()? as usize != d {
                    return Err(Error::format(
                        "checkpoint",
                        format!("tensor {i}: shape disagrees with architecture"),
                    ));
                }
            }
        }
        let total: usize = expected.iter().map(|s| s.iter().product::<usize>()).sum();
        let remaining = bytes.len() - r.pos;
        if remaining != total * 8 {
            return Err(Error::format(
                "checkpoint",
                format!("payload has {remaining} bytes, expected {}", total * 8),
            ));
        }
        let mut tensors = expected.iter().map(|s| {
            let n: usize = s.iter().product();
            (0..n).map(|_| r.f64()).collect::<Result<Vec<f64>>>()
        });
        let mut layer = || -> Result<Layer> {
            let weight = tensors.next().expect("8 tensors")?;
            let bias = tensors.next().expect("8 tensors")?;
            Ok(Layer { weight, bias })
        };
        let layers = [layer()?, layer()?, layer()?, layer()?];
        QNetworkParams::from_layers(arch, layers)
    }

    /// Tensor shapes for `arch`, refusing sizes that overflow.
    fn zeros_shapes(arch: &Architecture) -> Result<Vec<Vec<usize>>> {
        let too_big = || Error::format("checkpoint", "architecture too large");
        let (h2, w2) = arch.conv2_out();
        arch.conv2
            .filters
            .checked_mul(h2)
            .and_then(|v| v.checked_mul(w2))
            .and_then(|flat| flat.checked_mul(arch.hidden))
            .filter(|&n| n <= 1 << 28)
            .ok_or_else(too_big)?;
        let [c1, c2, f1, f2] = arch.weight_shapes();
        let shapes = vec![
            c1,
            vec![arch.conv1.filters],
            c2,
            vec![arch.conv2.filters],
            f1,
            vec![arch.hidden],
            f2,
            vec![arch.actions],
        ];
        let mut total: usize = 0;
        for s in &shapes {
            let n = s
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .ok_or_else(too_big)?;
            total = total.checked_add(n).ok_or_else(too_big)?;
        }
        if total > 1 << 28 {
            return Err(too_big());
        }
        Ok(shapes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::format("checkpoint", "truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
    }

    fn dim(&mut self) -> Result<usize> {
        let v = self.u32()?;
        if v > MAX_DIM {
            return Err(Error::format(
                "checkpoint",
                format!("dimension {v} too large"),
            ));
        }
        Ok(v as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        let b = self.take(8)?;
        Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
    }
}
