use std::path::Path;

use crate::darla::EpochRecord;
use crate::error::{Error, Result};

pub const METRICS_HEADER: [&str; 6] = [
    "epoch",
    "epsilon",
    "reward",
    "throughput_ma",
    "loss",
    "action",
];

/// One line of `metrics.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub epoch: usize,
    pub epsilon: f64,
    pub reward: f64,
    pub throughput_ma: f64,
    /// `None` before the replay buffer is ready; written as `nan`.
    pub loss: Option<f64>,
    pub action: usize,
}

impl From<&EpochRecord> for MetricsRow {
    fn from(r: &EpochRecord) -> Self {
        Self {
            epoch: r.epoch,
            epsilon: r.epsilon,
            reward: r.reward,
            throughput_ma: r.throughput_ma,
            loss: r.loss,
            action: r.action,
        }
    }
}

/// Six significant digits with trailing zeros kept, like C's `%#.6g`.
pub fn format_g6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    // Scientific form first so the exponent reflects rounding.
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        match 5 - exp {
            0 => format!("{v:.0}."),
            d => format!("{v:.*}", d as usize),
        }
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

pub fn write_metrics(rows: &[MetricsRow], out: impl std::io::Write) -> Result<()> {
    let csv_err = |e: csv::Error| Error::format("metrics csv", e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.epoch.to_string(),
            format_g6(r.epsilon),
            format_g6(r.reward),
            format_g6(r.throughput_ma),
            format_g6(r.loss.unwrap_or(f64::NAN)),
            r.action.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::format("metrics csv", e.to_string()))
}

pub fn write_metrics_csv(rows: &[MetricsRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_metrics(rows, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Format { message, .. } => Error::io(path, std::io::Error::other(message)),
        other => other,
    })
}

/// Parses the text of a metrics file. The header must match exactly.
pub fn parse_metrics(text: &str) -> Result<Vec<MetricsRow>> {
    let bad =
        |line: usize, msg: String| Error::format("metrics csv", format!("line {line}: {msg}"));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(1, e.to_string()))?;
    if header.iter().ne(METRICS_HEADER) {
        return Err(bad(
            1,
            format!("expected header `{}`", METRICS_HEADER.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        let int = |k: usize| -> Result<usize> {
            rec[k].parse().map_err(|_| {
                bad(
                    line,
                    format!("`{}` is not a valid {}", &rec[k], METRICS_HEADER[k]),
                )
            })
        };
        let float = |k: usize| -> Result<f64> {
            rec[k].parse().map_err(|_| {
                bad(
                    line,
                    format!("`{}` is not a valid {}", &rec[k], METRICS_HEADER[k]),
                )
            })
        };
        let loss = float(4)?;
        rows.push(MetricsRow {
            epoch: int(0)?,
            epsilon: float(1)?,
            reward: float(2)?,
            throughput_ma: float(3)?,
            loss: (!loss.is_nan()).then_some(loss),
            action: int(5)?,
        });
    }
    Ok(rows)
}

pub fn read_metrics_csv(path: impl AsRef<Path>) -> Result<Vec<MetricsRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_metrics(&text)
}
