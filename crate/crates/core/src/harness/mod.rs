//! Experiment configuration, orchestration and on-disk artifacts.

mod config;
mod metrics;
mod pgm;
mod run;

pub use config::{load_config, ExperimentConfig};
pub use metrics::{
    format_g6, parse_metrics, read_metrics_csv, write_metrics, write_metrics_csv, MetricsRow,
    METRICS_HEADER,
};
pub use pgm::{dbm_to_gray, export_waterfall_pgm, read_pgm, Pgm};
pub use run::{
    compare_runs, run_experiment, summarize_run, waterfall_file, RunRow, RunSummary, Verdict,
    CHECKPOINT_FILE, METRICS_FILE, SUMMARY_FILE,
};
