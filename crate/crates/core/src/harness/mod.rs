//! Experiment orchestration: configs, sweeps over sampling cells, and the
//! CSV, plot and range-summary outputs.

mod config;
mod output;
mod run;

pub use config::{default_sweep, ExperimentConfig, NetworkSource, NetworkSpec, OutputPaths};
pub use output::{
    emit_csv, emit_plot_data, range_summary, MuRange, RangeStats, RangeSummary, CSV_HEADER,
};
pub use run::{
    cell_seed, derive_seed, diffusion_seed, expected_rows, generator_seed, obtain_network,
    run_experiment, Aggregate, AccuracyReport, NetworkRecord, ReportRow,
};

use std::fs::{self, File};
use std::io::BufWriter;

use crate::error::Result;

/// Runs `cfg` and writes the CSV, plot data and range summary under its
/// output directory.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<(AccuracyReport, RangeSummary)> {
    let report = run_experiment(cfg)?;
    let summary = range_summary(&report)?;
    fs::create_dir_all(&cfg.output.dir)?;
    emit_csv(&report, BufWriter::new(File::create(cfg.output.csv_path())?))?;
    emit_plot_data(&report, BufWriter::new(File::create(cfg.output.plot_path())?))?;
    fs::write(cfg.output.summary_path(), summary.to_string())?;
    Ok((report, summary))
}
