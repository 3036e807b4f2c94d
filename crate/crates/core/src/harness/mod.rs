//! Named experiments, their configuration and reports.

mod config;
mod report;
mod stats;
mod structure;
mod walks;

use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

pub use config::{Experiment, ExperimentConfig, Format};
pub use report::{Metric, Report, Table, Timing, Verdict, WallClock, REPORT_SCHEMA};
pub use stats::{chi2_homogeneity, paired_l2, proportion_band, Moments, RadialBins, TestOutcome, VectorMoments};
pub use walks::{
    exact_balance_solve, variance_profile, Component, VarianceAccumulator, VarianceRow, MIN_SURVIVORS, MODULUS_PATHS,
};

use crate::error::Result;

/// Runs one experiment and writes the report to `config.out` when set.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let t0 = Instant::now();
    let mut report = Report::new(config);
    let r = &mut report;
    match config.experiment {
        Experiment::Build => structure::build(config, r)?,
        Experiment::Balance => structure::balance(config, r)?,
        Experiment::Measures => structure::measures(config, r)?,
        Experiment::Geometry => structure::geometry(config, r)?,
        Experiment::Generator => structure::generator(config, r)?,
        Experiment::Reversal => walks::reversal(config, r)?,
        Experiment::Occupation => walks::occupation(config, r)?,
        Experiment::Resurrection => walks::resurrection(config, r)?,
        Experiment::Variance => walks::variance(config, r)?,
        Experiment::Tightness => walks::tightness(config, r)?,
    }
    report.wall_clock.total_seconds = t0.elapsed().as_secs_f64();
    if let Some(path) = &config.out {
        report.write(config.format, &mut BufWriter::new(File::create(path)?))?;
    }
    Ok(report)
}
