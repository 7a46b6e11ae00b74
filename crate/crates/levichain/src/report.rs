//! Run artifact emission: the JSON summary, the time-series CSV, sensor
//! telemetry CSV, and plan output.
//!
//! Column orders are fixed:
//!
//! - `timeseries.csv`: `t_s,trapped_fraction,escaped_fraction,free_fraction`
//! - `telemetry.csv`: `t_s,unit_id,sensor,value,aux,noise_sigma`
//!
//! Values are printed with `{:.9}`/shortest-float formatting chosen once, so
//! seed-matched runs emit byte-identical files.

use serde_json::json;
use std::io::{self, Write};
use std::path::Path;

use crate::containment::{SimReport, TrialRecord};
use crate::control::SensorReading;
use crate::planner::ChainPlan;
use crate::scenario::unit_to_value;

pub const TIMESERIES_HEADER: [&str; 4] = [
    "t_s",
    "trapped_fraction",
    "escaped_fraction",
    "free_fraction",
];
pub const TELEMETRY_HEADER: [&str; 6] = ["t_s", "unit_id", "sensor", "value", "aux", "noise_sigma"];

fn fmt_f64(value: f64) -> String {
    // shortest round-trip form; deterministic for equal inputs
    format!("{value}")
}

/// Write the trapped/escaped/free series as RFC-4180 CSV.
pub fn write_timeseries(report: &SimReport, writer: impl Write) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(TIMESERIES_HEADER)?;
    for sample in &report.samples {
        csv.write_record(&[
            fmt_f64(sample.t),
            fmt_f64(sample.trapped_fraction),
            fmt_f64(sample.escaped_fraction),
            fmt_f64(sample.free_fraction),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

/// Write sensor telemetry rows as RFC-4180 CSV. `aux` is the hydrophone
/// frequency and empty for other sensors.
pub fn write_telemetry(readings: &[SensorReading], writer: impl Write) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(TELEMETRY_HEADER)?;
    for reading in readings {
        csv.write_record(&[
            fmt_f64(reading.timestamp),
            reading.unit_id.to_string(),
            reading.kind.label().to_string(),
            fmt_f64(reading.value),
            reading.aux.map(fmt_f64).unwrap_or_default(),
            fmt_f64(reading.noise_sigma),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

/// Pretty JSON for the run summary, trailing newline included.
pub fn report_json(report: &SimReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// Pretty JSON for the chained-trial records.
pub fn trials_json(records: &[TrialRecord]) -> String {
    let mut text = serde_json::to_string_pretty(records).expect("trials serialize");
    text.push('\n');
    text
}

/// Plan output: summary numbers plus a `levitators` array in scenario-file
/// form, ready to paste into a scenario's `levitators` list.
pub fn plan_json(plan: &ChainPlan) -> String {
    let units: Vec<_> = plan.units().iter().map(unit_to_value).collect();
    let doc = json!({
        "spacing_m": plan.spacing,
        "capture_radius_m": plan.capture_radius,
        "coverage": plan.coverage,
        "unit_count": plan.placements.len(),
        "levitators": units,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("plan serializes");
    text.push('\n');
    text
}

/// Artifact writer rooted at a run's output directory.
pub struct RunArtifacts {
    dir: std::path::PathBuf,
}

impl RunArtifacts {
    /// Create (or reuse) the output directory.
    pub fn create(dir: impl AsRef<Path>) -> io::Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(RunArtifacts {
            dir: dir.as_ref().to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> std::path::PathBuf {
        self.dir.join(name)
    }

    pub fn write_string(&self, name: &str, contents: &str) -> io::Result<()> {
        std::fs::write(self.path(name), contents)
    }

    pub fn write_timeseries(&self, report: &SimReport) -> io::Result<()> {
        let file = std::fs::File::create(self.path("timeseries.csv"))?;
        write_timeseries(report, io::BufWriter::new(file))
    }

    pub fn write_telemetry(&self, readings: &[SensorReading]) -> io::Result<()> {
        let file = std::fs::File::create(self.path("telemetry.csv"))?;
        write_telemetry(readings, io::BufWriter::new(file))
    }
}
