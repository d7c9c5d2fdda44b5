//! Run reports and their JSON form. Floats are written with 17 significant
//! digits so a report reads back to the same values.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::grid::PositivityReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Passed,
    Failed,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub grid: Option<usize>,
    pub threshold: Option<f64>,
    pub t_samples: Option<usize>,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            grid: None,
            threshold: None,
            t_samples: None,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub index: usize,
    pub task: String,
    pub target: String,
    /// `pass` or `fail`: what the check itself was expected to do.
    pub expect: String,
    /// Whether the task met its expectation.
    pub status: Status,
    /// What the check itself did.
    pub observed: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<PositivityReport>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub digest: String,
    pub settings: Settings,
    pub passed: bool,
    pub tasks: Vec<TaskReport>,
}

impl RunReport {
    pub fn new(scenario: &str, digest: &str, settings: Settings) -> Self {
        RunReport {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: scenario.to_string(),
            digest: digest.to_string(),
            settings,
            passed: true,
            tasks: Vec::new(),
        }
    }

    pub fn push(&mut self, task: TaskReport) {
        self.passed &= task.status == Status::Passed;
        self.tasks.push(task);
    }

    pub fn failures(&self) -> impl Iterator<Item = &TaskReport> {
        self.tasks.iter().filter(|t| t.status != Status::Passed)
    }

    /// The same report with every wall time zeroed.
    pub fn without_timings(&self) -> RunReport {
        let mut out = self.clone();
        for t in &mut out.tasks {
            t.wall_time_s = 0.0;
        }
        out
    }
}

/// Pretty JSON with floats in `{:.16e}`.
struct ExactFloats(serde_json::ser::PrettyFormatter<'static>);

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let fmt = ExactFloats(serde_json::ser::PrettyFormatter::with_indent(b"  "));
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

pub fn report_from_json(src: &str) -> Result<RunReport> {
    serde_json::from_str(src).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn emit_report(report: &RunReport, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(report)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMeta;

    fn sample() -> RunReport {
        let mut r = RunReport::new("demo", "00", Settings::default());
        let grid = GridMeta {
            chart: "C".into(),
            coords: vec!["x".into()],
            resolution: vec![3],
            exclusions: vec![],
            points: 3,
        };
        let rep = PositivityReport::new("density", -0.1, vec![0.1 + 0.2, 1.0 / 3.0], grid, 1e-8, 1.0);
        r.push(TaskReport {
            index: 0,
            task: "verify_contact".into(),
            target: "alpha".into(),
            expect: "pass".into(),
            status: Status::Failed,
            observed: Status::Failed,
            message: None,
            reports: vec![rep],
            values: BTreeMap::from([("K".to_string(), std::f64::consts::PI)]),
            wall_time_s: 0.25,
        });
        r
    }

    #[test]
    fn empty_report_is_valid_json() {
        let r = RunReport::new("empty", "00", Settings::default());
        let text = to_json(&r).unwrap();
        let back = report_from_json(&text).unwrap();
        assert!(back.tasks.is_empty());
        assert!(back.passed);
    }

    #[test]
    fn floats_round_trip_exactly() {
        let r = sample();
        let text = to_json(&r).unwrap();
        assert!(text.contains("3.0000000000000004e-1"));
        assert_eq!(report_from_json(&text).unwrap(), r);
        assert!(text.contains("\"status\": \"failed\""));
        assert!(text.contains("argmin_point"));
    }

    #[test]
    fn passed_status_spelling() {
        let mut r = sample();
        r.tasks[0].status = Status::Passed;
        assert!(to_json(&r).unwrap().contains("\"status\": \"passed\""));
    }
}
