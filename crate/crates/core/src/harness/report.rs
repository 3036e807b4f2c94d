use std::io::Write;

use serde::Serialize;

use super::config::{ExperimentConfig, Format};
use crate::error::Result;

/// Version tag of the JSON report layout.
pub const REPORT_SCHEMA: &str = "vardimwalk-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported for context; never affects the outcome.
    Info,
}

/// One measured quantity with its declared tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    /// Accepted range; `None` is unbounded on that side.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub tolerance: String,
    pub verdict: Verdict,
}

impl Metric {
    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, lo: None, hi: None, tolerance: "none".into(), verdict: Verdict::Info }
    }

    /// `lo <= value <= hi`; NaN fails.
    pub fn within(name: impl Into<String>, value: f64, lo: Option<f64>, hi: Option<f64>) -> Self {
        let ok = lo.is_none_or(|a| value >= a) && hi.is_none_or(|b| value <= b) && !value.is_nan();
        let tolerance = match (lo, hi) {
            (Some(a), Some(b)) => format!("[{a}, {b}]"),
            (Some(a), None) => format!(">= {a}"),
            (None, Some(b)) => format!("<= {b}"),
            (None, None) => "any".into(),
        };
        Self { name: name.into(), value, lo, hi, tolerance, verdict: verdict(ok) }
    }

    pub fn at_most(name: impl Into<String>, value: f64, hi: f64) -> Self {
        Self::within(name, value, None, Some(hi))
    }

    pub fn at_least(name: impl Into<String>, value: f64, lo: f64) -> Self {
        Self::within(name, value, Some(lo), None)
    }

    /// `|value - target| <= band`.
    pub fn near(name: impl Into<String>, value: f64, target: f64, band: f64) -> Self {
        let mut m = Self::within(name, value, Some(target - band), Some(target + band));
        m.tolerance = format!("{target} ± {band}");
        m
    }

    /// A yes/no check; `value` is 1 when it holds.
    pub fn holds(name: impl Into<String>, ok: bool, tolerance: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            lo: Some(1.0),
            hi: Some(1.0),
            tolerance: tolerance.into(),
            verdict: verdict(ok),
        }
    }

    /// A range check whose verdict was decided exactly elsewhere; the bounds
    /// are shown in floating point.
    pub fn decided(name: impl Into<String>, value: f64, lo: Option<f64>, hi: Option<f64>, tolerance: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), value, lo, hi, tolerance: tolerance.into(), verdict: verdict(ok) }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Per-k, per-time or per-bin rows.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// A stage timed against a budget.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
    pub budget: Option<f64>,
}

impl Timing {
    pub fn within_budget(&self) -> bool {
        self.budget.is_none_or(|b| self.seconds < b)
    }
}

/// Timings are the only part of a report that varies between replays.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct WallClock {
    pub total_seconds: f64,
    pub stages: Vec<Timing>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub metrics: Vec<Metric>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
    /// No metric failed.
    pub passed: bool,
    pub wall_clock: WallClock,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            experiment: config.experiment.name().into(),
            config: config.clone(),
            metrics: Vec::new(),
            tables: Vec::new(),
            notes: Vec::new(),
            passed: true,
            wall_clock: WallClock::default(),
        }
    }

    pub fn push(&mut self, m: Metric) {
        self.passed &= m.passed();
        self.metrics.push(m);
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    /// Metrics whose name starts with `prefix`.
    pub fn group<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Metric> + 'a {
        self.metrics.iter().filter(move |m| m.name.starts_with(prefix))
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn budgets_met(&self) -> bool {
        self.wall_clock.stages.iter().all(Timing::within_budget)
    }

    /// Every metric passed and every timed stage met its budget.
    pub fn all_passed(&self) -> bool {
        self.passed && self.budgets_met()
    }

    /// Times `f` as a named stage.
    pub fn timed<T>(&mut self, stage: impl Into<String>, budget: Option<f64>, f: impl FnOnce() -> T) -> T {
        let t0 = std::time::Instant::now();
        let out = f();
        self.wall_clock.stages.push(Timing { stage: stage.into(), seconds: t0.elapsed().as_secs_f64(), budget });
        out
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)?;
            }
            Format::Csv => self.write_csv(out)?,
        }
        Ok(())
    }

    /// Metrics first, then each table under a `# table <name>` line.
    fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "# {} {} passed={}", self.schema, self.experiment, self.passed)?;
        writeln!(out, "metric,value,lo,hi,tolerance,verdict")?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for m in &self.metrics {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(&m.name),
                m.value,
                opt(m.lo),
                opt(m.hi),
                csv_field(&m.tolerance),
                serde_json::to_value(m.verdict)?.as_str().unwrap()
            )?;
        }
        for t in &self.tables {
            writeln!(out)?;
            writeln!(out, "# table {}", t.name)?;
            writeln!(out, "{}", t.columns.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","))?;
            for r in &t.rows {
                writeln!(out, "{}", r.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","))?;
            }
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Experiment;

    #[test]
    fn verdicts() {
        assert!(Metric::at_most("a", 9.0, 9.0).passed());
        assert!(!Metric::at_most("a", 9.5, 9.0).passed());
        assert!(!Metric::within("a", f64::NAN, Some(0.0), None).passed());
        assert!(Metric::info("a", f64::NAN).passed());
        let m = Metric::near("b", 1.04, 1.0, 0.05);
        assert!(m.passed());
        assert_eq!(m.tolerance, "1 ± 0.05");
    }

    #[test]
    fn csv_layout() {
        let mut r = Report::new(&ExperimentConfig::defaults(Experiment::Balance));
        r.push(Metric::holds("exact, zero", true, "== 0"));
        let mut t = Table::new("rows", &["k", "x"]);
        t.push(vec!["3".into(), "1/4".into()]);
        r.tables.push(t);
        let mut buf = Vec::new();
        r.write(Format::Csv, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("\"exact, zero\",1,1,1,== 0,pass"));
        assert!(s.contains("# table rows\nk,x\n3,1/4\n"));
        r.push(Metric::at_most("bad", 2.0, 1.0));
        assert!(!r.passed);
    }
}
