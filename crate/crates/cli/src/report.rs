//! The run report: a versioned, line-oriented text file.
//!
//! ```text
//! nbse-report v1
//! [config]
//! input = data.csv
//! [stage graph]
//! status = executed
//! n_nodes = 200
//! [stage evaluation]
//! status = skipped
//! reason = no labels configured
//! ```
//!
//! Wall-clock timings live in a separate `timings.txt` so that reruns of the
//! same config produce identical report bytes.

use std::fmt::Write as _;

use nbse::fmt_f64;

use crate::error::{CliError, CliResult};

pub const REPORT_HEADER: &str = "nbse-report v1";

#[derive(Debug, Clone, PartialEq)]
pub enum StageStatus {
    Executed,
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    pub entries: Vec<(String, String)>,
    /// Seconds; not part of the rendered report.
    pub seconds: f64,
}

impl StageRecord {
    pub fn executed(name: &str) -> Self {
        Self {
            name: name.to_string(),
            status: StageStatus::Executed,
            entries: Vec::new(),
            seconds: 0.0,
        }
    }

    pub fn skipped(name: &str, reason: impl Into<String>) -> Self {
        Self {
            status: StageStatus::Skipped(reason.into()),
            ..Self::executed(name)
        }
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn put_f64(&mut self, key: impl Into<String>, value: f64) {
        self.put(key, fmt_f64(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub config: Vec<(String, String)>,
    pub stages: Vec<StageRecord>,
}

impl RunReport {
    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{REPORT_HEADER}").unwrap();
        writeln!(s, "[config]").unwrap();
        for (k, v) in &self.config {
            writeln!(s, "{k} = {v}").unwrap();
        }
        for st in &self.stages {
            writeln!(s, "[stage {}]", st.name).unwrap();
            match &st.status {
                StageStatus::Executed => writeln!(s, "status = executed").unwrap(),
                StageStatus::Skipped(r) => {
                    writeln!(s, "status = skipped").unwrap();
                    writeln!(s, "reason = {r}").unwrap();
                }
            }
            for (k, v) in &st.entries {
                writeln!(s, "{k} = {v}").unwrap();
            }
        }
        s
    }

    /// `stage,seconds` for every stage that ran.
    pub fn render_timings(&self) -> String {
        let mut s = String::from("stage,seconds\n");
        for st in self.stages.iter().filter(|s| s.status == StageStatus::Executed) {
            writeln!(s, "{},{:.6}", st.name, st.seconds).unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let bad = |n: usize, m: &str| CliError::Config(format!("report line {}: {m}", n + 1));
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, REPORT_HEADER)) => {}
            _ => return Err(bad(0, "missing 'nbse-report v1' header")),
        }
        let mut report = Self::default();
        let mut in_config = false;
        for (n, line) in lines {
            if line == "[config]" {
                in_config = true;
                continue;
            }
            if let Some(name) = line.strip_prefix("[stage ").and_then(|r| r.strip_suffix(']')) {
                in_config = false;
                report.stages.push(StageRecord::executed(name));
                continue;
            }
            let (k, v) = line.split_once(" = ").ok_or_else(|| bad(n, "expected key = value"))?;
            let (k, v) = (k.to_string(), v.to_string());
            if in_config {
                report.config.push((k, v));
                continue;
            }
            let st = report.stages.last_mut().ok_or_else(|| bad(n, "entry outside a section"))?;
            match k.as_str() {
                "status" if v == "executed" => {}
                "status" if v == "skipped" => st.status = StageStatus::Skipped(String::new()),
                "reason" => st.status = StageStatus::Skipped(v),
                _ => st.entries.push((k, v)),
            }
        }
        Ok(report)
    }

    /// Rounded, human-oriented digest.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for st in &self.stages {
            match &st.status {
                StageStatus::Skipped(r) => writeln!(s, "{:<18} skipped ({r})", st.name).unwrap(),
                StageStatus::Executed => {
                    let parts: Vec<String> = st
                        .entries
                        .iter()
                        .filter(|(_, v)| v.len() <= 40)
                        .map(|(k, v)| format!("{k}={}", round_for_humans(v)))
                        .collect();
                    writeln!(s, "{:<18} {}", st.name, parts.join(" ")).unwrap();
                }
            }
        }
        s
    }
}

fn round_for_humans(v: &str) -> String {
    match v.parse::<f64>() {
        Ok(x) if v.contains('e') || v.contains('.') => format!("{x:.4}"),
        _ => v.to_string(),
    }
}
