//! Diagnostics emitted by analyses: severity, locations, evidence, dedup.

use std::fmt;

use serde::Serialize;

/// How serious a finding is. Error-severity reports drive the process exit
/// code; warnings and notes do not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    fn label(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One step of a report's evidence: a location plus a short note, such as a
/// signal name on a propagation path or a cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evidence {
    pub file: String,
    pub line: u32,
    pub note: String,
}

impl Evidence {
    pub fn new(file: impl Into<String>, line: u32, note: impl Into<String>) -> Evidence {
        Evidence { file: file.into(), line: line.into(), note: note.into() }
    }

    /// Compact `file:line (note)` form used by the records format.
    fn render(&self) -> String {
        let mut s = if self.file.is_empty() {
            String::new()
        } else {
            format!("{}:{}", self.file, self.line)
        };
        if !self.note.is_empty() {
            if s.is_empty() {
                s = self.note.clone();
            } else {
                s.push_str(&format!(" ({})", self.note));
            }
        }
        s
    }
}

/// A diagnostic produced by an analysis.
///
/// `module` names the module the primary location elaborated from and
/// `instance` the instance path it was observed under. The dedup key
/// deliberately ignores `instance`: the same source line reported under many
/// elaborated instances collapses to one report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub analysis: String,
    pub category: String,
    pub severity: Severity,
    pub module: String,
    pub instance: String,
    pub file: String,
    pub line: u32,
    pub message: String,
    pub evidence: Vec<Evidence>,
}

/// The identity under which near-duplicate reports collapse.
pub type DedupKey = (String, String, String, u32);

impl Report {
    pub fn new(
        analysis: impl Into<String>,
        category: impl Into<String>,
        severity: Severity,
        module: impl Into<String>,
        file: impl Into<String>,
        line: u32,
        message: impl Into<String>,
    ) -> Report {
        Report {
            analysis: analysis.into(),
            category: category.into(),
            severity,
            module: module.into(),
            instance: String::new(),
            file: file.into(),
            line,
            message: message.into(),
            evidence: Vec::new(),
        }
    }

    /// Sets the instance path the finding was observed under.
    pub fn with_instance(mut self, instance: impl Into<String>) -> Report {
        self.instance = instance.into();
        self
    }

    /// Appends one evidence step.
    pub fn with_evidence(mut self, e: Evidence) -> Report {
        self.evidence.push(e);
        self
    }

    /// Key for collapsing near-duplicates: analysis, category, module, and
    /// source line, with the instance path erased.
    pub fn dedup_key(&self) -> DedupKey {
        (
            self.analysis.clone(),
            self.category.clone(),
            self.module.clone(),
            self.line,
        )
    }

    /// Human-readable rendering, evidence steps indented below the headline.
    pub fn render_text(&self) -> String {
        let mut s = format!("{}[{}] ", self.severity, self.analysis);
        if self.file.is_empty() {
            s.push_str(&format!("{}: ", self.module));
        } else {
            s.push_str(&format!("{}:{}: ", self.file, self.line));
        }
        s.push_str(&self.message);
        for e in &self.evidence {
            s.push_str("\n  - ");
            s.push_str(&e.render());
        }
        s
    }

    /// One-line machine-readable rendering (JSON).
    pub fn render_record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            analysis: &'a str,
            category: &'a str,
            severity: Severity,
            file: &'a str,
            line: u32,
            message: &'a str,
            evidence: Vec<String>,
        }
        let rec = Record {
            analysis: &self.analysis,
            category: &self.category,
            severity: self.severity,
            file: &self.file,
            line: self.line,
            message: &self.message,
            evidence: self.evidence.iter().map(Evidence::render).collect(),
        };
        serde_json::to_string(&rec).expect("report serializes")
    }
}

/// Collapses near-duplicate reports, keeping the first of each dedup key.
/// Order is otherwise preserved, so output stays in emission order.
pub fn dedup(reports: Vec<Report>) -> Vec<Report> {
    let mut seen = std::collections::BTreeSet::new();
    reports
        .into_iter()
        .filter(|r| seen.insert(r.dedup_key()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(instance: &str, line: u32) -> Report {
        Report::new(
            "missing-reset",
            "missing-reset",
            Severity::Error,
            "fifo",
            "fifo.v",
            line,
            "register `wr_ptr` has no reset",
        )
        .with_instance(instance)
    }

    #[test]
    fn dedup_erases_instance_path() {
        let reports = vec![
            sample("top.u0", 37),
            sample("top.u1", 37),
            sample("top.u0", 52),
        ];
        let out = dedup(reports);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].instance, "top.u0");
        assert_eq!(out[1].line, 52);
    }

    #[test]
    fn dedup_is_idempotent() {
        let reports = vec![sample("a", 1), sample("b", 1), sample("c", 2)];
        let once = dedup(reports);
        let twice = dedup(once.clone());
        assert_eq!(once, twice);
        let mut keys: Vec<_> = once.iter().map(Report::dedup_key).collect();
        keys.dedup();
        assert_eq!(keys.len(), once.len(), "all surviving keys distinct");
    }

    #[test]
    fn text_rendering() {
        let r = sample("top.u0", 37).with_evidence(Evidence::new("fifo.v", 12, "wr_ptr"));
        assert_eq!(
            r.render_text(),
            "error[missing-reset] fifo.v:37: register `wr_ptr` has no reset\n  - fifo.v:12 (wr_ptr)"
        );
    }

    #[test]
    fn record_rendering_is_stable_json() {
        let r = sample("top.u0", 37).with_evidence(Evidence::new("fifo.v", 12, "wr_ptr"));
        assert_eq!(
            r.render_record(),
            "{\"analysis\":\"missing-reset\",\"category\":\"missing-reset\",\"severity\":\"error\",\
             \"file\":\"fifo.v\",\"line\":37,\"message\":\"register `wr_ptr` has no reset\",\
             \"evidence\":[\"fifo.v:12 (wr_ptr)\"]}"
        );
    }
}
