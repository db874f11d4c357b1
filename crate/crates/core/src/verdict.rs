//! Outcomes of checks and the machine-readable report.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::hilbert::{Label, SparseVec, TolerancePolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Holds => "Holds",
            Status::Fails => "Fails",
            Status::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Status {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "holds" => Ok(Status::Holds),
            "fails" => Ok(Status::Fails),
            "inconclusive" => Ok(Status::Inconclusive),
            _ => Err(crate::Error::Parse(format!("unknown status `{s}`"))),
        }
    }
}

/// A vector that reproduces a failure, with an optional human-readable
/// pointer (offending edge, projector index, block).
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub vector: SparseVec,
    pub detail: Option<String>,
}

impl Witness {
    pub fn vector(vector: SparseVec) -> Self {
        Self {
            vector,
            detail: None,
        }
    }

    pub fn basis(label: Label) -> Self {
        Self::vector(SparseVec::basis(label))
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct VerdictContext {
    pub seed: Option<u64>,
    pub window: Vec<Label>,
    pub tolerance: TolerancePolicy,
    /// Acceptance threshold actually applied to the discrepancy.
    pub threshold: f64,
    /// Number of vectors evaluated (basis vectors plus random probes).
    pub probes_used: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub discrepancy: f64,
    pub context: VerdictContext,
    pub note: Option<String>,
    /// Named auxiliary numbers (per-function residuals, table rows, ...).
    pub measurements: Vec<(String, f64)>,
}

impl Verdict {
    pub fn holds(discrepancy: f64, context: VerdictContext) -> Self {
        Self {
            status: Status::Holds,
            witness: None,
            discrepancy,
            context,
            note: None,
            measurements: Vec::new(),
        }
    }

    pub fn fails(witness: Witness, discrepancy: f64, context: VerdictContext) -> Self {
        Self {
            status: Status::Fails,
            witness: Some(witness),
            discrepancy,
            context,
            note: None,
            measurements: Vec::new(),
        }
    }

    pub fn inconclusive(
        reason: impl Into<String>,
        discrepancy: f64,
        context: VerdictContext,
    ) -> Self {
        Self {
            status: Status::Inconclusive,
            witness: None,
            discrepancy,
            context,
            note: Some(reason.into()),
            measurements: Vec::new(),
        }
    }

    /// Holds when `discrepancy <= context.threshold`, otherwise Fails with the
    /// supplied witness.
    pub fn decide(discrepancy: f64, witness: Option<Witness>, context: VerdictContext) -> Self {
        if discrepancy <= context.threshold {
            Self::holds(discrepancy, context)
        } else {
            let w = witness.unwrap_or_else(|| Witness::vector(SparseVec::new()));
            Self::fails(w, discrepancy, context)
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_measurement(mut self, name: impl Into<String>, value: f64) -> Self {
        self.measurements.push((name.into(), value));
        self
    }

    pub fn is_holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn is_fails(&self) -> bool {
        self.status == Status::Fails
    }
}

/// One line of a report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportEntry {
    pub predicate: String,
    pub anchor: String,
    pub verdict: Verdict,
    pub expected: Option<Status>,
}

impl ReportEntry {
    /// True when no expectation is declared or the verdict meets it.
    pub fn meets_expectation(&self) -> bool {
        self.expected.is_none_or(|e| e == self.verdict.status)
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ReportMetadata {
    pub operator: String,
    pub timestamp: Option<u64>,
    pub config_hash: Option<String>,
    /// Replay configuration, embedded verbatim.
    pub config: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Report {
    pub entries: Vec<ReportEntry>,
    pub metadata: ReportMetadata,
    /// Free-form structured data (tables, certificates).
    pub extras: Map<String, Value>,
}

pub const REPORT_SCHEMA: u32 = 1;

/// Decimal string with 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn witness_json(w: &Witness) -> Value {
    let mut map = Map::new();
    for (l, c) in w.vector.iter() {
        map.insert(l.to_string(), Value::from(vec![c.re, c.im]));
    }
    Value::Object(map)
}

impl Report {
    pub fn new(operator: impl Into<String>) -> Self {
        Self {
            metadata: ReportMetadata {
                operator: operator.into(),
                ..Default::default()
            },
            ..Default::default()
        }
    }

    pub fn push(
        &mut self,
        predicate: impl Into<String>,
        anchor: impl Into<String>,
        verdict: Verdict,
    ) {
        self.entries.push(ReportEntry {
            predicate: predicate.into(),
            anchor: anchor.into(),
            verdict,
            expected: None,
        });
    }

    pub fn push_expected(
        &mut self,
        predicate: impl Into<String>,
        anchor: impl Into<String>,
        verdict: Verdict,
        expected: Status,
    ) {
        self.entries.push(ReportEntry {
            predicate: predicate.into(),
            anchor: anchor.into(),
            verdict,
            expected: Some(expected),
        });
    }

    pub fn extend(&mut self, other: Report) {
        self.entries.extend(other.entries);
        self.extras.extend(other.extras);
    }

    pub fn entry(&self, predicate: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.predicate == predicate)
    }

    pub fn all_expectations_met(&self) -> bool {
        self.entries.iter().all(ReportEntry::meets_expectation)
    }

    pub fn has_expectations(&self) -> bool {
        self.entries.iter().any(|e| e.expected.is_some())
    }

    pub fn any_inconclusive(&self) -> bool {
        self.entries
            .iter()
            .any(|e| e.verdict.status == Status::Inconclusive)
    }

    /// JSON with a fixed field order per entry: predicate, anchor, status,
    /// discrepancy, witness, seed, then the remaining context.
    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self.entries.iter().map(entry_json).collect();
        let mut meta = Map::new();
        meta.insert(
            "operator".into(),
            Value::from(self.metadata.operator.clone()),
        );
        meta.insert(
            "timestamp".into(),
            self.metadata.timestamp.map_or(Value::Null, Value::from),
        );
        meta.insert(
            "config_hash".into(),
            self.metadata
                .config_hash
                .clone()
                .map_or(Value::Null, Value::from),
        );
        meta.insert(
            "config".into(),
            self.metadata.config.clone().unwrap_or(Value::Null),
        );
        let mut root = Map::new();
        root.insert("schema".into(), Value::from(REPORT_SCHEMA));
        root.insert("metadata".into(), Value::Object(meta));
        root.insert("entries".into(), Value::Array(entries));
        root.insert("extras".into(), Value::Object(self.extras.clone()));
        Value::Object(root)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per entry: `PASS`/`FAIL` against the expectation, or the bare
    /// status when none is declared.
    pub fn summary_lines(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|e| {
                let tag = match e.expected {
                    Some(_) if e.meets_expectation() => "PASS",
                    Some(_) => "FAIL",
                    None => "INFO",
                };
                let expected = e
                    .expected
                    .map(|s| format!(" (expected {s})"))
                    .unwrap_or_default();
                format!(
                    "[{tag}] {}: {}{expected}, discrepancy {:.3e}",
                    e.predicate, e.verdict.status, e.verdict.discrepancy
                )
            })
            .collect()
    }
}

fn entry_json(e: &ReportEntry) -> Value {
    let v = &e.verdict;
    let mut m = Map::new();
    m.insert("predicate".into(), Value::from(e.predicate.clone()));
    m.insert("anchor".into(), Value::from(e.anchor.clone()));
    m.insert("status".into(), Value::from(v.status.to_string()));
    m.insert(
        "discrepancy".into(),
        Value::from(format_real(v.discrepancy)),
    );
    m.insert(
        "witness".into(),
        v.witness.as_ref().map_or(Value::Null, witness_json),
    );
    m.insert(
        "seed".into(),
        v.context.seed.map_or(Value::Null, Value::from),
    );
    m.insert(
        "expected".into(),
        e.expected
            .map_or(Value::Null, |s| Value::from(s.to_string())),
    );
    m.insert(
        "threshold".into(),
        Value::from(format_real(v.context.threshold)),
    );
    m.insert(
        "tolerance".into(),
        Value::from(vec![
            format_real(v.context.tolerance.abs_tol),
            format_real(v.context.tolerance.rel_tol),
        ]),
    );
    m.insert("probes".into(), Value::from(v.context.probes_used));
    m.insert(
        "window".into(),
        Value::from(
            v.context
                .window
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>(),
        ),
    );
    m.insert(
        "witness_detail".into(),
        v.witness
            .as_ref()
            .and_then(|w| w.detail.clone())
            .map_or(Value::Null, Value::from),
    );
    m.insert(
        "note".into(),
        v.note.clone().map_or(Value::Null, Value::from),
    );
    let mut meas = Map::new();
    for (k, x) in &v.measurements {
        meas.insert(k.clone(), Value::from(format_real(*x)));
    }
    m.insert("measurements".into(), Value::Object(meas));
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn real_formatting_has_17_significant_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(0.0), "0.0000000000000000e0");
        assert_eq!(format_real(-2.5), "-2.5000000000000000e0");
    }

    #[test]
    fn entry_field_order_is_fixed() {
        let mut r = Report::new("S");
        let w = Witness::vector(SparseVec::from_entries([(
            Label::Nat(0),
            Complex64::new(1.0, -1.0),
        )]));
        let ctx = VerdictContext {
            seed: Some(7),
            threshold: 1e-10,
            ..Default::default()
        };
        r.push("quasinormal", "anchor", Verdict::fails(w, 0.5, ctx));
        let s = serde_json::to_string(&r.to_json()).unwrap();
        let p = s.find("\"predicate\"").unwrap();
        let a = s.find("\"anchor\"").unwrap();
        let st = s.find("\"status\"").unwrap();
        let d = s.find("\"discrepancy\"").unwrap();
        let w = s.find("\"witness\"").unwrap();
        let sd = s.find("\"seed\"").unwrap();
        assert!(p < a && a < st && st < d && d < w && w < sd);
        assert!(s.contains("\"n:0\":[1.0,-1.0]"));
        assert!(s.contains("\"schema\":1"));
    }

    #[test]
    fn expectations() {
        let mut r = Report::new("x");
        r.push_expected(
            "a",
            "",
            Verdict::holds(0.0, Default::default()),
            Status::Holds,
        );
        assert!(r.all_expectations_met());
        r.push_expected(
            "b",
            "",
            Verdict::inconclusive("budget", 0.0, Default::default()),
            Status::Fails,
        );
        assert!(!r.all_expectations_met());
        assert!(r.any_inconclusive());
    }
}
