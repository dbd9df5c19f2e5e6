//! Run reports: echoed inputs, computed outputs and reference comparisons.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tolerance {
    /// `|computed − reference| <= value`
    Absolute { value: f64 },
    /// `|computed − reference| <= value·|reference|`
    Relative { value: f64 },
    /// `computed < value`
    Below { value: f64 },
    /// `lo <= computed <= hi`
    Range { lo: f64, hi: f64 },
}

impl Tolerance {
    fn accepts(&self, reference: f64, computed: f64) -> bool {
        match *self {
            Tolerance::Absolute { value } => (computed - reference).abs() <= value,
            Tolerance::Relative { value } => {
                (computed - reference).abs() <= value * reference.abs()
            }
            Tolerance::Below { value } => computed < value,
            Tolerance::Range { lo, hi } => (lo..=hi).contains(&computed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceSource {
    /// Published figure.
    Published,
    /// Independently computed value (oracle or closed form).
    Derived,
}

/// One reference-vs-computed row. `pass` is always derived from the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub name: String,
    pub source: ReferenceSource,
    pub reference: f64,
    pub computed: f64,
    pub tolerance: Tolerance,
    pass: bool,
}

impl Comparison {
    pub fn new(
        name: impl Into<String>,
        source: ReferenceSource,
        reference: f64,
        computed: f64,
        tolerance: Tolerance,
    ) -> Self {
        Self {
            name: name.into(),
            source,
            reference,
            computed,
            tolerance,
            pass: computed.is_finite() && tolerance.accepts(reference, computed),
        }
    }

    pub fn pass(&self) -> bool {
        self.pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub outputs: BTreeMap<String, Value>,
    pub files: Vec<String>,
    pub comparisons: Vec<Comparison>,
}

impl RunReport {
    pub fn new(command: impl Into<String>, inputs: Value) -> Self {
        Self {
            command: command.into(),
            inputs,
            outputs: BTreeMap::new(),
            files: Vec::new(),
            comparisons: Vec::new(),
        }
    }

    pub fn output(&mut self, key: &str, value: impl Serialize) {
        self.outputs.insert(
            key.to_owned(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
    }

    pub fn compare(&mut self, row: Comparison) {
        self.comparisons.push(row);
    }

    pub fn all_pass(&self) -> bool {
        self.comparisons.iter().all(Comparison::pass)
    }

    /// Appends another report's outputs (prefixed) and comparisons.
    pub fn absorb(&mut self, prefix: &str, other: RunReport) {
        for (k, v) in other.outputs {
            self.outputs.insert(format!("{prefix}.{k}"), v);
        }
        self.files.extend(other.files);
        self.comparisons.extend(other.comparisons);
    }

    /// One `PASS`/`FAIL` line per comparison.
    pub fn summary(&self) -> String {
        self.comparisons
            .iter()
            .map(|c| {
                format!(
                    "{} {:<44} computed {:<14.6} reference {:<12} {:?}\n",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.computed,
                    c.reference,
                    c.tolerance
                )
            })
            .collect()
    }
}
