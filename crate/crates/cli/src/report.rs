//! Machine-readable reports.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            bound,
            pass: value <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            bound,
            pass: value >= bound,
        }
    }

    /// A yes/no condition, encoded as value 1 (holds) against bound 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

/// Checks and raw data of one subcommand.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Section {
    pub checks: Vec<Check>,
    pub details: BTreeMap<String, Value>,
}

impl Section {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.details.insert(key.to_string(), v);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub subcommand: String,
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
    pub sections: BTreeMap<String, Section>,
    pub pass: bool,
    /// Wall-clock milliseconds per section; outside the determinism contract.
    pub timing: BTreeMap<String, f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without its timing field, for reproducibility comparisons.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("timing");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (name, section) in &self.sections {
            for c in &section.checks {
                let rel = match c.relation {
                    Relation::AtMost => "≤",
                    Relation::AtLeast => "≥",
                };
                out.push_str(&format!(
                    "{} {name}/{}: {:.3e} {rel} {:.3e}\n",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.bound
                ));
            }
        }
        out.push_str(if self.pass { "all checks passed\n" } else { "some checks failed\n" });
        out
    }
}
