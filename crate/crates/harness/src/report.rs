//! Machine-readable audit reports. Reports carry no timings, so two runs
//! of the same scenario serialize to the same bytes.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Check {
    /// Number of times the property was evaluated.
    pub count: u64,
    pub violations: u64,
    /// First violation, if any.
    pub first: Option<String>,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// Histogram of `estimate / dist` over queries with positive distance.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Stretch {
    /// Upper bucket edges; the last bucket is unbounded.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub worst: f64,
    pub samples: u64,
}

impl Default for Stretch {
    fn default() -> Self {
        let edges = vec![1.0, 1.5, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0];
        let counts = vec![0; edges.len() + 1];
        Stretch { edges, counts, worst: 1.0, samples: 0 }
    }
}

impl Stretch {
    pub fn add(&mut self, s: f64) {
        let i = self.edges.iter().position(|&e| s <= e).unwrap_or(self.edges.len());
        self.counts[i] += 1;
        self.worst = self.worst.max(s);
        self.samples += 1;
    }

    pub fn merge(&mut self, o: &Stretch) {
        for (a, b) in self.counts.iter_mut().zip(&o.counts) {
            *a += b;
        }
        self.worst = self.worst.max(o.worst);
        self.samples += o.samples;
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AuditReport {
    pub schema: u32,
    pub scenario: String,
    pub task: String,
    pub checks: BTreeMap<String, Check>,
    pub stretch: Option<Stretch>,
    /// Measured quantities next to their configured bounds.
    pub measured: BTreeMap<String, f64>,
    pub counters: BTreeMap<String, u64>,
    /// Primary output of the task: flow solution, cut, pruning trace.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact: Option<serde_json::Value>,
}

impl AuditReport {
    pub fn new(scenario: &str, task: &str) -> Self {
        AuditReport {
            schema: SCHEMA_VERSION,
            scenario: scenario.to_string(),
            task: task.to_string(),
            checks: BTreeMap::new(),
            stretch: None,
            measured: BTreeMap::new(),
            counters: BTreeMap::new(),
            artifact: None,
        }
    }

    /// Records one evaluation of `name`.
    pub fn tally(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        let c = self.checks.entry(name.to_string()).or_default();
        c.count += 1;
        if !ok {
            c.violations += 1;
            if c.first.is_none() {
                c.first = Some(detail());
            }
        }
    }

    pub fn fail(&mut self, name: &str, detail: String) {
        self.tally(name, false, || detail);
    }

    pub fn count(&mut self, name: &str, by: u64) {
        *self.counters.entry(name.to_string()).or_default() += by;
    }

    /// Keeps the maximum of a measured quantity.
    pub fn measure_max(&mut self, name: &str, v: f64) {
        let e = self.measured.entry(name.to_string()).or_insert(v);
        *e = e.max(v);
    }

    pub fn measure(&mut self, name: &str, v: f64) {
        self.measured.insert(name.to_string(), v);
    }

    pub fn stretch(&mut self, s: f64) {
        self.stretch.get_or_insert_with(Stretch::default).add(s);
    }

    pub fn passed(&self) -> bool {
        self.checks.values().all(Check::pass)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|(_, c)| !c.pass())
            .map(|(k, c)| format!("{}: {} ({} of {})", k, c.first.as_deref().unwrap_or(""), c.violations, c.count))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Reports of one batch plus their merged view.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BatchReport {
    pub schema: u32,
    pub name: String,
    pub reports: Vec<AuditReport>,
}

impl BatchReport {
    pub fn new(name: &str, reports: Vec<AuditReport>) -> Self {
        BatchReport { schema: SCHEMA_VERSION, name: name.to_string(), reports }
    }

    pub fn passed(&self) -> bool {
        self.reports.iter().all(AuditReport::passed)
    }

    pub fn failing(&self) -> Vec<String> {
        self.reports
            .iter()
            .filter(|r| !r.passed())
            .map(|r| format!("{}: {}", r.scenario, r.failures().join("; ")))
            .collect()
    }

    pub fn stretch(&self) -> Stretch {
        let mut s = Stretch::default();
        for r in &self.reports {
            if let Some(t) = &r.stretch {
                s.merge(t);
            }
        }
        s
    }

    /// Largest value of a measured quantity across the batch.
    pub fn max_measured(&self, key: &str) -> Option<f64> {
        self.reports.iter().filter_map(|r| r.measured.get(key).copied()).reduce(f64::max)
    }

    pub fn total(&self, counter: &str) -> u64 {
        self.reports.iter().filter_map(|r| r.counters.get(counter)).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
