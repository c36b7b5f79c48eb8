use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Assertion {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Run-dependent fields, kept apart so the rest of the report is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub timestamp: u64,
    pub threads: usize,
    pub version: &'static str,
}

impl Meta {
    pub fn now() -> Self {
        Meta {
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            threads: rayon::current_num_threads(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub seed: u64,
    /// Resolved parameters, defaults included.
    pub params: Value,
    pub analytic: Value,
    pub empirical: Value,
    pub stderr: Value,
    pub verdict: String,
    pub assertions: Vec<Assertion>,
    pub meta: Meta,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failed_assertions(&self) -> Vec<&str> {
        self.assertions.iter().filter(|a| !a.passed).map(|a| a.name.as_str()).collect()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without `meta`; identical across reruns with the same config.
    pub fn reproducible_part(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("meta");
        v
    }
}

pub fn verdict(assertions: &[Assertion]) -> String {
    let failed: Vec<&str> = assertions.iter().filter(|a| !a.passed).map(|a| a.name.as_str()).collect();
    if failed.is_empty() {
        "pass".into()
    } else {
        format!("fail: {}", failed.join(", "))
    }
}
