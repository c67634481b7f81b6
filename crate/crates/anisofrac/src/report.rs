//! Machine-readable check reports.
//!
//! Every verification produces the same shape:
//! `{check, params, probes: [{input, lhs, rhs, slack}], pass, worst}`.
//! A probe passes when its slack is nonnegative (tolerances are folded
//! into the slack by the producing check); `worst` is the smallest slack.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub type Params = BTreeMap<String, serde_json::Value>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub input: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: Params,
    pub probes: Vec<ProbeRecord>,
    pub pass: bool,
    /// Smallest slack across all probes (negative means a violation).
    pub worst: f64,
    pub worst_input: Option<Vec<f64>>,
}

impl CheckReport {
    /// Pass iff every probe has nonnegative slack.
    pub fn from_probes(check: impl Into<String>, params: Params, probes: Vec<ProbeRecord>) -> Self {
        let mut worst = f64::INFINITY;
        let mut worst_input = None;
        for p in &probes {
            if p.slack < worst {
                worst = p.slack;
                worst_input = Some(p.input.clone());
            }
        }
        if probes.is_empty() {
            worst = 0.0;
        }
        Self {
            check: check.into(),
            params,
            probes,
            pass: worst >= 0.0,
            worst,
            worst_input,
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: {} (worst slack {:.3e}, {} probes)",
            self.check,
            if self.pass { "pass" } else { "FAIL" },
            self.worst,
            self.probes.len()
        )
    }
}

/// Helper for params maps.
pub fn param_f64(params: &mut Params, key: &str, value: f64) {
    params.insert(key.to_string(), serde_json::json!(value));
}

pub fn param_str(params: &mut Params, key: &str, value: &str) {
    params.insert(key.to_string(), serde_json::json!(value));
}
