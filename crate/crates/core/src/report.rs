//! Monte-Carlo report records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Verdicts are decided at this many standard errors.
pub const SIGMA_LEVEL: f64 = 4.0;

/// Weighted estimates with fewer effective samples than this are reported
/// as inconclusive.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// A Monte-Carlo estimate with its standard error and verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub name: String,
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub bound: Option<f64>,
    pub verdict: Verdict,
    /// Auxiliary named quantities (component estimates, thresholds).
    #[serde(default)]
    pub details: BTreeMap<String, f64>,
}

impl McReport {
    pub fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}
