//! Experiment configuration files.

use std::fmt;

use serde::{Deserialize, Serialize};

use nls_qi::counting::{Adjacency, CountingQuery, Region};
use nls_qi::flow::FlowConfig;
use nls_qi::sampler::GaussianSpec;
use nls_qi::transport::{MomentKind, ObservableSpec};
use nls_qi::{Dyadic, LatticeIndex};

/// A configuration problem anchored to a line of the source file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.path, self.line, self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub s: f64,
    pub k: u32,
    #[serde(rename = "N")]
    pub cutoff: u32,
    pub dt: f64,
    #[serde(default)]
    pub t: f64,
    pub seed: u64,
    pub n_samples: usize,
    #[serde(default)]
    pub sample: SampleSection,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub energy_audit: AuditSection,
    #[serde(default)]
    pub counting: CountingSection,
    #[serde(default)]
    pub qi_test: QiSection,
    #[serde(default)]
    pub moments: MomentsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSection {
    /// Number of leading samples also written as snapshot files.
    pub snapshots: usize,
    /// `σ` of the reported `FL^{σ,∞}` norm; defaults to `s - 1.1`.
    pub fl_sigma: Option<f64>,
}

impl Default for SampleSection {
    fn default() -> Self {
        Self {
            snapshots: 1,
            fl_sigma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    /// Write a CSV row every this many steps.
    pub record_every: usize,
    pub fl_sigma: Option<f64>,
    /// Largest accepted relative drift of mass and Hamiltonian.
    pub drift_tolerance: f64,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            record_every: 10,
            fl_sigma: None,
            drift_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSection {
    pub n_fields: usize,
    /// Finite-difference steps, coarse to fine.
    pub dt_fd: Vec<f64>,
    pub min_order: f64,
}

impl Default for AuditSection {
    fn default() -> Self {
        Self {
            n_fields: 10,
            dt_fd: vec![1e-3, 5e-4, 2.5e-4, 1.25e-4],
            min_order: 1.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountingSection {
    pub shells: Vec<u32>,
    pub signs: Vec<[i8; 3]>,
    pub m: Vec<[i32; 2]>,
    pub region: Region,
    pub adjacency: Adjacency,
    /// Equal-shell scales for the growth-exponent fit; empty to skip it.
    pub scales: Vec<u32>,
    pub max_exponent: f64,
}

impl Default for CountingSection {
    fn default() -> Self {
        Self {
            shells: vec![4, 4, 4],
            signs: vec![[1, -1, 1]],
            m: vec![[0, 0]],
            region: Region::Shell,
            adjacency: Adjacency::Cyclic,
            scales: Vec::new(),
            max_exponent: 2.3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QiSection {
    pub observables: Vec<ObservableSpec>,
    /// Simpson panels; defaults to one panel per two integrator steps.
    pub quad_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsSection {
    pub kind: MomentKind,
    pub p: f64,
    pub radius: f64,
    /// `σ` of the localizing ball; defaults to `s - 1.1`.
    pub sigma: Option<f64>,
    /// Scales for the tail `|S(P_{≤2N}φ) - S(P_{≤N}φ)|`; empty to skip it.
    pub tail_scales: Vec<u32>,
}

impl Default for MomentsSection {
    fn default() -> Self {
        Self {
            kind: MomentKind::S,
            p: 2.0,
            radius: 2.0,
            sigma: None,
            tail_scales: Vec::new(),
        }
    }
}

/// Subcommands that consume a configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Sample,
    Evolve,
    EnergyAudit,
    Counting,
    QiTest,
    Moments,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Sample => "sample",
            Experiment::Evolve => "evolve",
            Experiment::EnergyAudit => "energy-audit",
            Experiment::Counting => "counting",
            Experiment::QiTest => "qi-test",
            Experiment::Moments => "moments",
        }
    }
}

impl ExperimentConfig {
    pub fn parse(raw: &str, label: &str) -> Result<Self, ConfigError> {
        toml::from_str(raw).map_err(|e: toml::de::Error| {
            let line = e
                .span()
                .map(|span| raw[..span.start.min(raw.len())].matches('\n').count() + 1)
                .unwrap_or(1);
            ConfigError {
                path: label.into(),
                line,
                field: "config".into(),
                message: e.message().to_string(),
            }
        })
    }

    pub fn gaussian(&self) -> GaussianSpec {
        GaussianSpec {
            s: self.s,
            cutoff: self.cutoff,
            seed: self.seed,
        }
    }

    pub fn flow(&self) -> FlowConfig {
        let cutoff = Dyadic::new(self.cutoff).expect("validated cutoff");
        FlowConfig::new(self.k, cutoff, self.dt).expect("validated flow parameters")
    }

    pub fn fl_sigma(&self, value: Option<f64>) -> f64 {
        value.unwrap_or(self.s - 1.1)
    }

    /// Re-checks every downstream constraint. Section requirements specific
    /// to `experiment` are checked as well.
    pub fn validate(&self, experiment: Experiment, raw: &str, label: &str) -> Result<(), ConfigError> {
        let fail = |field: &str, message: String| ConfigError {
            path: label.into(),
            line: locate(raw, field),
            field: field.into(),
            message,
        };
        if let Err(e) = Dyadic::new(self.cutoff) {
            return Err(fail("N", e.to_string()));
        }
        if let Err(e) = self.gaussian().validate() {
            return Err(fail(core_field(&e, "s"), e.to_string()));
        }
        if let Err(e) = FlowConfig::new(self.k, Dyadic::new(self.cutoff).unwrap(), self.dt) {
            return Err(fail(core_field(&e, "dt"), e.to_string()));
        }
        if !self.t.is_finite() {
            return Err(fail("t", "must be finite".into()));
        }
        if self.n_samples < 2 {
            return Err(fail("n_samples", "need at least two samples".into()));
        }

        if self.evolve.record_every == 0 {
            return Err(fail("evolve.record_every", "must be at least 1".into()));
        }
        if !(self.evolve.drift_tolerance > 0.0) {
            return Err(fail("evolve.drift_tolerance", "must be positive".into()));
        }

        let audit = &self.energy_audit;
        if audit.n_fields == 0 {
            return Err(fail("energy_audit.n_fields", "must be at least 1".into()));
        }
        if audit.dt_fd.len() < 2 {
            return Err(fail("energy_audit.dt_fd", "need at least two steps to fit an order".into()));
        }
        if audit.dt_fd.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(fail("energy_audit.dt_fd", "steps must be finite and positive".into()));
        }

        let counting = &self.counting;
        for (j, &n) in counting.shells.iter().enumerate() {
            if let Err(e) = Dyadic::new(n) {
                return Err(fail("counting.shells", format!("entry {j}: {e}")));
            }
        }
        for &n in &counting.scales {
            if let Err(e) = Dyadic::new(n) {
                return Err(fail("counting.scales", e.to_string()));
            }
        }
        if counting.signs.is_empty() {
            return Err(fail("counting.signs", "at least one sign pattern is required".into()));
        }
        if counting.m.is_empty() {
            return Err(fail("counting.m", "at least one m is required".into()));
        }
        if experiment == Experiment::Counting {
            for query in self.counting_queries() {
                match query.validate() {
                    // reported by the run itself, with its own exit code
                    Ok(()) | Err(nls_qi::Error::ResourceGuard { .. }) => {}
                    Err(e) => return Err(fail(core_field(&e, "counting.shells"), e.to_string())),
                }
            }
        }

        for obs in &self.qi_test.observables {
            if let Err(e) = obs.validate() {
                return Err(fail("qi_test.observables", e.to_string()));
            }
            if !obs.is_bounded() {
                return Err(fail(
                    "qi_test.observables",
                    format!("observable `{}` is unbounded", obs.name()),
                ));
            }
        }
        if experiment == Experiment::QiTest && self.qi_test.observables.is_empty() {
            return Err(fail("qi_test.observables", "at least one observable is required".into()));
        }
        if self.qi_test.quad_steps == Some(0) {
            return Err(fail("qi_test.quad_steps", "must be at least 1".into()));
        }

        let moments = &self.moments;
        if !(moments.p > 0.0 && moments.p.is_finite()) {
            return Err(fail("moments.p", "must be positive".into()));
        }
        if !(moments.radius > 0.0 && moments.radius.is_finite()) {
            return Err(fail("moments.radius", "must be positive".into()));
        }
        for &n in &moments.tail_scales {
            if let Err(e) = Dyadic::new(n) {
                return Err(fail("moments.tail_scales", e.to_string()));
            }
        }
        Ok(())
    }

    /// One query per (sign pattern, m) pair, over `counting.shells`.
    pub fn counting_queries(&self) -> Vec<CountingQuery> {
        let c = &self.counting;
        let shells: Vec<Dyadic> = c.shells.iter().filter_map(|&n| Dyadic::new(n).ok()).collect();
        let mut out = Vec::new();
        for signs in &c.signs {
            for m in &c.m {
                out.push(CountingQuery {
                    m: LatticeIndex::new(m[0], m[1]),
                    kappa: 0,
                    shells: shells.clone(),
                    signs: signs.to_vec(),
                    region: c.region,
                    adjacency: c.adjacency,
                });
            }
        }
        out
    }
}

/// Config key blamed for a core validation error.
fn core_field(e: &nls_qi::Error, fallback: &'static str) -> &'static str {
    match e {
        nls_qi::Error::InvalidParameter { name: "cutoff", .. } => "N",
        nls_qi::Error::InvalidParameter { name, .. } => name,
        nls_qi::Error::NotDyadic(_) => "N",
        _ => fallback,
    }
}

/// Line of the key `field` (dotted as `section.key`), falling back to the
/// section header and then to line 1.
pub fn locate(raw: &str, field: &str) -> usize {
    let (section, key) = match field.split_once('.') {
        Some((s, k)) => (Some(s), k),
        None => (None, field),
    };
    let mut current: Option<String> = None;
    let mut header_line = None;
    for (i, line) in raw.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.trim_start_matches('[').split(']').next().unwrap_or("").trim();
            current = Some(name.to_string());
            if Some(name) == section && header_line.is_none() {
                header_line = Some(i + 1);
            }
            continue;
        }
        let in_scope = match section {
            Some(s) => current.as_deref() == Some(s),
            None => current.is_none(),
        };
        if in_scope {
            let name = trimmed.split('=').next().unwrap_or("").trim();
            if name == key {
                return i + 1;
            }
        }
    }
    header_line.unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "s = 2.5\nk = 1\nN = 4\ndt = 1e-3\nt = 0.1\nseed = 3\nn_samples = 20\n";

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ExperimentConfig::parse(BASE, "c.toml").unwrap();
        assert_eq!(cfg.cutoff, 4);
        assert_eq!(cfg.counting.shells, vec![4, 4, 4]);
        assert!(cfg.validate(Experiment::Sample, BASE, "c.toml").is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let raw = format!("{BASE}[evolve]\nrecord_evry = 3\n");
        let err = ExperimentConfig::parse(&raw, "c.toml").unwrap_err();
        assert_eq!(err.line, 9);
        assert!(err.message.contains("record_evry"));
    }

    #[test]
    fn bad_values_name_the_field() {
        let raw = BASE.replace("N = 4", "N = 6");
        let cfg = ExperimentConfig::parse(&raw, "c.toml").unwrap();
        let err = cfg.validate(Experiment::Sample, &raw, "c.toml").unwrap_err();
        assert_eq!((err.field.as_str(), err.line), ("N", 3));

        let raw = BASE.replace("s = 2.5", "s = 1.5");
        let cfg = ExperimentConfig::parse(&raw, "c.toml").unwrap();
        let err = cfg.validate(Experiment::Sample, &raw, "c.toml").unwrap_err();
        assert_eq!((err.field.as_str(), err.line), ("s", 1));
    }

    #[test]
    fn qi_test_needs_observables() {
        let raw = format!("{BASE}[qi_test]\nobservables = []\n");
        let cfg = ExperimentConfig::parse(&raw, "c.toml").unwrap();
        assert!(cfg.validate(Experiment::Sample, &raw, "c.toml").is_ok());
        let err = cfg.validate(Experiment::QiTest, &raw, "c.toml").unwrap_err();
        assert_eq!(err.field, "qi_test.observables");
        assert_eq!(err.line, 9);
    }

    #[test]
    fn observables_parse_from_inline_tables() {
        let raw = format!(
            "{BASE}[qi_test]\nobservables = [\n  {{ kind = \"cylinder\", modes = [{{ n1 = 1, n2 = 0 }}], map = \"tanh\", scale = 0.2 }},\n  {{ kind = \"norm-indicator\", sigma = 1.4, radius = 1.0 }},\n]\n"
        );
        let cfg = ExperimentConfig::parse(&raw, "c.toml").unwrap();
        assert_eq!(cfg.qi_test.observables.len(), 2);
        assert!(cfg.validate(Experiment::QiTest, &raw, "c.toml").is_ok());
    }

    #[test]
    fn locate_prefers_the_section() {
        let raw = "n_samples = 1\n[moments]\np = 2\n[qi_test]\n";
        assert_eq!(locate(raw, "moments.p"), 3);
        assert_eq!(locate(raw, "qi_test.observables"), 4);
        assert_eq!(locate(raw, "n_samples"), 1);
        assert_eq!(locate(raw, "missing"), 1);
    }
}
