//! Machine-readable description of every report file.

use serde_json::{json, Value};

pub const SCHEMA_VERSION: &str = "nls-qi-report/1";

/// Non-finite floats are written as JSON `null`.
fn number() -> Value {
    json!({ "type": ["number", "null"] })
}

fn mc_report() -> Value {
    json!({
        "type": "object",
        "description": "One Monte-Carlo or deterministic check.",
        "required": ["name", "estimate", "stderr", "n_samples", "bound", "verdict", "details"],
        "additionalProperties": false,
        "properties": {
            "name": { "type": "string", "description": "experiment/check identifier" },
            "estimate": {
                "type": ["number", "null"],
                "description": "estimated quantity, in the units of the check"
            },
            "stderr": {
                "type": ["number", "null"],
                "minimum": 0,
                "description": "standard error of the estimate; 0 for deterministic checks"
            },
            "n_samples": { "type": "integer", "minimum": 0 },
            "bound": {
                "type": ["number", "null"],
                "description": "threshold or target the verdict compares against; null when none applies"
            },
            "verdict": {
                "enum": ["pass", "fail", "inconclusive"],
                "description": "pass: the check holds at its stated level; fail: it does not; \
                                inconclusive: too few effective samples to decide"
            },
            "details": {
                "type": "object",
                "description": "auxiliary named numbers (component estimates, thresholds, diagnostics)",
                "additionalProperties": number()
            }
        }
    })
}

fn report_document() -> Value {
    json!({
        "type": "object",
        "required": ["schema_version", "subcommand", "config", "passed", "reports"],
        "additionalProperties": false,
        "properties": {
            "schema_version": { "const": SCHEMA_VERSION },
            "subcommand": {
                "enum": ["sample", "evolve", "energy-audit", "counting", "qi-test", "moments"]
            },
            "config": { "$ref": "#/$defs/config" },
            "passed": { "type": "boolean", "description": "true when every report passes" },
            "reports": { "type": "array", "items": { "$ref": "#/$defs/mc_report" } }
        }
    })
}

fn config() -> Value {
    json!({
        "type": "object",
        "description": "echo of the configuration that produced the report",
        "required": ["s", "k", "N", "dt", "t", "seed", "n_samples"],
        "properties": {
            "s": { "type": "number", "exclusiveMinimum": 2 },
            "k": { "type": "integer", "minimum": 1 },
            "N": { "type": "integer", "minimum": 1, "description": "dyadic truncation" },
            "dt": { "type": "number", "exclusiveMinimum": 0 },
            "t": { "type": "number" },
            "seed": { "type": "integer", "minimum": 0 },
            "n_samples": { "type": "integer", "minimum": 2 },
            "sample": { "type": "object" },
            "evolve": { "type": "object" },
            "energy_audit": { "type": "object" },
            "counting": { "type": "object" },
            "qi_test": { "type": "object" },
            "moments": { "type": "object" }
        }
    })
}

fn manifest() -> Value {
    json!({
        "type": "object",
        "required": [
            "schema_version", "tool", "version", "subcommand", "config_path", "config",
            "seed_override", "workers", "timings", "files"
        ],
        "additionalProperties": false,
        "properties": {
            "schema_version": { "const": SCHEMA_VERSION },
            "tool": { "type": "string" },
            "version": { "type": "string" },
            "subcommand": { "type": "string" },
            "config_path": { "type": "string" },
            "config": { "$ref": "#/$defs/config" },
            "seed_override": { "type": ["integer", "null"] },
            "workers": { "type": "integer", "minimum": 1 },
            "timings": {
                "type": "object",
                "required": ["parse_seconds", "run_seconds", "write_seconds"],
                "additionalProperties": number(),
                "description": "wall-clock seconds"
            },
            "files": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "bytes", "sha256"],
                    "additionalProperties": false,
                    "properties": {
                        "name": { "type": "string" },
                        "bytes": { "type": "integer", "minimum": 0 },
                        "sha256": { "type": "string", "pattern": "^[0-9a-f]{64}$" }
                    }
                }
            }
        }
    })
}

/// CSV files and their columns, frozen for this schema version.
fn csv_columns() -> Value {
    json!({
        "samples.csv": ["index", "mass", "hs_norm", "fl_norm", "wiener_norm", "correction_s"],
        "evolve.csv": ["t", "mass", "hamiltonian", "hs_norm", "fl_norm"],
        "terms.csv": [
            "field", "l2s", "correction", "I", "II", "III", "IV", "V", "VI", "VII",
            "truncation", "q1", "q2", "term_sum"
        ],
        "residuals.csv": ["field", "dt_fd", "finite_difference", "analytic", "residual"],
        "counts.csv": ["n1", "n2", "n3", "m1", "m2", "sign1", "sign2", "sign3", "kappa", "count"],
        "exponent.csv": ["N", "sup_count"],
        "qi.csv": [
            "name", "estimate", "stderr", "pushforward_mean", "reweighted_mean",
            "effective_samples", "verdict"
        ],
        "tail.csv": ["N", "mean", "stderr", "n_inside"]
    })
}

/// The schema of `report.json`, with the manifest and shared definitions
/// under `$defs`.
pub fn schema() -> Value {
    let mut doc = report_document();
    let obj = doc.as_object_mut().expect("object");
    obj.insert("$schema".into(), json!("https://json-schema.org/draft/2020-12/schema"));
    obj.insert("$id".into(), json!(format!("urn:{SCHEMA_VERSION}")));
    obj.insert("title".into(), json!("nlsq report"));
    obj.insert("version".into(), json!(SCHEMA_VERSION));
    obj.insert(
        "$defs".into(),
        json!({
            "mc_report": mc_report(),
            "config": config(),
            "manifest": manifest(),
        }),
    );
    obj.insert(
        "x-units".into(),
        json!({
            "floats": "CSV floats carry 17 significant digits; JSON floats round-trip exactly",
            "time": "dimensionless flow time on the 2-torus of side 2π",
            "timings": "seconds"
        }),
    );
    obj.insert("x-csv-columns".into(), csv_columns());
    doc
}

/// Schema of `manifest.json`, sharing the definitions of [`schema`].
pub fn manifest_schema() -> Value {
    let full = schema();
    let mut m = full["$defs"]["manifest"].clone();
    let obj = m.as_object_mut().expect("object");
    obj.insert("$schema".into(), full["$schema"].clone());
    obj.insert("$defs".into(), full["$defs"].clone());
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_report_field_is_described() {
        let s = schema();
        let props = &s["$defs"]["mc_report"]["properties"];
        for field in ["name", "estimate", "stderr", "n_samples", "bound", "verdict", "details"] {
            assert!(props.get(field).is_some(), "missing {field}");
        }
        assert_eq!(s["version"], SCHEMA_VERSION);
    }
}
