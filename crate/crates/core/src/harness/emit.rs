//! Deterministic CSV and JSON output.
//!
//! Floats are written with 17 significant digits; JSON objects have sorted
//! keys. Wall-clock time is never written, so equal inputs give equal bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::experiment::{
    ExperimentSummary, ReplicationRow, COVERAGE_RANGE, ETA_RATIO_RANGE, KS_MAX, LLN_RATIO_HIGH, LLN_RATIO_LOW,
};

pub const CSV_HEADER: &str = "rep,n,S_n,eta_hat_sq,t_stat,ci_low,ci_high,diag_max,diag_sumsq,diag_buffer";
pub const CSV_FILE: &str = "replications.csv";
pub const JSON_FILE: &str = "summary.json";

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct EmitError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn csv_row(r: &ReplicationRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.rep,
        r.n,
        format_float(r.s_n),
        opt(r.eta_hat_sq),
        opt(r.t_stat),
        opt(r.ci_low),
        opt(r.ci_high),
        opt(r.diag_max),
        opt(r.diag_sumsq),
        opt(r.diag_buffer),
    )
}

pub fn replications_csv(rows: &[ReplicationRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

pub fn summary_value(s: &ExperimentSummary) -> Value {
    json!({
        "experiment": to(&s.kind),
        "config": to(&s.config),
        "sizes": to(&s.sizes),
        "checks": to(&s.checks),
        "trends": to(&s.trends),
        "pass": s.pass,
        "seeds": {
            "replications": s.config.seed,
            "mu_oracle": s.config.seed,
            "streams": "replication r uses key (seed, REPLICATION, r); the mean oracle uses (seed, MU_ORACLE)",
        },
        "thresholds": {
            "lln_ratio_band": [LLN_RATIO_LOW, LLN_RATIO_HIGH],
            "ks_max": KS_MAX,
            "coverage_range": [COVERAGE_RANGE.0, COVERAGE_RANGE.1],
            "eta_ratio_range": [ETA_RATIO_RANGE.0, ETA_RATIO_RANGE.1],
        },
        "notes": {
            "ci_target": "average mean n^-1 sum mu_i",
            "normal_cdf": "Abramowitz-Stegun 26.2.17, abs error < 7.5e-8",
            "lln_ratio_band": "last/first median ratio scaled by sqrt(n_last/n_first)",
            "trends": "reported only; not part of pass",
        },
    })
}

fn to<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("summary types serialize")
}

/// Pretty JSON with sorted keys and `{:.16e}` floats.
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(x) => {
            if let Some(u) = x.as_u64() {
                write!(out, "{u}").unwrap();
            } else if let Some(i) = x.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                out.push_str(&format_float(x.as_f64().expect("finite")));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, item, depth + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) => write_object(out, map, depth),
    }
}

fn write_object(out: &mut String, map: &Map<String, Value>, depth: usize) {
    if map.is_empty() {
        out.push_str("{}");
        return;
    }
    let mut keys: Vec<&String> = map.keys().collect();
    keys.sort();
    out.push_str("{\n");
    for (k, key) in keys.iter().enumerate() {
        out.extend(std::iter::repeat_n("  ", depth + 1));
        out.push_str(&Value::String((*key).clone()).to_string());
        out.push_str(": ");
        write_value(out, &map[*key], depth + 1);
        out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
    }
    out.extend(std::iter::repeat_n("  ", depth));
    out.push('}');
}

fn write_file(path: &Path, contents: &str) -> Result<(), EmitError> {
    std::fs::write(path, contents).map_err(|e| EmitError {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Writes `replications.csv` and `summary.json` into `dir`, creating it if needed.
pub fn emit(s: &ExperimentSummary, dir: &Path) -> Result<(PathBuf, PathBuf), EmitError> {
    std::fs::create_dir_all(dir).map_err(|e| EmitError {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let csv = dir.join(CSV_FILE);
    let json = dir.join(JSON_FILE);
    write_file(&csv, &replications_csv(&s.rows))?;
    write_file(&json, &to_json_string(&summary_value(s)))?;
    Ok((csv, json))
}
