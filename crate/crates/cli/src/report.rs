use dqs_core::verify::CheckReport;
use serde_json::{json, Map, Value};

use crate::config::Settings;

pub const VERSION: &str = concat!("dqs ", env!("CARGO_PKG_VERSION"));

pub fn real(x: f64) -> String {
    format!("{x:.6e}")
}

fn check_json(c: &CheckReport) -> Value {
    let mut m = Map::new();
    m.insert("check_id".into(), json!(c.check_id));
    m.insert("params".into(), json!(c.params));
    m.insert("status".into(), json!(c.status.to_string()));
    if let Some(r) = c.residual {
        m.insert("residual".into(), json!(real(r)));
    }
    if let Some(b) = c.budget {
        m.insert("budget".into(), json!(real(b)));
    }
    if let Some((lo, hi)) = c.window {
        m.insert("window".into(), json!([lo, hi]));
    }
    if let Some(w) = &c.witness {
        m.insert("witness".into(), json!(w));
    }
    m.insert("elapsed_ms".into(), json!(c.elapsed.as_millis() as u64));
    Value::Object(m)
}

/// Wraps a payload with the version string and the effective config.
pub fn envelope(settings: &Settings, key: &str, payload: Value) -> Value {
    let mut m = Map::new();
    m.insert("version".into(), json!(VERSION));
    m.insert("config".into(), json!(settings.as_map()));
    m.insert(key.into(), payload);
    Value::Object(m)
}

pub fn checks_json(settings: &Settings, checks: &[CheckReport]) -> Value {
    envelope(settings, "checks", Value::Array(checks.iter().map(check_json).collect()))
}

/// Canonical text: sorted keys, two-space indent, trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

/// Left-aligned fixed-width columns.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ");
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(header.to_vec());
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

pub fn checks_table(checks: &[CheckReport]) -> String {
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.status.to_string().to_uppercase(),
                c.check_id.clone(),
                c.window.map(|(lo, hi)| format!("[{lo}, {hi}]")).unwrap_or_else(|| "-".into()),
                c.residual.map(real).unwrap_or_else(|| "-".into()),
                c.budget.map(real).unwrap_or_else(|| "-".into()),
                format!("{}", c.elapsed.as_millis()),
                c.witness.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let passed = checks.iter().filter(|c| c.passed()).count();
    let mut out = table(&["status", "check_id", "window", "residual", "budget", "ms", "witness"], &rows);
    out.push_str(&format!("{passed}/{} checks passed\n", checks.len()));
    out
}
