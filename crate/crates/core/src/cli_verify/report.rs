//! The machine-readable report and its byte-stable JSON rendering.

use serde::Serialize;
use serde_json::Value;

use super::config::RunConfig;

pub const SCHEMA_VERSION: &str = "hkqk-report/1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub suite: String,
    /// `"below"` or `"above"`.
    pub mode: String,
    pub n_points: usize,
    /// Largest residual for `below`, smallest value for `above`; null when
    /// a point failed to evaluate.
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub failures: usize,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub all_pass: bool,
    pub cases: usize,
    pub points_per_case: usize,
    pub max_condition_number: f64,
    /// How `g′` and the closed form are compared.
    pub fs_factor: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema_version: String,
    pub fixture: String,
    pub config: RunConfig,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.summary.all_pass
    }

    /// JSON with every float written to 17 significant digits.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serialises");
        let mut out = String::new();
        write_value(&v, 0, &mut out);
        out.push('\n');
        out
    }

    /// One human-readable line per check.
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {:<28} worst {:>24} tol {:e} ({} points)",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.id,
                    if c.max_residual.is_finite() {
                        format!("{:.6e}", c.max_residual)
                    } else {
                        "error".to_string()
                    },
                    c.tolerance,
                    c.n_points
                )
            })
            .collect()
    }
}

pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&format_f64(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push_str(": ");
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_f64(f64::INFINITY), "null");
        let back: f64 = format_f64(1.0 / 3.0).parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }

    #[test]
    fn rendering_is_valid_json() {
        let v = serde_json::json!({"a": [1.5, 2, {"b": null, "c": "x\"y"}], "d": [], "e": true});
        let mut s = String::new();
        write_value(&v, 0, &mut s);
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
