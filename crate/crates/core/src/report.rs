//! Verification report: one record per checked estimate, each carrying the
//! anchor tag of the estimate it exercises, the measured and bound values,
//! the calibration constant and a pass flag. Serialisation is byte-stable
//! for identical inputs.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// Tag of the estimate this check exercises (label-style identifier).
    pub anchor: String,
    /// Measured left-hand side.
    pub lhs: f64,
    /// Bound (right-hand side, tolerance already folded in where stated).
    pub rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Inequality check `lhs <= rhs * (1 + slack)`.
    pub fn bound(name: &str, anchor: &str, lhs: f64, rhs: f64, slack: f64) -> CheckRecord {
        CheckRecord {
            name: name.to_string(),
            anchor: anchor.to_string(),
            lhs: cap(lhs),
            rhs: cap(rhs),
            constant: None,
            tolerance: slack,
            pass: lhs <= rhs * (1.0 + slack) + f64::MIN_POSITIVE,
        }
    }

    /// Equality-style check `|lhs - rhs| <= tol * max(|rhs|, floor)`.
    pub fn close(name: &str, anchor: &str, lhs: f64, rhs: f64, tol: f64) -> CheckRecord {
        CheckRecord {
            name: name.to_string(),
            anchor: anchor.to_string(),
            lhs: cap(lhs),
            rhs: cap(rhs),
            constant: None,
            tolerance: tol,
            pass: (lhs - rhs).abs() <= tol * rhs.abs().max(1e-30),
        }
    }

    /// Absolute smallness check `lhs <= tol`.
    pub fn small(name: &str, anchor: &str, lhs: f64, tol: f64) -> CheckRecord {
        CheckRecord {
            name: name.to_string(),
            anchor: anchor.to_string(),
            lhs: cap(lhs),
            rhs: tol,
            constant: None,
            tolerance: tol,
            pass: lhs <= tol,
        }
    }

    pub fn with_constant(mut self, c: f64) -> CheckRecord {
        self.constant = Some(cap(c));
        self
    }
}

/// JSON cannot carry non-finite numbers; clamp them into range.
fn cap(v: f64) -> f64 {
    if v.is_nan() {
        return -1.0;
    }
    v.clamp(-f64::MAX, f64::MAX)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Environment {
    pub d: usize,
    pub n: usize,
    pub l: f64,
    pub seed: u64,
    pub dt: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub experiment: String,
    pub environment: Environment,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(experiment: &str, env: Environment) -> Self {
        VerificationReport {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            environment: env,
            checks: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{}: {} (lhs = {:.6e}, rhs = {:.6e}{})\n",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.lhs,
                c.rhs,
                c.constant
                    .map(|v| format!(", C = {v:.4}"))
                    .unwrap_or_default()
            ));
        }
        out
    }
}

/// Serialise with stable key order; refuse records without an anchor.
pub fn emit_report(report: &VerificationReport, path: &Path) -> Result<()> {
    for c in &report.checks {
        if c.anchor.trim().is_empty() {
            return Err(Error::config(format!(
                "check `{}` lacks an anchor tag",
                c.name
            )));
        }
    }
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::config(format!("serialisation failed: {e}")))?;
    std::fs::write(path, json.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_report(path: &Path) -> Result<VerificationReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.display().to_string(),
        reason: format!("{e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> Environment {
        Environment {
            d: 2,
            n: 64,
            l: 6.28,
            seed: 1,
            dt: 1e-3,
        }
    }

    #[test]
    fn empty_report_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("verification.json");
        let rep = VerificationReport::new("toolbox", env());
        emit_report(&rep, &path).unwrap();
        let back = load_report(&path).unwrap();
        assert!(back.checks.is_empty());
        assert!(back.all_pass());
    }

    #[test]
    fn identical_reports_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let mut rep = VerificationReport::new("decay", env());
        rep.checks
            .push(CheckRecord::bound("x", "energy-estimate", 1.0, 2.0, 0.01));
        let p1 = dir.path().join("a.json");
        let p2 = dir.path().join("b.json");
        emit_report(&rep, &p1).unwrap();
        emit_report(&rep, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn missing_anchor_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut rep = VerificationReport::new("decay", env());
        rep.checks.push(CheckRecord::bound("x", "", 1.0, 2.0, 0.0));
        assert!(emit_report(&rep, &dir.path().join("v.json")).is_err());
    }

    #[test]
    fn failing_check_flagged() {
        let rec = CheckRecord::bound("x", "a", 3.0, 2.0, 0.01);
        assert!(!rec.pass);
        let rec = CheckRecord::small("y", "a", 1e-12, 1e-10);
        assert!(rec.pass);
    }

    #[test]
    fn infinite_values_are_capped() {
        let rec = CheckRecord::bound("x", "a", 1.0, f64::INFINITY, 0.0);
        assert!(rec.pass);
        assert!(rec.rhs.is_finite());
        serde_json::to_string(&rec).unwrap();
    }
}
