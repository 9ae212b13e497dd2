//! Deterministic JSON run reports and CSV sample export.
//!
//! Reports are versioned (schema "1") and byte-stable: every floating value
//! is rounded to 12 significant digits before serialization and checks are
//! sorted by id, so identical configurations produce identical bytes.

use serde::Serialize;
use std::io::Write;

pub const SCHEMA_VERSION: &str = "1";

/// Rounds to 12 significant digits; the fixed precision of all serialized
/// floating values.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap()
}

/// One verification check: a measured value against a threshold, tagged with
/// a stable id and a short anchor describing which invariant it measures
/// ("plumbing" for artifact-level checks).
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: String,
    pub anchor: String,
    pub value: f64,
    /// Pass bound; informational entries carry `null`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub surface: String,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, surface: &str, seed: u64, samples: usize) -> Self {
        Report {
            schema: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            surface: surface.to_string(),
            seed,
            samples,
            checks: Vec::new(),
            passed: true,
        }
    }

    /// Adds a residual check: passes iff value <= threshold.
    pub fn check(&mut self, id: &str, anchor: &str, value: f64, threshold: f64) -> &mut Self {
        let passed = value.is_finite() && value <= threshold;
        self.checks.push(Check {
            id: id.to_string(),
            anchor: anchor.to_string(),
            value: round_sig(value),
            threshold: Some(round_sig(threshold)),
            passed,
            note: None,
        });
        self
    }

    /// Adds a boolean check.
    pub fn assert_true(&mut self, id: &str, anchor: &str, ok: bool, note: &str) -> &mut Self {
        self.checks.push(Check {
            id: id.to_string(),
            anchor: anchor.to_string(),
            value: if ok { 1.0 } else { 0.0 },
            threshold: None,
            passed: ok,
            note: Some(note.to_string()),
        });
        self
    }

    /// Records a measured value without pass/fail semantics.
    pub fn info(&mut self, id: &str, anchor: &str, value: f64, note: &str) -> &mut Self {
        self.checks.push(Check {
            id: id.to_string(),
            anchor: anchor.to_string(),
            value: round_sig(value),
            threshold: None,
            passed: true,
            note: Some(note.to_string()),
        });
        self
    }

    /// Sorts checks by id and folds the overall verdict.
    pub fn finalize(&mut self) {
        self.checks.sort_by(|a, b| a.id.cmp(&b.id));
        self.passed = self.checks.iter().all(|c| c.passed);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// One row of the sample-grid CSV export.
#[derive(Debug, Clone)]
pub struct CsvRow {
    pub s: f64,
    pub u: f64,
    pub v: f64,
    pub t: Vec<f64>,
    pub omega: f64,
    pub norm_sq: f64,
    pub rank: usize,
    pub singular: bool,
}

/// Writes the sample grid with the documented column order:
/// s, u, v, t1..t{n-2}, Omega, normSq, rank, singular.
pub fn write_csv<W: Write>(w: &mut W, n: usize, rows: &[CsvRow]) -> std::io::Result<()> {
    let tcols: Vec<String> = (1..=n - 2).map(|k| format!("t{k}")).collect();
    writeln!(w, "s,u,v,{},Omega,normSq,rank,singular", tcols.join(","))?;
    for r in rows {
        let t: Vec<String> = r.t.iter().map(|x| format!("{:.12e}", x)).collect();
        writeln!(
            w,
            "{:.12e},{:.12e},{:.12e},{},{:.12e},{:.12e},{},{}",
            r.s,
            r.u,
            r.v,
            t.join(","),
            r.omega,
            r.norm_sq,
            r.rank,
            r.singular as u8
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_stable() {
        #[allow(clippy::approx_constant)]
        let twelve_digit_pi = 3.14159265359;
        assert_eq!(round_sig(std::f64::consts::PI), twelve_digit_pi);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(-1.23456789012345e-7), -1.23456789012e-7);
        assert_eq!(round_sig(round_sig(1.0 / 3.0)), round_sig(1.0 / 3.0));
    }

    #[test]
    fn report_sorts_and_folds() {
        let mut r = Report::new("test", "none", 1, 0);
        r.check("b-second", "plumbing", 0.5, 1.0);
        r.check("a-first", "plumbing", 2.0, 1.0);
        r.finalize();
        assert_eq!(r.checks[0].id, "a-first");
        assert!(!r.passed);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn identical_reports_serialize_identically() {
        let build = || {
            let mut r = Report::new("test", "s", 7, 3);
            r.check("x", "anchor", 1.0f64 / 3.0, 1.0);
            r.info("y", "anchor", 2.0f64.sqrt(), "measured");
            r.finalize();
            r.to_json()
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn csv_column_order() {
        let rows = vec![CsvRow {
            s: 0.8,
            u: 0.1,
            v: 0.2,
            t: vec![0.6],
            omega: 1.0,
            norm_sq: 6.0,
            rank: 3,
            singular: false,
        }];
        let mut buf = Vec::new();
        write_csv(&mut buf, 3, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("s,u,v,t1,Omega,normSq,rank,singular\n"));
        assert!(text.lines().nth(1).unwrap().ends_with(",3,0"));
    }
}
