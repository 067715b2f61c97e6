use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dynamics::SchemeConstants;

/// One verified statement.
///
/// `lhs` is the computed quantity and `rhs` the bound or expected value it
/// is compared with. For aggregated checks over many random trials `lhs` is
/// the worst case and `trials` the number of instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    /// Short quotation of the statement being reproduced.
    pub anchor: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub trials: usize,
}

impl Check {
    /// `lhs ≤ rhs + tolerance`.
    pub fn at_most(id: impl Into<String>, anchor: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::build(id, anchor, lhs, rhs, tolerance, lhs <= rhs + tolerance)
    }

    /// `|lhs − rhs| ≤ tolerance`.
    pub fn close(id: impl Into<String>, anchor: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::build(id, anchor, lhs, rhs, tolerance, (lhs - rhs).abs() <= tolerance)
    }

    /// A yes/no property, recorded as `lhs = 1` for true against `rhs = 1`.
    pub fn holds(id: impl Into<String>, anchor: &str, ok: bool) -> Self {
        Self::build(id, anchor, if ok { 1.0 } else { 0.0 }, 1.0, 0.0, ok)
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    fn build(id: impl Into<String>, anchor: &str, lhs: f64, rhs: f64, tolerance: f64, pass: bool) -> Self {
        assert!(!anchor.is_empty(), "every check needs an anchor");
        Self { id: id.into(), anchor: anchor.to_owned(), lhs, rhs, tolerance, pass: pass && !lhs.is_nan(), trials: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<SchemeConstants>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Left out unless requested, so reports are reproducible byte for byte.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, seed: Option<u64>, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { suite: suite.into(), seed, checks, pass, constants: None, notes: Vec::new(), wall_time_s: None }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Fixed-width table for terminals.
    pub fn to_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.id.len()).max().unwrap_or(0).max(5);
        let mut s = String::new();
        let _ = writeln!(s, "suite {}{}", self.suite, self.seed.map_or(String::new(), |x| format!(" (seed {x})")));
        let _ = writeln!(s, "{:<width$}  {:>14}  {:>14}  {:>8}  {:>6}  result", "check", "lhs", "rhs", "tol", "trials");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<width$}  {:>14.8e}  {:>14.8e}  {:>8.1e}  {:>6}  {}",
                c.id,
                c.lhs,
                c.rhs,
                c.tolerance,
                c.trials,
                if c.pass { "ok" } else { "FAIL" }
            );
        }
        if let Some(k) = &self.constants {
            let _ = writeln!(
                s,
                "constants L={:.4} M={:.4} N={:.4} P={:.4} R={:.4} Q={:.4} m={:.4} C1={:.4} C2={:.4}",
                k.l, k.m_sup, k.n, k.p_mass, k.r, k.q, k.m, k.c1, k.c2
            );
        }
        for note in &self.notes {
            let _ = writeln!(s, "note: {note}");
        }
        let _ = writeln!(s, "{}", if self.pass { "PASS" } else { "FAIL" });
        s
    }
}
