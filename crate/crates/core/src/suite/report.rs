//! Check records and reports with a stable JSON layout.

use crate::error::{HktError, Result};
use crate::invariant::Exact;
use crate::residual::Residual;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Holds,
    Fails,
}

/// How the residual is compared with the tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    /// Holds when `residual < tolerance`.
    Below,
    /// Holds when `residual > tolerance`.
    Above,
    /// Holds when the residual is exactly zero.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    Point(Vec<f64>),
    Basis(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// Decimal string; exact checks carry `"0"` or an exact value.
    pub residual: String,
    pub bound: Bound,
    pub tolerance: String,
    pub exact: bool,
    pub expected: Expectation,
    pub holds: bool,
    pub pass: bool,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// Shortest round-trip decimal form.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:e}")
    }
}

fn parse_value(s: &str) -> Option<f64> {
    if s == "NaN" {
        return Some(f64::NAN);
    }
    s.parse().ok().or_else(|| {
        // exact residuals such as `3/2` or `2√3`
        let (a, b) = s.split_once('/')?;
        Some(a.parse::<f64>().ok()? / b.parse::<f64>().ok()?)
    })
}

impl CheckRecord {
    fn make(name: &str, residual: String, bound: Bound, tolerance: String, exact: bool, holds: bool) -> Self {
        CheckRecord {
            name: name.to_string(),
            residual,
            bound,
            tolerance,
            exact,
            expected: Expectation::Holds,
            holds,
            pass: holds,
            samples: 0,
            witness: None,
        }
    }

    /// Numerical residual that must stay below `tol`. `NaN` never holds.
    pub fn below(name: &str, r: &Residual, tol: f64) -> Self {
        let mut c = Self::make(
            name,
            format_value(r.value),
            Bound::Below,
            format_value(tol),
            false,
            r.value < tol,
        );
        c.samples = r.samples;
        c.witness = r.witness.clone().map(Witness::Point);
        c
    }

    /// Numerical quantity that must exceed `threshold`.
    pub fn above(name: &str, value: f64, witness: Option<Vec<f64>>, samples: usize, threshold: f64) -> Self {
        let mut c = Self::make(
            name,
            format_value(value),
            Bound::Above,
            format_value(threshold),
            false,
            value > threshold,
        );
        c.samples = samples;
        c.witness = witness.map(Witness::Point);
        c
    }

    /// Exact residual, holding iff it is zero.
    pub fn exact(name: &str, residual: &Exact, witness: Option<Vec<usize>>) -> Self {
        let mut c = Self::make(
            name,
            residual.to_string(),
            Bound::Exact,
            "0".into(),
            true,
            residual.is_zero(),
        );
        c.witness = witness.map(Witness::Basis);
        c
    }

    /// A yes/no outcome of a numerical procedure, recorded as `0` or `1`.
    pub fn flag(name: &str, ok: bool, witness: Option<Vec<f64>>) -> Self {
        let mut c = Self::make(
            name,
            if ok { "0" } else { "1" }.into(),
            Bound::Exact,
            "0".into(),
            false,
            ok,
        );
        c.witness = witness.map(Witness::Point);
        c
    }

    pub fn expecting(mut self, e: Expectation) -> Self {
        self.expected = e;
        self.pass = self.holds == (e == Expectation::Holds);
        self
    }

    pub fn residual_value(&self) -> f64 {
        parse_value(&self.residual).unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub seed: Option<u64>,
    pub samples: usize,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub example: String,
    pub description: String,
    pub parameters: BTreeMap<String, String>,
    pub conventions: BTreeMap<String, String>,
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
    pub environment: Environment,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

/// Conventions every report states in its header.
pub fn conventions() -> BTreeMap<String, String> {
    [
        (
            "forms",
            "components are tensor values; (a^b)(X,Y) = (a(X)b(Y) - b(X)a(Y))/2; F(X,Y) = g(JX,Y)",
        ),
        (
            "form-inner-product",
            "g(a,b) = 1/4 sum over all i,j,k,l of g^ik g^jl a_ij b_kl, so |F|^2 = dim/4",
        ),
        ("j-action", "(Jw)(X1..Xk) = (-1)^k w(JX1..JXk); d^c = (-1)^k J d J"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

impl CheckReport {
    pub fn new(example: &str, description: &str, seed: Option<u64>, samples: usize) -> Self {
        CheckReport {
            example: example.to_string(),
            description: description.to_string(),
            parameters: BTreeMap::new(),
            conventions: conventions(),
            notes: BTreeMap::new(),
            environment: Environment {
                seed,
                samples,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn parameter(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.insert(key.to_string(), value.to_string());
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.checks.push(check);
    }

    /// Sorts the checks by name and sets the overall verdict.
    pub fn finish(mut self) -> Self {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        self.pass = self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HktError::Config(format!("report JSON: {e}")))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{} [{verdict}] {}", self.example, self.description);
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "  {k} = {v}");
        }
        for c in &self.checks {
            let mark = if c.pass { "ok  " } else { "FAIL" };
            let rel = match c.bound {
                Bound::Below => "<",
                Bound::Above => ">",
                Bound::Exact => "==",
            };
            let expect = match c.expected {
                Expectation::Holds => "",
                Expectation::Fails => " (expected to fail)",
            };
            let _ = writeln!(
                out,
                "  {mark} {:<32} {} {rel} {}{expect}",
                c.name, c.residual, c.tolerance
            );
        }
        for (k, v) in &self.notes {
            let _ = writeln!(out, "  note {k}: {v}");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub parameters: BTreeMap<String, String>,
    pub report: CheckReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub name: String,
    pub bound: Bound,
    pub max_residual: String,
    /// The worst case of `above` checks.
    pub min_residual: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub example: String,
    pub grid: Vec<SweepPoint>,
    pub summary: Vec<SummaryEntry>,
    pub pass: bool,
}

impl SweepReport {
    pub fn new(example: &str, grid: Vec<SweepPoint>) -> Self {
        let mut summary: BTreeMap<String, SummaryEntry> = BTreeMap::new();
        let mut extremes: BTreeMap<String, (f64, f64)> = BTreeMap::new();
        for point in &grid {
            for c in &point.report.checks {
                let v = c.residual_value();
                let e = summary.entry(c.name.clone()).or_insert_with(|| SummaryEntry {
                    name: c.name.clone(),
                    bound: c.bound,
                    max_residual: c.residual.clone(),
                    min_residual: c.residual.clone(),
                    pass: true,
                });
                let (max, min) = extremes.entry(c.name.clone()).or_insert((v, v));
                if v > *max || v.is_nan() && !max.is_nan() {
                    *max = v;
                    e.max_residual = c.residual.clone();
                }
                if v < *min || v.is_nan() && !min.is_nan() {
                    *min = v;
                    e.min_residual = c.residual.clone();
                }
                e.pass &= c.pass;
            }
        }
        let summary: Vec<SummaryEntry> = summary.into_values().collect();
        let pass = grid.iter().all(|p| p.report.pass);
        SweepReport {
            example: example.to_string(),
            grid,
            summary,
            pass,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "sweep {} over {} points [{verdict}]",
            self.example,
            self.grid.len()
        );
        for p in &self.grid {
            let params: Vec<String> = p.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let v = if p.report.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "  [{v}] {}", params.join(" "));
        }
        for s in &self.summary {
            let mark = if s.pass { "ok  " } else { "FAIL" };
            let (which, value) = match s.bound {
                Bound::Above => ("min", &s.min_residual),
                _ => ("max", &s.max_residual),
            };
            let _ = writeln!(out, "  {mark} {which} {:<34} {value}", s.name);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_expectation_flips_pass() {
        let r = Residual::at(0.5, &[1.0]);
        let c = CheckRecord::below("x", &r, 1e-3);
        assert!(!c.holds && !c.pass);
        let c = c.expecting(Expectation::Fails);
        assert!(c.pass);
    }

    #[test]
    fn nan_never_holds() {
        let r = Residual::at(f64::NAN, &[0.0]);
        assert!(!CheckRecord::below("x", &r, 1.0).holds);
        assert!(!CheckRecord::above("y", f64::NAN, None, 1, 0.0).holds);
    }

    #[test]
    fn exact_residual_strings() {
        let c = CheckRecord::exact("e", &Exact::ratio(3, 2), Some(vec![0, 1]));
        assert_eq!(c.residual, "3/2");
        assert!(!c.holds);
        assert_eq!(c.residual_value(), 1.5);
        assert_eq!(CheckRecord::exact("z", &Exact::zero(), None).residual, "0");
    }

    #[test]
    fn json_round_trip() {
        let mut rep = CheckReport::new("demo", "d", Some(7), 3);
        rep.parameter("n", 2);
        rep.push(CheckRecord::below("b", &Residual::at(1.0 / 3.0, &[0.1, 0.2]), 1e-8));
        rep.push(CheckRecord::exact("a", &Exact::zero(), None));
        let rep = rep.finish();
        assert_eq!(rep.checks[0].name, "a");
        assert!(!rep.pass);
        let back = CheckReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
        assert_eq!(back.checks[1].residual_value(), 1.0 / 3.0);
    }

    #[test]
    fn sweep_summary_dominates() {
        let mk = |v: f64| {
            let mut r = CheckReport::new("s", "", Some(1), 1);
            r.push(CheckRecord::below("c", &Residual::at(v, &[0.0]), 1.0));
            r.push(CheckRecord::above("d", v, None, 1, 0.0));
            SweepPoint {
                parameters: BTreeMap::new(),
                report: r.finish(),
            }
        };
        let s = SweepReport::new("s", vec![mk(0.25), mk(0.5), mk(0.125)]);
        let max = parse_value(&s.summary[0].max_residual).unwrap();
        assert!(s.grid.iter().all(|p| p.report.checks[0].residual_value() <= max));
        assert_eq!(s.summary[1].bound, Bound::Above);
        assert_eq!(parse_value(&s.summary[1].min_residual), Some(0.125));
        assert!(s.pass);
    }
}
