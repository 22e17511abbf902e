//! Check reports and their JSON encoding.

use std::collections::BTreeMap;
use std::io;

use num_complex::Complex64;
use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// value ≤ tolerance
    Upper,
    /// value ≥ tolerance
    Lower,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Criterion {
    /// value/tolerance for upper bounds, tolerance/value for lower bounds;
    /// the criterion holds iff this is ≤ 1.
    pub fn normalized(&self) -> f64 {
        let r = match self.bound {
            Bound::Upper if self.value == 0.0 => 0.0,
            Bound::Upper => self.value / self.tolerance,
            Bound::Lower => self.tolerance / self.value,
        };
        if r.is_nan() {
            f64::INFINITY
        } else {
            r.max(0.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub error: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    /// Largest normalized criterion value (see [`Criterion::normalized`]).
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub skipped: usize,
    pub criteria: Vec<Criterion>,
    pub resolved_constants: BTreeMap<String, Complex64>,
    pub details: Vec<TrialRecord>,
}

#[derive(Default)]
pub struct ReportBuilder {
    trials: usize,
    skipped: usize,
    criteria: Vec<Criterion>,
    constants: BTreeMap<String, Complex64>,
    details: Vec<TrialRecord>,
}

impl ReportBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn upper(&mut self, name: &str, value: f64, tolerance: f64) {
        self.push(name, value, tolerance, Bound::Upper);
    }

    pub fn lower(&mut self, name: &str, value: f64, tolerance: f64) {
        self.push(name, value, tolerance, Bound::Lower);
    }

    fn push(&mut self, name: &str, value: f64, tolerance: f64, bound: Bound) {
        let passed = match bound {
            Bound::Upper => value <= tolerance,
            Bound::Lower => value >= tolerance,
        };
        self.criteria.push(Criterion { name: name.to_string(), value, tolerance, bound, passed });
    }

    pub fn constant(&mut self, name: &str, value: Complex64) {
        self.constants.insert(name.to_string(), value);
    }

    pub fn trial(&mut self, n: usize, trial: usize, error: f64) {
        self.trials += 1;
        self.details.push(TrialRecord { n, trial, error, note: None });
    }

    pub fn skip(&mut self, n: usize, trial: usize, why: String) {
        self.trials += 1;
        self.skipped += 1;
        self.details.push(TrialRecord { n, trial, error: f64::NAN, note: Some(why) });
    }

    pub fn finish(self, name: &str) -> CheckReport {
        let max_error = self.criteria.iter().map(Criterion::normalized).fold(0.0, f64::max);
        let passed = !self.criteria.is_empty() && self.criteria.iter().all(|c| c.passed);
        CheckReport {
            name: name.to_string(),
            trials: self.trials,
            max_error,
            tolerance: 1.0,
            passed: passed && max_error <= 1.0,
            skipped: self.skipped,
            criteria: self.criteria,
            resolved_constants: self.constants,
            details: self.details,
        }
    }
}

impl CheckReport {
    /// One line per criterion.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {} (trials {}, skipped {}, max_error {:.3e})\n",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.trials,
            self.skipped,
            self.max_error
        );
        for c in &self.criteria {
            let op = match c.bound {
                Bound::Upper => "<=",
                Bound::Lower => ">=",
            };
            s.push_str(&format!(
                "  [{}] {} = {:.3e} {} {:.1e}\n",
                if c.passed { "ok" } else { "!!" },
                c.name,
                c.value,
                op,
                c.tolerance
            ));
        }
        for (k, v) in &self.resolved_constants {
            s.push_str(&format!("  constant {k} = {:.10} {:+.10}i\n", v.re, v.im));
        }
        s
    }
}

/// Pretty JSON with every float written with 17 significant digits.
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}
