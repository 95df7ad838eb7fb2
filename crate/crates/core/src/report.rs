use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Outcome of one axiom or property check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub axiom: String,
    pub pass: bool,
    pub max_err: f64,
    /// Inputs that witness the outcome (the worst case, or the failing case).
    pub witness: Value,
    /// Truncation metadata: windows, caps, term counts, tail estimates.
    pub truncation: Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(axiom: impl Into<String>) -> Self {
        CheckReport {
            axiom: axiom.into(),
            pass: true,
            max_err: 0.0,
            witness: Value::Null,
            truncation: Value::Object(Default::default()),
            notes: Vec::new(),
        }
    }

    /// Records an error sample; the witness follows the worst sample.
    pub fn record(&mut self, err: f64, witness: impl FnOnce() -> Value) {
        if err > self.max_err || (self.witness.is_null() && err >= self.max_err) {
            self.max_err = self.max_err.max(err);
            self.witness = witness();
        }
    }

    /// Marks failure with the given witness, which replaces any earlier one.
    pub fn fail(&mut self, witness: Value) {
        if self.pass {
            self.witness = witness;
        }
        self.pass = false;
    }

    pub fn set_truncation(&mut self, key: &str, v: impl Serialize) {
        if let Value::Object(m) = &mut self.truncation {
            m.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Sets `pass` from the accumulated error and a tolerance, keeping any
    /// earlier explicit failure.
    pub fn finish(mut self, tol: f64) -> Self {
        if self.max_err > tol || self.max_err.is_nan() {
            self.pass = false;
        }
        self
    }
}
