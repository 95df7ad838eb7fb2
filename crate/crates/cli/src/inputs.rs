//! Reading states, expressions and geometry from files or inline text, and
//! seeded sampling of exact test data.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use voxfact::expression::Expression;
use voxfact::{Error, GradedVector, OpenSet, Preset, Result, Scalar};

/// Reads JSON from a file, or parses the argument itself when no such file
/// exists.
pub fn read_json(arg: &str) -> Result<Value> {
    let text = if Path::new(arg).is_file() { std::fs::read_to_string(arg)? } else { arg.to_string() };
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{arg}: line {} column {}: {e}", e.line(), e.column())))
}

fn state_from_value(v: &Value) -> Result<GradedVector> {
    match v {
        Value::String(s) => GradedVector::from_tokens(s),
        other => Ok(serde_json::from_value(other.clone())?),
    }
}

/// States from a JSON file or array, or inline as `;`-separated token lists
/// such as `"a-1; a-1 a-1"`.
pub fn read_states(preset: &Preset, arg: &str) -> Result<Vec<GradedVector>> {
    let trimmed = arg.trim_start();
    let states = if Path::new(arg).is_file() || trimmed.starts_with('[') {
        match read_json(arg)? {
            Value::Array(items) => items.iter().map(state_from_value).collect::<Result<Vec<_>>>()?,
            _ => return Err(Error::Config("states must be a JSON array".into())),
        }
    } else {
        arg.split(';').map(|s| GradedVector::from_tokens(s.trim())).collect::<Result<Vec<_>>>()?
    };
    for s in &states {
        preset.check_vector(s)?;
    }
    Ok(states)
}

/// A JSON array of expressions, or a single expression.
pub fn read_exprs(arg: &str) -> Result<Vec<Expression>> {
    match read_json(arg)? {
        Value::Array(items) => items.iter().map(Expression::from_json).collect(),
        v => Ok(vec![Expression::from_json(&v)?]),
    }
}

/// Named open sets, `{"U": {...}, "V": {...}}`; other keys are kept raw.
pub struct Geometry {
    pub sets: BTreeMap<String, OpenSet>,
    pub raw: Value,
}

impl Geometry {
    pub fn read(arg: &str) -> Result<Geometry> {
        let raw = read_json(arg)?;
        let obj = raw.as_object().ok_or_else(|| Error::Config("geometry must be a JSON object".into()))?;
        let mut sets = BTreeMap::new();
        for (k, v) in obj {
            if let Ok(s) = OpenSet::from_json(v) {
                sets.insert(k.clone(), s);
            }
        }
        Ok(Geometry { sets, raw })
    }

    pub fn set(&self, name: &str) -> Result<&OpenSet> {
        self.sets.get(name).ok_or_else(|| Error::Config(format!("geometry has no open set `{name}`")))
    }
}

/// Deterministic source of exact sample data.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// A rational `p/den` with `lo ≤ p/den ≤ hi`.
    pub fn rational(&mut self, lo: f64, hi: f64, den: i64) -> Scalar {
        let (a, b) = ((lo * den as f64).ceil() as i64, (hi * den as f64).floor() as i64);
        Scalar::from_ratio(self.rng.gen_range(a..=b), den)
    }

    /// A Gaussian rational with denominator `den` and modulus in `[lo, hi]`.
    pub fn point_in_band(&mut self, lo: f64, hi: f64, den: i64) -> Scalar {
        loop {
            let re = self.rational(-hi, hi, den);
            let im = self.rational(-hi, hi, den);
            let z = &re + &(&im * &Scalar::i());
            let m = z.abs();
            if m >= lo && m <= hi {
                return z;
            }
        }
    }

    /// A point within distance `r` of `c`.
    pub fn point_near(&mut self, c: &Scalar, r: f64, den: i64) -> Scalar {
        c + &self.point_in_band(0.0, r, den)
    }

    /// A nonzero Gaussian rational of moderate size.
    pub fn nonzero(&mut self, den: i64) -> Scalar {
        self.point_in_band(0.25, 2.0, den)
    }

    /// A basis state with degree in `lo..=hi`.
    pub fn basis_state(&mut self, preset: &Preset, lo: i64, hi: i64) -> Option<GradedVector> {
        let basis = preset.basis_up_to(lo, hi);
        if basis.is_empty() {
            return None;
        }
        let i = self.index(basis.len());
        Some(GradedVector::basis(basis[i].clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_states_and_determinism() {
        let p = Preset::heisenberg();
        let s = read_states(&p, "a-1; a-1 a-1; |0>").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[2], GradedVector::vacuum());
        let s2 = read_states(&p, r#"["a-1", "a-2"]"#).unwrap();
        assert_eq!(s2[1], GradedVector::from_tokens("a-2").unwrap());
        assert!(read_states(&p, "L-2").is_err());
        let (mut a, mut b) = (Sampler::new(7), Sampler::new(7));
        for _ in 0..10 {
            let z = a.point_in_band(1.0, 2.0, 8);
            assert_eq!(z, b.point_in_band(1.0, 2.0, 8));
            assert!(z.is_exact() && (1.0..=2.0).contains(&z.abs()));
        }
    }
}
