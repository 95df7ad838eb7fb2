//! Open subsets of `ℂ`: round discs, annuli with closed holes, the whole
//! plane, and finite disjoint unions of these. All containment and
//! disjointness tests are exact for exact parameters; radii are kept as
//! squares so affine images stay exact.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::residue::Support;
use crate::scalar::{cmp_sqrt_sums, format_rational, parse_rational, Real, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum OpenSet {
    /// `{ |z − center| < r }`
    Disc { center: Scalar, r2: Real },
    /// `{ inner < |z − center| < outer }`
    Annulus { center: Scalar, inner2: Real, outer2: Real },
    AllOfC,
    /// Pairwise disjoint members.
    Union(Vec<OpenSet>),
}

fn zero() -> Real {
    Real::from_ratio(0, 1)
}

fn radius_sq(r: &Scalar) -> Result<Real> {
    let c = r.to_c64();
    if c.im != 0.0 || c.re <= 0.0 {
        return Err(Error::InvalidSupport(format!("radius {r} must be real and positive")));
    }
    Ok(r.norm_sqr())
}

/// `√a + √b ≤ √c + √d`
fn sum_le(a: &Real, b: &Real, c: &Real, d: &Real) -> bool {
    cmp_sqrt_sums([a, b], [c, d]) != Ordering::Greater
}

/// `√a + √b < √c + √d`
fn sum_lt(a: &Real, b: &Real, c: &Real, d: &Real) -> bool {
    cmp_sqrt_sums([a, b], [c, d]) == Ordering::Less
}

/// A connected piece: a disc is an annulus without hole.
struct Round<'a> {
    c: &'a Scalar,
    hole: Option<&'a Real>,
    outer: &'a Real,
}

impl OpenSet {
    pub fn disc(center: Scalar, radius: &Scalar) -> Result<Self> {
        Ok(OpenSet::Disc { center, r2: radius_sq(radius)? })
    }

    pub fn annulus(center: Scalar, inner: &Scalar, outer: &Scalar) -> Result<Self> {
        let inner2 = radius_sq(inner)?;
        let outer2 = radius_sq(outer)?;
        if inner2.cmp_real(&outer2) != Ordering::Less {
            return Err(Error::InvalidSupport("annulus needs inner < outer".into()));
        }
        Ok(OpenSet::Annulus { center, inner2, outer2 })
    }

    /// A union of pairwise disjoint open sets; nested unions are flattened.
    pub fn union(members: Vec<OpenSet>) -> Result<Self> {
        let mut flat = Vec::new();
        for m in members {
            match m {
                OpenSet::Union(v) => flat.extend(v),
                other => flat.push(other),
            }
        }
        for i in 0..flat.len() {
            for j in i + 1..flat.len() {
                if !flat[i].is_disjoint(&flat[j]) {
                    return Err(Error::NotDisjoint);
                }
            }
        }
        Ok(OpenSet::Union(flat))
    }

    fn round(&self) -> Option<Round<'_>> {
        match self {
            OpenSet::Disc { center, r2 } => Some(Round { c: center, hole: None, outer: r2 }),
            OpenSet::Annulus { center, inner2, outer2 } => Some(Round { c: center, hole: Some(inner2), outer: outer2 }),
            _ => None,
        }
    }

    pub fn contains_point(&self, p: &Scalar) -> bool {
        match self {
            OpenSet::AllOfC => true,
            OpenSet::Union(v) => v.iter().any(|m| m.contains_point(p)),
            _ => {
                let r = self.round().unwrap();
                let d2 = (p - r.c).norm_sqr();
                d2.cmp_real(r.outer) == Ordering::Less && r.hole.is_none_or(|h| d2.cmp_real(h) == Ordering::Greater)
            }
        }
    }

    /// Whether the circle `|z − c| = r` (given `r²`) lies in the set.
    pub fn contains_circle(&self, c: &Scalar, r2: &Real) -> bool {
        match self {
            OpenSet::AllOfC => true,
            OpenSet::Union(v) => v.iter().any(|m| m.contains_circle(c, r2)),
            _ => {
                let r = self.round().unwrap();
                let d2 = (c - r.c).norm_sqr();
                let z = zero();
                if !sum_lt(&d2, r2, r.outer, &z) {
                    return false;
                }
                match r.hole {
                    None => true,
                    // circle encloses the closed hole, or misses it
                    Some(h) => sum_lt(&d2, h, r2, &z) || sum_lt(h, r2, &d2, &z),
                }
            }
        }
    }

    pub fn contains_support(&self, s: &Support) -> bool {
        match s {
            Support::Point(p) => self.contains_point(p),
            Support::Circle(c, r2) => self.contains_circle(c, r2),
        }
    }

    /// Exact test of `self ⊆ other`.
    pub fn is_subset(&self, other: &OpenSet) -> bool {
        match (self, other) {
            (_, OpenSet::AllOfC) => true,
            (OpenSet::Union(v), _) => v.iter().all(|m| m.is_subset(other)),
            (OpenSet::AllOfC, OpenSet::Union(v)) => v.iter().any(|m| matches!(m, OpenSet::AllOfC)),
            (OpenSet::AllOfC, _) => false,
            // connected pieces sit inside a single member
            (_, OpenSet::Union(v)) => v.iter().any(|m| self.is_subset(m)),
            _ => {
                let (a, b) = (self.round().unwrap(), other.round().unwrap());
                let d2 = (a.c - b.c).norm_sqr();
                let z = zero();
                if !sum_le(&d2, a.outer, b.outer, &z) {
                    return false;
                }
                let Some(bh) = b.hole else { return true };
                // the closed hole of `b` must avoid `a`
                match a.hole {
                    Some(ah) => sum_le(&d2, bh, ah, &z) || sum_le(a.outer, bh, &d2, &z),
                    None => sum_le(a.outer, bh, &d2, &z),
                }
            }
        }
    }

    /// Exact test of `self ∩ other = ∅`.
    pub fn is_disjoint(&self, other: &OpenSet) -> bool {
        match (self, other) {
            (OpenSet::Union(v), _) => v.iter().all(|m| m.is_disjoint(other)),
            (_, OpenSet::Union(v)) => v.iter().all(|m| self.is_disjoint(m)),
            (OpenSet::AllOfC, _) | (_, OpenSet::AllOfC) => false,
            _ => {
                let (a, b) = (self.round().unwrap(), other.round().unwrap());
                let d2 = (a.c - b.c).norm_sqr();
                let z = zero();
                // outer discs apart
                if sum_le(a.outer, b.outer, &d2, &z) {
                    return true;
                }
                // one piece inside the other's closed hole
                let inside_hole = |x: &Round, y: &Round| y.hole.is_some_and(|h| sum_le(&d2, x.outer, h, &z));
                inside_hole(&a, &b) || inside_hole(&b, &a)
            }
        }
    }

    /// Image under `z ↦ λz + w`.
    pub fn affine_image(&self, lambda: &Scalar, w: &Scalar) -> Result<OpenSet> {
        if lambda.is_zero() {
            return Err(Error::ZeroDilation);
        }
        let s = lambda.norm_sqr();
        Ok(match self {
            OpenSet::Disc { center, r2 } => OpenSet::Disc { center: &(lambda * center) + w, r2: r2.mul(&s) },
            OpenSet::Annulus { center, inner2, outer2 } => OpenSet::Annulus {
                center: &(lambda * center) + w,
                inner2: inner2.mul(&s),
                outer2: outer2.mul(&s),
            },
            OpenSet::AllOfC => OpenSet::AllOfC,
            OpenSet::Union(v) => OpenSet::Union(v.iter().map(|m| m.affine_image(lambda, w)).collect::<Result<_>>()?),
        })
    }

    /// `Some((center, r²))` for a disc.
    pub fn as_disc(&self) -> Option<(&Scalar, &Real)> {
        match self {
            OpenSet::Disc { center, r2 } => Some((center, r2)),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        fn radius(key: &str, r2: &Real) -> (String, Value) {
            match (r2.exact_sqrt(), r2) {
                (Some(r), _) => (key.to_string(), Value::String(format_rational(&r))),
                (None, Real::Exact(q)) => (format!("{key}2"), Value::String(format_rational(q))),
                (None, Real::Approx(v)) => (key.to_string(), json!(v.sqrt())),
            }
        }
        match self {
            OpenSet::Disc { center, r2 } => {
                let (k, v) = radius("radius", r2);
                json!({"disc": {"center": center.to_string(), k: v}})
            }
            OpenSet::Annulus { center, inner2, outer2 } => {
                let (ki, vi) = radius("inner", inner2);
                let (ko, vo) = radius("outer", outer2);
                json!({"annulus": {"center": center.to_string(), ki: vi, ko: vo}})
            }
            OpenSet::AllOfC => json!("all"),
            OpenSet::Union(v) => json!({"union": v.iter().map(OpenSet::to_json).collect::<Vec<_>>()}),
        }
    }

    pub fn from_json(v: &Value) -> Result<OpenSet> {
        fn scalar(v: Option<&Value>, what: &str) -> Result<Scalar> {
            match v {
                Some(Value::String(s)) => s.parse(),
                Some(Value::Number(n)) => Ok(Scalar::approx(n.as_f64().unwrap_or(f64::NAN), 0.0)),
                _ => Err(Error::Parse(format!("open set needs `{what}`"))),
            }
        }
        fn radius(m: &Value, key: &str) -> Result<Real> {
            if let Some(v) = m.get(format!("{key}2")) {
                let r2 = match v {
                    Value::String(s) => Real::Exact(parse_rational(s)?),
                    Value::Number(n) => Real::Approx(n.as_f64().unwrap_or(f64::NAN)),
                    _ => return Err(Error::Parse(format!("bad `{key}2`"))),
                };
                if r2.to_f64() <= 0.0 {
                    return Err(Error::InvalidSupport(format!("`{key}` must be positive")));
                }
                return Ok(r2);
            }
            radius_sq(&scalar(m.get(key), key)?)
        }
        if v.as_str() == Some("all") {
            return Ok(OpenSet::AllOfC);
        }
        if let Some(d) = v.get("disc") {
            return Ok(OpenSet::Disc { center: scalar(d.get("center"), "center")?, r2: radius(d, "radius")? });
        }
        if let Some(a) = v.get("annulus") {
            let (inner2, outer2) = (radius(a, "inner")?, radius(a, "outer")?);
            if inner2.cmp_real(&outer2) != Ordering::Less {
                return Err(Error::InvalidSupport("annulus needs inner < outer".into()));
            }
            return Ok(OpenSet::Annulus { center: scalar(a.get("center"), "center")?, inner2, outer2 });
        }
        if let Some(u) = v.get("union").and_then(Value::as_array) {
            return OpenSet::union(u.iter().map(OpenSet::from_json).collect::<Result<_>>()?);
        }
        Err(Error::Parse(format!("unknown open set {v}")))
    }
}

impl fmt::Display for OpenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = |r2: &Real| match r2.exact_sqrt() {
            Some(x) => format_rational(&x),
            None => format!("√{r2}"),
        };
        match self {
            OpenSet::Disc { center, r2 } => write!(f, "B({center}; {})", r(r2)),
            OpenSet::Annulus { center, inner2, outer2 } => write!(f, "A({center}; {}, {})", r(inner2), r(outer2)),
            OpenSet::AllOfC => write!(f, "ℂ"),
            OpenSet::Union(v) => {
                for (i, m) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ⊔ ")?;
                    }
                    write!(f, "{m}")?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for OpenSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for OpenSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        OpenSet::from_json(&Value::deserialize(d)?).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(s: &str) -> Scalar {
        s.parse().unwrap()
    }

    fn disc(c: &str, r: &str) -> OpenSet {
        OpenSet::disc(sc(c), &sc(r)).unwrap()
    }

    fn ann(c: &str, a: &str, b: &str) -> OpenSet {
        OpenSet::annulus(sc(c), &sc(a), &sc(b)).unwrap()
    }

    #[test]
    fn subsets() {
        let b1 = disc("0", "1");
        let b2 = disc("0", "2");
        let u1 = ann("0", "1", "2");
        assert!(b1.is_subset(&b2));
        assert!(u1.is_subset(&b2));
        assert!(!b2.is_subset(&b1));
        assert!(b1.is_subset(&b1));
        assert!(disc("3/2", "1/4").is_subset(&u1));
        assert!(!disc("1", "1/4").is_subset(&u1));
        assert!(!b1.is_subset(&u1));
        assert!(ann("0", "3/2", "2").is_subset(&u1));
        assert!(b2.is_subset(&OpenSet::AllOfC));
        assert!(!OpenSet::AllOfC.is_subset(&b2));
        let u = OpenSet::union(vec![disc("-3", "1"), disc("3", "1")]).unwrap();
        assert!(disc("3", "1/2").is_subset(&u));
        assert!(!disc("0", "4").is_subset(&u));
        assert!(u.is_subset(&disc("0", "4")));
        // exact boundary: B(3/5+4/5i; 1) ⊆ B(0; 2) since |c| = 1
        assert!(disc("3/5+4/5i", "1").is_subset(&b2));
        assert!(!disc("3/5+4/5i", "11/10").is_subset(&b2));
    }

    #[test]
    fn disjointness() {
        let b1 = disc("0", "1");
        let u1 = ann("0", "1", "2");
        assert!(b1.is_disjoint(&u1));
        assert!(u1.is_disjoint(&b1));
        assert!(!disc("0", "1").is_disjoint(&disc("1", "1")));
        assert!(disc("0", "1").is_disjoint(&disc("2", "1")));
        assert!(ann("0", "1", "2").is_disjoint(&ann("0", "2", "3")));
        assert!(!ann("0", "1", "2").is_disjoint(&ann("0", "3/2", "3")));
        assert!(disc("1/10", "1/2").is_disjoint(&u1));
        assert!(!OpenSet::AllOfC.is_disjoint(&b1));
        assert!(matches!(OpenSet::union(vec![b1.clone(), disc("1/2", "1")]), Err(Error::NotDisjoint)));
    }

    #[test]
    fn membership() {
        let u1 = ann("0", "1", "2");
        assert!(u1.contains_point(&sc("3/2")));
        assert!(!u1.contains_point(&sc("1")));
        assert!(!u1.contains_point(&sc("2")));
        assert!(u1.contains_circle(&Scalar::zero(), &sc("3/2").norm_sqr()));
        assert!(!u1.contains_circle(&Scalar::zero(), &sc("1").norm_sqr()));
        assert!(u1.contains_circle(&sc("3/2"), &sc("1/4").norm_sqr()));
        assert!(!disc("0", "2").contains_circle(&sc("1"), &sc("1").norm_sqr()));
    }

    #[test]
    fn affine_images_stay_exact() {
        let d = disc("1", "1");
        let img = d.affine_image(&sc("1+i"), &sc("2")).unwrap();
        assert_eq!(img, OpenSet::Disc { center: sc("3+i"), r2: Real::from_ratio(2, 1) });
        assert!(img.contains_point(&sc("3+i")));
        assert!(matches!(d.affine_image(&Scalar::zero(), &Scalar::one()), Err(Error::ZeroDilation)));
    }

    #[test]
    fn json_round_trip() {
        let sets = vec![
            disc("0", "2"),
            ann("1/2", "1", "2"),
            OpenSet::AllOfC,
            OpenSet::union(vec![disc("-3", "1"), ann("3", "1/2", "1")]).unwrap(),
            disc("0", "1").affine_image(&sc("1+i"), &Scalar::zero()).unwrap(),
        ];
        for s in sets {
            let v = s.to_json();
            assert_eq!(OpenSet::from_json(&v).unwrap(), s, "{v}");
        }
        assert!(OpenSet::from_json(&json!({"disc": {"center": "0", "radius": "1/0"}})).is_err());
        assert!(OpenSet::from_json(&json!({"annulus": {"center": "0", "inner": "2", "outer": "1"}})).is_err());
    }
}
