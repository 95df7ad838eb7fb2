//! PBW monomials, graded vectors and truncated products of weight spaces.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, GaussRat, Scalar};

/// Strong generators of the supported vertex algebras. The declaration order
/// is the tie-break order inside PBW monomials (`e < h < f`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    /// Heisenberg current α.
    Alpha,
    /// Virasoro field, modes `L_n`.
    L,
    E,
    H,
    F,
}

impl Generator {
    /// Conformal weight of the generating field.
    pub fn weight(self) -> u32 {
        match self {
            Generator::L => 2,
            _ => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Generator::Alpha => "a",
            Generator::L => "L",
            Generator::E => "e",
            Generator::H => "h",
            Generator::F => "f",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "a" | "alpha" | "α" => Generator::Alpha,
            "L" => Generator::L,
            "e" => Generator::E,
            "h" => Generator::H,
            "f" => Generator::F,
            _ => return None,
        })
    }
}

/// One creation operator `g_{-n}` inside a PBW monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeFactor {
    pub gen: Generator,
    /// Magnitude `n` of the (negative) mode index.
    pub n: u32,
}

impl ModeFactor {
    pub fn new(gen: Generator, n: u32) -> Self {
        ModeFactor { gen, n }
    }
}

/// Canonical factor order: larger magnitude first, generator order on ties.
impl Ord for ModeFactor {
    fn cmp(&self, other: &Self) -> Ordering {
        other.n.cmp(&self.n).then(self.gen.cmp(&other.gen))
    }
}

impl PartialOrd for ModeFactor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ModeFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.gen.symbol(), self.n)
    }
}

impl FromStr for ModeFactor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid mode token `{s}`"));
        let idx = s.find('-').ok_or_else(bad)?;
        let gen = Generator::from_symbol(&s[..idx]).ok_or_else(bad)?;
        let n: u32 = s[idx + 1..].parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        Ok(ModeFactor { gen, n })
    }
}

/// An ordered product of creation modes applied to the vacuum. The empty
/// monomial is `|0⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<ModeFactor>);

impl Monomial {
    pub fn vacuum() -> Self {
        Monomial(Vec::new())
    }

    /// Builds a monomial, sorting the factors into canonical order.
    pub fn new(mut factors: Vec<ModeFactor>) -> Self {
        factors.sort();
        Monomial(factors)
    }

    /// Wraps factors that are already canonically ordered.
    pub(crate) fn from_sorted(factors: Vec<ModeFactor>) -> Self {
        debug_assert!(factors.windows(2).all(|w| w[0] <= w[1]));
        Monomial(factors)
    }

    pub fn factors(&self) -> &[ModeFactor] {
        &self.0
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|f| f.n as i64).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Splits off the leftmost factor.
    pub fn split_first(&self) -> Option<(ModeFactor, Monomial)> {
        let (first, rest) = self.0.split_first()?;
        Some((*first, Monomial(rest.to_vec())))
    }

    /// Prepends a factor that sorts before (or ties with) the current head.
    pub(crate) fn prepend(&self, f: ModeFactor) -> Monomial {
        debug_assert!(self.0.first().map_or(true, |h| f <= *h));
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(f);
        v.extend_from_slice(&self.0);
        Monomial(v)
    }

    pub fn tokens(&self) -> Vec<String> {
        self.0.iter().map(|f| f.to_string()).collect()
    }

    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Result<Self> {
        let factors = tokens
            .iter()
            .map(|t| t.as_ref().parse::<ModeFactor>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Monomial::new(factors))
    }
}

/// Basis order: by degree, then lexicographically by factors.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "|0>");
        }
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "|0>")
    }
}

/// A finite linear combination of PBW monomials. Zero coefficients are never
/// stored and terms iterate in basis order, so exact vectors compare
/// structurally.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GradedVector {
    terms: BTreeMap<Monomial, Scalar>,
}

impl GradedVector {
    pub fn zero() -> Self {
        GradedVector::default()
    }

    pub fn vacuum() -> Self {
        GradedVector::basis(Monomial::vacuum())
    }

    pub fn basis(m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(m, Scalar::one());
        GradedVector { terms }
    }

    pub fn term(m: Monomial, c: Scalar) -> Self {
        let mut v = GradedVector::zero();
        v.add_term(m, c);
        v
    }

    /// Parses space-separated mode tokens, e.g. `"a-1 a-1"`; the empty string
    /// or `"|0>"` is the vacuum.
    pub fn from_tokens(s: &str) -> Result<Self> {
        let toks: Vec<&str> = s.split_whitespace().filter(|t| *t != "|0>" && *t != "vac").collect();
        Ok(GradedVector::basis(Monomial::from_tokens(&toks)?))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_exact(&self) -> bool {
        self.terms.values().all(Scalar::is_exact)
    }

    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &GradedVector, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        for (m, x) in &other.terms {
            let v = if c.is_one() { x.clone() } else { x * c };
            self.add_term(m.clone(), v);
        }
    }

    pub fn add(&self, other: &GradedVector) -> GradedVector {
        let mut r = self.clone();
        r.add_scaled(other, &Scalar::one());
        r
    }

    pub fn sub(&self, other: &GradedVector) -> GradedVector {
        let mut r = self.clone();
        r.add_scaled(other, &Scalar::from_int(-1));
        r
    }

    pub fn scale(&self, c: &Scalar) -> GradedVector {
        let mut r = GradedVector::zero();
        r.add_scaled(self, c);
        r
    }

    pub fn to_approx(&self) -> GradedVector {
        GradedVector {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.to_approx())).collect(),
        }
    }

    /// Degree of a nonzero homogeneous vector.
    pub fn degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(Monomial::degree);
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Sorted distinct degrees present.
    pub fn degrees(&self) -> Vec<i64> {
        let mut d: Vec<i64> = self.terms.keys().map(Monomial::degree).collect();
        d.dedup();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// The degree-`k` part `p_k(v)`.
    pub fn project_degree(&self, k: i64) -> GradedVector {
        GradedVector {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// `q^{L₀}`: scales the degree-`d` part by `q^d`.
    pub fn grading_act(&self, q: &Scalar) -> Result<GradedVector> {
        if q.is_zero() {
            return Err(Error::ZeroGradingParameter);
        }
        let mut out = GradedVector::zero();
        for d in self.degrees() {
            let f = q.powi(d)?;
            out.add_scaled(&self.project_degree(d), &f);
        }
        Ok(out)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.terms.values().map(|c| c.to_c64().norm_sqr()).sum::<f64>().sqrt()
    }

    /// Norm of `self − other`.
    pub fn distance(&self, other: &GradedVector) -> f64 {
        self.sub(other).norm()
    }

    /// Equal exactly when both are exact; otherwise `‖a−b‖ ≤ rel·max(‖a‖,‖b‖,1)`.
    pub fn approx_eq(&self, other: &GradedVector, rel: f64) -> bool {
        if self.is_exact() && other.is_exact() {
            return self == other;
        }
        let scale = self.norm().max(other.norm()).max(1.0);
        self.distance(other) <= rel * scale
    }
}

impl fmt::Display for GradedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "({c})·{m}")?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NumRepr {
    Str(String),
    Num(f64),
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    mono: Vec<String>,
    re: NumRepr,
    im: NumRepr,
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    terms: Vec<TermRepr>,
}

impl Serialize for GradedVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let (re, im) = match c {
                    Scalar::Exact(g) => (
                        NumRepr::Str(format_rational(&g.re)),
                        NumRepr::Str(format_rational(&g.im)),
                    ),
                    Scalar::Approx(z) => (NumRepr::Num(z.re), NumRepr::Num(z.im)),
                };
                TermRepr { mono: m.tokens(), re, im }
            })
            .collect();
        VectorRepr { terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GradedVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = VectorRepr::deserialize(d)?;
        let mut v = GradedVector::zero();
        for t in repr.terms {
            let m = Monomial::from_tokens(&t.mono).map_err(D::Error::custom)?;
            let c = match (t.re, t.im) {
                (NumRepr::Str(a), NumRepr::Str(b)) => Scalar::Exact(GaussRat::new(
                    parse_rational(&a).map_err(D::Error::custom)?,
                    parse_rational(&b).map_err(D::Error::custom)?,
                )),
                (NumRepr::Num(a), NumRepr::Num(b)) => Scalar::approx(a, b),
                _ => return Err(D::Error::custom("re and im must both be strings or both numbers")),
            };
            v.add_term(m, c);
        }
        Ok(v)
    }
}

/// Closed range of degrees kept by truncated computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct DegreeWindow {
    lo: i64,
    hi: i64,
}

impl DegreeWindow {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidWindow(lo, hi));
        }
        Ok(DegreeWindow { lo, hi })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn contains(&self, k: i64) -> bool {
        self.lo <= k && k <= self.hi
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

impl TryFrom<(i64, i64)> for DegreeWindow {
    type Error = Error;
    fn try_from((lo, hi): (i64, i64)) -> Result<Self> {
        DegreeWindow::new(lo, hi)
    }
}

impl From<DegreeWindow> for (i64, i64) {
    fn from(w: DegreeWindow) -> Self {
        (w.lo, w.hi)
    }
}

impl FromStr for DegreeWindow {
    type Err = Error;
    /// `lo:hi`
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("window must be lo:hi, got `{s}`")))?;
        let lo = a.trim().parse().map_err(|_| Error::Parse(format!("bad window `{s}`")))?;
        let hi = b.trim().parse().map_err(|_| Error::Parse(format!("bad window `{s}`")))?;
        DegreeWindow::new(lo, hi)
    }
}

impl fmt::Display for DegreeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// Element of `∏_k V_k` truncated to a degree window; one homogeneous
/// component per degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductVector {
    window: DegreeWindow,
    #[serde(rename = "by_degree")]
    components: BTreeMap<i64, GradedVector>,
    /// Set when a contribution outside the window was dropped.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    window_truncated: bool,
}

impl ProductVector {
    pub fn zero(window: DegreeWindow) -> Self {
        ProductVector { window, components: BTreeMap::new(), window_truncated: false }
    }

    /// Splits `v` by degree; parts outside the window are dropped and flagged.
    pub fn from_graded(v: &GradedVector, window: DegreeWindow) -> Self {
        let mut p = ProductVector::zero(window);
        p.add_graded(v, &Scalar::one());
        p
    }

    pub fn window(&self) -> DegreeWindow {
        self.window
    }

    pub fn window_truncated(&self) -> bool {
        self.window_truncated
    }

    pub fn mark_truncated(&mut self) {
        self.window_truncated = true;
    }

    pub fn component(&self, k: i64) -> GradedVector {
        self.components.get(&k).cloned().unwrap_or_default()
    }

    /// `p_k`, identical to [`ProductVector::component`].
    pub fn project_degree(&self, k: i64) -> GradedVector {
        self.component(k)
    }

    pub fn components(&self) -> impl Iterator<Item = (i64, &GradedVector)> {
        self.components.iter().map(|(k, v)| (*k, v))
    }

    /// Adds `c · v` into component `k`. Panics if `v` is not homogeneous of
    /// degree `k`; out-of-window contributions are dropped.
    pub fn add_component(&mut self, k: i64, v: &GradedVector, c: &Scalar) {
        assert!(v.is_zero() || v.degree() == Some(k), "component {k} must be homogeneous of degree {k}");
        if !self.window.contains(k) {
            if !v.is_zero() && !c.is_zero() {
                self.window_truncated = true;
            }
            return;
        }
        let slot = self.components.entry(k).or_default();
        slot.add_scaled(v, c);
        if slot.is_zero() {
            self.components.remove(&k);
        }
    }

    pub fn add_graded(&mut self, v: &GradedVector, c: &Scalar) {
        for d in v.degrees() {
            self.add_component(d, &v.project_degree(d), c);
        }
    }

    pub fn add_scaled(&mut self, other: &ProductVector, c: &Scalar) {
        for (k, v) in &other.components {
            self.add_component(*k, v, c);
        }
        self.window_truncated |= other.window_truncated;
    }

    pub fn scale(&self, c: &Scalar) -> ProductVector {
        let mut r = ProductVector::zero(self.window);
        r.add_scaled(self, c);
        r
    }

    pub fn sub(&self, other: &ProductVector) -> ProductVector {
        let mut r = self.clone();
        r.add_scaled(other, &Scalar::from_int(-1));
        r
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(GradedVector::is_zero)
    }

    pub fn is_exact(&self) -> bool {
        self.components.values().all(GradedVector::is_exact)
    }

    pub fn to_approx(&self) -> ProductVector {
        ProductVector {
            window: self.window,
            components: self.components.iter().map(|(k, v)| (*k, v.to_approx())).collect(),
            window_truncated: self.window_truncated,
        }
    }

    /// Sum of all components as one graded vector.
    pub fn to_graded(&self) -> GradedVector {
        let mut v = GradedVector::zero();
        for c in self.components.values() {
            v.add_scaled(c, &Scalar::one());
        }
        v
    }

    pub fn grading_act(&self, q: &Scalar) -> Result<ProductVector> {
        let mut r = ProductVector::zero(self.window);
        for (k, v) in &self.components {
            r.add_component(*k, v, &q.powi(*k)?);
        }
        r.window_truncated = self.window_truncated;
        Ok(r)
    }

    pub fn norm(&self) -> f64 {
        self.components.values().map(|v| v.norm().powi(2)).sum::<f64>().sqrt()
    }

    /// Largest componentwise distance, relative to the larger component norm
    /// (floored at 1).
    pub fn max_rel_error(&self, other: &ProductVector) -> f64 {
        self.window
            .degrees()
            .chain(other.window.degrees())
            .map(|k| {
                let a = self.component(k);
                let b = other.component(k);
                let scale = a.norm().max(b.norm()).max(1.0);
                a.distance(&b) / scale
            })
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &ProductVector, rel: f64) -> bool {
        if self.is_exact() && other.is_exact() {
            return self.components == other.components;
        }
        self.max_rel_error(other) <= rel
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(s: &str) -> GradedVector {
        GradedVector::from_tokens(s).unwrap()
    }

    #[test]
    fn projection_examples() {
        let vac = GradedVector::vacuum();
        assert_eq!(vac.project_degree(0), vac);
        let v = st("a-1").add(&st("a-2"));
        assert_eq!(v.project_degree(1), st("a-1"));
        assert!(st("a-1").project_degree(3).is_zero());
    }

    #[test]
    fn canonical_order_and_degree() {
        let m = Monomial::from_tokens(&["a-1", "a-3", "a-2"]).unwrap();
        assert_eq!(m.tokens(), vec!["a-3", "a-2", "a-1"]);
        assert_eq!(m.degree(), 6);
        let m = Monomial::from_tokens(&["f-1", "e-1", "h-1"]).unwrap();
        assert_eq!(m.tokens(), vec!["e-1", "h-1", "f-1"]);
        assert!("a-0".parse::<ModeFactor>().is_err());
        assert!("x-1".parse::<ModeFactor>().is_err());
    }

    #[test]
    fn grading_action() {
        let q = Scalar::from_int(2);
        assert_eq!(GradedVector::vacuum().grading_act(&q).unwrap(), GradedVector::vacuum());
        assert_eq!(st("a-1").grading_act(&q).unwrap(), st("a-1").scale(&q));
        assert!(st("a-1").grading_act(&Scalar::zero()).is_err());
        let v = st("a-1").add(&st("a-2 a-1"));
        let (q1, q2) = (Scalar::from_ratio(2, 3), "1+i".parse::<Scalar>().unwrap());
        let lhs = v.grading_act(&q2).unwrap().grading_act(&q1).unwrap();
        let rhs = v.grading_act(&(&q1 * &q2)).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(v.grading_act(&Scalar::one()).unwrap(), v);
    }

    #[test]
    fn zero_terms_are_not_stored() {
        let mut v = st("a-1");
        v.add_term(Monomial::from_tokens(&["a-1"]).unwrap(), Scalar::from_int(-1));
        assert!(v.is_zero());
        assert_eq!(v.len(), 0);
    }

    #[test]
    fn product_vector_truncation_flag() {
        let w = DegreeWindow::new(0, 1).unwrap();
        let v = st("a-1").add(&st("a-2"));
        let p = ProductVector::from_graded(&v, w);
        assert!(p.window_truncated());
        assert_eq!(p.component(1), st("a-1"));
        assert!(p.component(2).is_zero());
        assert!(!ProductVector::from_graded(&st("a-1"), w).window_truncated());
    }

    #[test]
    fn json_shape_and_roundtrip() {
        let v = st("a-2 a-1").scale(&"1/3-2/7i".parse().unwrap()).add(&GradedVector::vacuum());
        let j = serde_json::to_value(&v).unwrap();
        assert_eq!(j["terms"][0]["mono"], serde_json::json!([]));
        assert_eq!(j["terms"][1]["mono"], serde_json::json!(["a-2", "a-1"]));
        assert_eq!(j["terms"][1]["re"], "1/3");
        assert_eq!(j["terms"][1]["im"], "-2/7");
        let back: GradedVector = serde_json::from_value(j).unwrap();
        assert_eq!(back, v);

        let p = ProductVector::from_graded(&v, DegreeWindow::new(0, 4).unwrap());
        let j = serde_json::to_value(&p).unwrap();
        assert_eq!(j["window"], serde_json::json!([0, 4]));
        assert!(j["by_degree"]["3"].is_object());
        let back: ProductVector = serde_json::from_value(j).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<DegreeWindow>("[3, 1]").is_err());
    }

    fn arb_vector() -> impl proptest::strategy::Strategy<Value = GradedVector> {
        use proptest::prelude::*;
        let factor = (0u8..2, 1u32..4).prop_map(|(g, n)| {
            ModeFactor::new(if g == 0 { Generator::Alpha } else { Generator::H }, n)
        });
        let mono = proptest::collection::vec(factor, 0..4).prop_map(Monomial::new);
        proptest::collection::vec((mono, -20i64..20, 1i64..9), 0..8).prop_map(|ts| {
            let mut v = GradedVector::zero();
            for (m, n, d) in ts {
                v.add_term(m, Scalar::from_ratio(n, d));
            }
            v
        })
    }

    proptest::proptest! {
        #[test]
        fn projections_partition(v in arb_vector()) {
            let mut sum = GradedVector::zero();
            for k in 0..=12 {
                let p = v.project_degree(k);
                for k2 in 0..=12 {
                    if k2 != k {
                        proptest::prop_assert!(p.project_degree(k2).is_zero());
                    }
                }
                sum = sum.add(&p);
            }
            proptest::prop_assert_eq!(sum, v);
        }

        #[test]
        fn json_roundtrip_is_exact(v in arb_vector()) {
            let s = serde_json::to_string(&v).unwrap();
            let back: GradedVector = serde_json::from_str(&s).unwrap();
            proptest::prop_assert_eq!(back, v);
        }

        #[test]
        fn grading_is_linear(v in arb_vector(), w in arb_vector(), n in 1i64..5, d in 1i64..5) {
            let q = Scalar::from_ratio(n, d);
            let lhs = v.add(&w).grading_act(&q).unwrap();
            let rhs = v.grading_act(&q).unwrap().add(&w.grading_act(&q).unwrap());
            proptest::prop_assert_eq!(lhs, rhs);
        }
    }
}
