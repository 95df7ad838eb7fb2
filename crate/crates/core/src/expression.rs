//! Expressions on an open set: finite sums of analytic functionals tensored
//! with states, modulo simultaneous permutation of coordinates and tensor
//! factors.
//!
//! Every expression is expanded multilinearly into basis monomials and each
//! term is stored as a sorted list of `(factor, monomial)` pairs, so equal
//! expressions have equal representations.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::correlator::{mu_exact_component, mu_numeric, MuOptions, PointConfiguration};
use crate::error::{Error, Result};
use crate::functional::{
    default_quadrature_n, factor_from_json, factor_json, parse_scalar_value, supports_separated, Factor, Functional,
    QuadratureOptions,
};
use crate::geometry::OpenSet;
use crate::grading::{DegreeWindow, GradedVector, Monomial, ProductVector};
use crate::residue::Support;
use crate::scalar::Scalar;
use crate::vertex::Preset;

/// One coordinate of a canonical term.
pub type Slot = (Factor, Monomial);

#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    carrier: OpenSet,
    terms: BTreeMap<Vec<Slot>, Scalar>,
}

/// Settings for evaluation paths that are not exact.
#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    /// Tail tolerance of the numeric `μ` series.
    pub mu_tol: f64,
    /// Quadrature nodes per circle; defaults to `2·hi + 16`.
    pub quad_n: Option<usize>,
    /// Allowed relative change between `n` and `2n` quadrature nodes.
    pub quad_tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { mu_tol: 1e-12, quad_n: None, quad_tol: 1e-9 }
    }
}

fn canonical(mut slots: Vec<Slot>) -> Vec<Slot> {
    slots.sort();
    slots
}

fn support_distance(a: &Support, b: &Support) -> f64 {
    match (a, b) {
        (Support::Point(p), Support::Point(q)) => (p - q).abs(),
        (Support::Point(p), Support::Circle(c, r2)) | (Support::Circle(c, r2), Support::Point(p)) => {
            ((p - c).abs() - r2.sqrt_f64()).abs()
        }
        (Support::Circle(c, r2), Support::Circle(d, s2)) => {
            let (r, s, dist) = (r2.sqrt_f64(), s2.sqrt_f64(), (c - d).abs());
            (dist - r - s).max(r - s - dist).max(s - r - dist).max(0.0)
        }
    }
}

impl Expression {
    pub fn zero(carrier: OpenSet) -> Self {
        Expression { carrier, terms: BTreeMap::new() }
    }

    /// The arity-0 unit `1`.
    pub fn unit(carrier: OpenSet) -> Self {
        let mut e = Expression::zero(carrier);
        e.terms.insert(vec![], Scalar::one());
        e
    }

    /// `[α ⊗ a₁ ⊗ … ⊗ aₘ]` on `carrier`, with supports validated.
    pub fn term(carrier: OpenSet, functional: &Functional, states: &[GradedVector]) -> Result<Self> {
        if functional.arity() != states.len() {
            return Err(Error::ArityMismatch { expected: functional.arity(), got: states.len() });
        }
        let mut e = Expression::zero(carrier);
        let expanded = expand_states(states);
        for (factors, c) in functional.terms() {
            for (monos, s) in &expanded {
                let slots = factors.iter().cloned().zip(monos.iter().cloned()).collect();
                e.add_slots(slots, c * s);
            }
        }
        e.validate()?;
        Ok(e)
    }

    /// `[δ_{(z₁,…,zₘ)} ⊗ a₁ ⊗ … ⊗ aₘ]`
    pub fn deltas(carrier: OpenSet, points: &[Scalar], states: &[GradedVector]) -> Result<Self> {
        Expression::term(carrier, &Functional::deltas(points), states)
    }

    fn add_slots(&mut self, slots: Vec<Slot>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let key = canonical(slots);
        let slot = self.terms.entry(key.clone()).or_insert_with(Scalar::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn carrier(&self) -> &OpenSet {
        &self.carrier
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Slot>, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.terms.values().all(Scalar::is_exact)
            && self.terms.keys().flatten().all(|(f, _)| match f {
                Factor::Delta { p, .. } => p.is_exact(),
                Factor::Moment { c, r2, .. } => c.is_exact() && r2.is_exact(),
            })
    }

    /// Arities occurring with nonzero coefficient.
    pub fn arities(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.terms.keys().map(Vec::len).collect();
        v.dedup();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Supports of all factors of all terms.
    pub fn supports(&self) -> Vec<Support> {
        let mut out: Vec<Support> = Vec::new();
        for key in self.terms.keys() {
            for (f, _) in key {
                let s = f.support();
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Every support lies in the carrier and the coordinates of each term
    /// stay apart.
    pub fn validate(&self) -> Result<()> {
        for key in self.terms.keys() {
            for (i, (f, _)) in key.iter().enumerate() {
                if !self.carrier.contains_support(&f.support()) {
                    return Err(Error::InvalidSupport(format!("{f} is not inside {}", self.carrier)));
                }
                for (g, _) in &key[i + 1..] {
                    if !supports_separated(&f.support(), &g.support()) {
                        return Err(Error::InvalidSupport(format!("{f} and {g} meet")));
                    }
                }
            }
        }
        Ok(())
    }

    fn same_carrier(&self, other: &Expression) -> Result<()> {
        if self.carrier != other.carrier {
            return Err(Error::Config(format!("carriers differ: {} and {}", self.carrier, other.carrier)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Expression) -> Result<Expression> {
        self.same_carrier(other)?;
        let mut r = self.clone();
        for (k, c) in &other.terms {
            r.add_slots(k.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, other: &Expression) -> Result<Expression> {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn scale(&self, c: &Scalar) -> Expression {
        let mut r = Expression::zero(self.carrier.clone());
        for (k, x) in &self.terms {
            r.add_slots(k.clone(), x * c);
        }
        r
    }

    /// `Σ cᵢ xᵢ` over expressions sharing a carrier.
    pub fn linear_combination(exprs: &[Expression], coeffs: &[Scalar]) -> Result<Expression> {
        let first = exprs.first().ok_or_else(|| Error::Config("empty linear combination".into()))?;
        if exprs.len() != coeffs.len() {
            return Err(Error::ArityMismatch { expected: exprs.len(), got: coeffs.len() });
        }
        let mut r = Expression::zero(first.carrier.clone());
        for (e, c) in exprs.iter().zip(coeffs) {
            r = r.add(&e.scale(c))?;
        }
        Ok(r)
    }

    /// Pushforward along the inclusion into `v ⊇ carrier`.
    pub fn extend(&self, v: &OpenSet) -> Result<Expression> {
        if !self.carrier.is_subset(v) {
            return Err(Error::NotASubset);
        }
        let r = Expression { carrier: v.clone(), terms: self.terms.clone() };
        r.validate()?;
        Ok(r)
    }

    /// The same data regarded on another open set that holds its supports.
    pub fn with_carrier(&self, u: OpenSet) -> Result<Expression> {
        let r = Expression { carrier: u, terms: self.terms.clone() };
        r.validate()?;
        Ok(r)
    }

    /// The product of expressions on disjoint sets, pushed into `w ⊇ U ⊔ V`.
    pub fn multiply(&self, other: &Expression, w: &OpenSet) -> Result<Expression> {
        if !self.carrier.is_disjoint(&other.carrier) {
            return Err(Error::NotDisjoint);
        }
        let uv = OpenSet::union(vec![self.carrier.clone(), other.carrier.clone()])?;
        if !uv.is_subset(w) {
            return Err(Error::NotASubset);
        }
        let mut r = Expression::zero(w.clone());
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut slots = ka.clone();
                slots.extend(kb.iter().cloned());
                r.add_slots(slots, ca * cb);
            }
        }
        Ok(r)
    }

    /// `σ_{(λ,w)}`: pushforward of every functional along `z ↦ λz + w` and
    /// `λ^{L₀}` on every state.
    pub fn affine_act(&self, lambda: &Scalar, w: &Scalar) -> Result<Expression> {
        let mut r = Expression::zero(self.carrier.affine_image(lambda, w)?);
        for (key, c) in &self.terms {
            let mut coeff = c.clone();
            let mut slots = Vec::with_capacity(key.len());
            for (f, m) in key {
                let (s, g) = f.pushforward(lambda, w)?;
                coeff = &coeff * &s;
                coeff = &coeff * &lambda.powi(m.degree())?;
                slots.push((g, m.clone()));
            }
            r.add_slots(slots, coeff);
        }
        Ok(r)
    }

    /// Terms grouped by their tuple of states, each group as one functional.
    pub fn grouped(&self) -> BTreeMap<Vec<Monomial>, Functional> {
        let mut groups: BTreeMap<Vec<Monomial>, Functional> = BTreeMap::new();
        for (key, c) in &self.terms {
            let (factors, monos): (Vec<Factor>, Vec<Monomial>) = key.iter().cloned().unzip();
            let atom = Functional::atom(c.clone(), factors);
            let slot = groups.entry(monos).or_insert_with(|| Functional::zero(key.len()));
            *slot = slot.add(&atom).expect("equal arities");
        }
        groups
    }

    /// `ev_U([α ⊗ a]) = α(μ(a))`, degreewise in the window: exact through
    /// the closed form for arity ≤ 2, by quadrature of the numeric series
    /// otherwise.
    pub fn evaluate(&self, preset: &Preset, window: DegreeWindow, opts: EvalOptions) -> Result<ProductVector> {
        let mut out = ProductVector::zero(window);
        for (monos, functional) in self.grouped() {
            let states: Vec<GradedVector> = monos.into_iter().map(GradedVector::basis).collect();
            let v = if states.len() <= 2 {
                match functional.evaluate_components(window, |k| mu_exact_component(preset, &states, k)) {
                    Err(Error::ExactPathUnavailable(_)) => evaluate_numeric(preset, &functional, &states, window, opts)?,
                    r => r?,
                }
            } else {
                evaluate_numeric(preset, &functional, &states, window, opts)?
            };
            out.add_scaled(&v, &Scalar::one());
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(key, c)| {
                json!({
                    "coeff": c.to_string(),
                    "factors": key.iter().map(|(f, _)| factor_json(f)).collect::<Vec<_>>(),
                    "states": key.iter().map(|(_, m)| m.tokens().join(" ")).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({"carrier": self.carrier.to_json(), "terms": terms})
    }

    /// Reads `{"carrier": …, "terms": [{"coeff", "factors", "states"}]}`;
    /// a state is a token string such as `"a-1 a-1"` or a serialized vector.
    pub fn from_json(v: &Value) -> Result<Expression> {
        let carrier = OpenSet::from_json(v.get("carrier").ok_or_else(|| Error::Parse("expression needs `carrier`".into()))?)?;
        let mut e = Expression::zero(carrier.clone());
        for t in v.get("terms").and_then(Value::as_array).into_iter().flatten() {
            let coeff = t.get("coeff").map(parse_scalar_value).transpose()?.unwrap_or_else(Scalar::one);
            let factors = t
                .get("factors")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("term needs `factors`".into()))?
                .iter()
                .map(factor_from_json)
                .collect::<Result<Vec<_>>>()?;
            let states = t
                .get("states")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("term needs `states`".into()))?
                .iter()
                .map(|s| match s {
                    Value::String(s) => GradedVector::from_tokens(s),
                    other => Ok(serde_json::from_value(other.clone())?),
                })
                .collect::<Result<Vec<_>>>()?;
            let f = Functional::atom(coeff, factors);
            e = e.add(&Expression::term(carrier.clone(), &f, &states)?)?;
        }
        Ok(e)
    }
}

fn expand_states(states: &[GradedVector]) -> Vec<(Vec<Monomial>, Scalar)> {
    let mut acc = vec![(Vec::new(), Scalar::one())];
    for s in states {
        let mut next = Vec::new();
        for (ms, c) in &acc {
            for (m, x) in s.terms() {
                let mut ms = ms.clone();
                ms.push(m.clone());
                next.push((ms, c * x));
            }
        }
        acc = next;
    }
    acc
}

/// Radius for jet circles: a quarter of the smallest gap between a jet
/// point and any other support of the same atom.
fn jet_radius(functional: &Functional) -> f64 {
    let mut r = f64::INFINITY;
    for (fs, _) in functional.terms() {
        for (i, f) in fs.iter().enumerate() {
            if matches!(f, Factor::Delta { d, .. } if *d > 0) {
                for (j, g) in fs.iter().enumerate() {
                    if i != j {
                        r = r.min(support_distance(&f.support(), &g.support()) / 4.0);
                    }
                }
            }
        }
    }
    if r.is_finite() {
        r
    } else {
        0.25
    }
}

fn evaluate_numeric(
    preset: &Preset,
    functional: &Functional,
    states: &[GradedVector],
    window: DegreeWindow,
    opts: EvalOptions,
) -> Result<ProductVector> {
    let mut f = |pts: &[Complex64]| -> Result<ProductVector> {
        let config = PointConfiguration::new(pts.iter().map(|z| Scalar::Approx(*z)).collect())?;
        let mo = MuOptions::for_config(opts.mu_tol, &config, window);
        Ok(mu_numeric(preset, states, &config, window, mo)?.value)
    };
    let q = QuadratureOptions {
        n: opts.quad_n.unwrap_or_else(|| default_quadrature_n(window)),
        jet_radius: jet_radius(functional),
    };
    let zero = ProductVector::zero(window);
    let needs_check = functional.terms().any(|(fs, _)| fs.iter().any(|x| !matches!(x, Factor::Delta { d: 0, .. })));
    if needs_check {
        functional.apply_numeric_checked(&mut f, &zero, q, opts.quad_tol)
    } else {
        functional.apply_numeric(&mut f, &zero, q)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 on {}", self.carrier);
        }
        for (i, (key, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})[")?;
            for (j, (fac, m)) in key.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{fac}⊗{m}")?;
            }
            write!(f, "]")?;
        }
        write!(f, " on {}", self.carrier)
    }
}

impl Serialize for Expression {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Expression {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Expression::from_json(&Value::deserialize(d)?).map_err(D::Error::custom)
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

    fn w(lo: i64, hi: i64) -> DegreeWindow {
        DegreeWindow::new(lo, hi).unwrap()
    }

    fn alpha() -> GradedVector {
        GradedVector::from_tokens("a-1").unwrap()
    }

    #[test]
    fn symmetric_normalization() {
        let u = disc("0", "4");
        let (a, b) = (alpha(), GradedVector::from_tokens("a-1 a-1").unwrap());
        let x = Expression::deltas(u.clone(), &[sc("1"), sc("2")], &[a.clone(), b.clone()]).unwrap();
        let y = Expression::deltas(u.clone(), &[sc("2"), sc("1")], &[b, a.clone()]).unwrap();
        assert_eq!(x, y);
        let two = Expression::deltas(u.clone(), &[sc("1")], &[a.scale(&sc("2"))]).unwrap();
        let one = Expression::deltas(u, &[sc("1")], &[a]).unwrap();
        assert_eq!(two, one.scale(&sc("2")));
        assert!(two.sub(&one.scale(&sc("2"))).unwrap().is_zero());
    }

    #[test]
    fn supports_are_validated() {
        let u = disc("0", "1");
        assert!(Expression::deltas(u.clone(), &[sc("2")], &[alpha()]).is_err());
        assert!(Expression::deltas(u.clone(), &[sc("1/2"), sc("1/2")], &[alpha(), alpha()]).is_err());
        let m = Functional::atom(Scalar::one(), vec![Factor::moment(Scalar::zero(), &sc("1/2"), 0).unwrap(), Factor::delta(sc("1/2"))]);
        assert!(Expression::term(u, &m, &[alpha(), alpha()]).is_err());
    }

    #[test]
    fn extend_multiply_and_units() {
        let (b1, b2) = (disc("0", "1"), disc("0", "2"));
        let u1 = OpenSet::annulus(Scalar::zero(), &sc("1"), &sc("2")).unwrap();
        let y = Expression::deltas(b1.clone(), &[Scalar::zero()], &[alpha()]).unwrap();
        assert_eq!(y.extend(&b1).unwrap(), y);
        assert!(matches!(y.extend(&u1), Err(Error::NotASubset)));
        let unit = Expression::unit(disc("5", "1"));
        let big = disc("0", "10");
        assert_eq!(y.multiply(&unit, &big).unwrap(), y.extend(&big).unwrap());
        assert!(matches!(y.multiply(&y, &b2), Err(Error::NotDisjoint)));
        let x = Expression::deltas(u1.clone(), &[sc("3/2")], &[alpha()]).unwrap();
        let xy = x.multiply(&y, &b2).unwrap();
        assert_eq!(xy, y.multiply(&x, &b2).unwrap());
        assert_eq!(xy, Expression::deltas(b2, &[sc("3/2"), Scalar::zero()], &[alpha(), alpha()]).unwrap());
    }

    #[test]
    fn affine_action_on_deltas() {
        let p = Preset::heisenberg();
        let y = Expression::deltas(disc("0", "2"), &[sc("1")], &[alpha()]).unwrap();
        let g = y.affine_act(&sc("2"), &Scalar::zero()).unwrap();
        assert_eq!(g, Expression::deltas(disc("0", "4"), &[sc("2")], &[alpha().scale(&sc("2"))]).unwrap());
        let t = Expression::deltas(disc("0", "1"), &[Scalar::zero()], &[alpha()]).unwrap();
        assert_eq!(
            t.affine_act(&Scalar::one(), &sc("3")).unwrap(),
            Expression::deltas(disc("3", "1"), &[sc("3")], &[alpha()]).unwrap()
        );
        assert_eq!(y.affine_act(&Scalar::one(), &Scalar::zero()).unwrap(), y);
        let win = w(0, 4);
        let ev = y.evaluate(&p, win, EvalOptions::default()).unwrap();
        let ev_g = g.evaluate(&p, win, EvalOptions::default()).unwrap();
        assert_eq!(ev_g, ev.grading_act(&sc("2")).unwrap());
    }

    #[test]
    fn evaluation_of_the_annulus_example() {
        let p = Preset::heisenberg();
        let win = w(0, 2);
        let u1 = OpenSet::annulus(Scalar::zero(), &sc("1"), &sc("2")).unwrap();
        let (b1, b2) = (disc("0", "1"), disc("0", "2"));
        let mom = Functional::atom(Scalar::one(), vec![Factor::moment(Scalar::zero(), &sc("3/2"), 1).unwrap()]);
        let x = Expression::term(u1, &mom, &[alpha()]).unwrap();
        let y = Expression::deltas(b1, &[Scalar::zero()], &[alpha()]).unwrap();
        let opts = EvalOptions::default();
        assert!(x.evaluate(&p, win, opts).unwrap().is_zero());
        assert_eq!(y.evaluate(&p, win, opts).unwrap(), ProductVector::from_graded(&alpha(), win));
        let xy = x.multiply(&y, &b2).unwrap();
        assert_eq!(xy.evaluate(&p, win, opts).unwrap(), ProductVector::from_graded(&GradedVector::vacuum(), win));
    }

    #[test]
    fn three_point_numeric_matches_product_of_deltas() {
        let p = Preset::heisenberg();
        let win = w(0, 3);
        let pts = [sc("2"), sc("1"), sc("1/3")];
        let states = [alpha(), alpha(), alpha()];
        let e = Expression::deltas(disc("0", "3"), &pts, &states).unwrap();
        let ev = e.evaluate(&p, win, EvalOptions::default()).unwrap();
        let config = PointConfiguration::new(pts.to_vec()).unwrap();
        let direct = mu_numeric(&p, &states, &config, win, MuOptions::for_config(1e-12, &config, win)).unwrap().value;
        assert!(ev.approx_eq(&direct, 1e-12));
        let jet = Functional::atom(Scalar::one(), vec![Factor::jet(sc("2"), 1), Factor::delta(sc("1")), Factor::delta(sc("1/3"))]);
        let ej = Expression::term(disc("0", "3"), &jet, &states).unwrap();
        let h = 1e-5;
        let plus = PointConfiguration::new(vec![Scalar::approx(2.0 + h, 0.0), sc("1"), sc("1/3")]).unwrap();
        let minus = PointConfiguration::new(vec![Scalar::approx(2.0 - h, 0.0), sc("1"), sc("1/3")]).unwrap();
        let mo = MuOptions::for_config(1e-13, &plus, win);
        let fd = mu_numeric(&p, &states, &plus, win, mo)
            .unwrap()
            .value
            .sub(&mu_numeric(&p, &states, &minus, win, mo).unwrap().value)
            .scale(&Scalar::approx(1.0 / (2.0 * h), 0.0));
        let evj = ej.evaluate(&p, win, EvalOptions::default()).unwrap();
        assert!(evj.approx_eq(&fd, 1e-6), "{}", evj.max_rel_error(&fd));
    }

    #[test]
    fn json_round_trip() {
        let u1 = OpenSet::annulus(Scalar::zero(), &sc("1"), &sc("2")).unwrap();
        let mom = Functional::atom(sc("1/2+i"), vec![Factor::moment(Scalar::zero(), &sc("3/2"), 1).unwrap()]);
        let x = Expression::term(u1, &mom, &[alpha().add(&GradedVector::from_tokens("a-2").unwrap())]).unwrap();
        let v = x.to_json();
        assert_eq!(Expression::from_json(&v).unwrap(), x);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(serde_json::from_str::<Expression>(&s).unwrap(), x);
    }
}
