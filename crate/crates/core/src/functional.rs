//! Finite-rank analytic functionals: linear combinations of products of
//! per-coordinate delta jets and circle moments.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grading::{DegreeWindow, GradedVector, ProductVector};
use crate::residue::{apply_jet, apply_moment, circle_vs_circle, point_vs_circle, FactorSum, Position, Support};
use crate::scalar::{format_rational, parse_rational, Real, Scalar};

/// One coordinate of an atomic functional.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    /// `f ↦ f⁽ᵈ⁾(p)/d!`
    Delta { p: Scalar, d: u32 },
    /// `f ↦ (1/2πi)∮_{|ζ−c|=r} (ζ−c)ⁿ f(ζ) dζ`, radius stored squared.
    Moment { c: Scalar, r2: Real, n: i64 },
}

impl Factor {
    pub fn delta(p: Scalar) -> Self {
        Factor::Delta { p, d: 0 }
    }

    pub fn jet(p: Scalar, d: u32) -> Self {
        Factor::Delta { p, d }
    }

    /// Moment about `c` on the circle of radius `r > 0`.
    pub fn moment(c: Scalar, r: &Scalar, n: i64) -> Result<Self> {
        let r2 = match r {
            Scalar::Exact(g) if g.im == BigRational::from_integer(0.into()) => Real::Exact(&g.re * &g.re),
            Scalar::Approx(z) if z.im == 0.0 => Real::Approx(z.re * z.re),
            _ => return Err(Error::InvalidSupport(format!("radius {r} is not real"))),
        };
        if r.to_c64().re <= 0.0 {
            return Err(Error::InvalidSupport(format!("radius {r} is not positive")));
        }
        Ok(Factor::Moment { c, r2, n })
    }

    pub fn support(&self) -> Support {
        match self {
            Factor::Delta { p, .. } => Support::Point(p.clone()),
            Factor::Moment { c, r2, .. } => Support::Circle(c.clone(), r2.clone()),
        }
    }

    /// `g_*` for `g(x) = λx + w`: the scale factor and the image factor,
    /// with `g_*φ(f) = φ(f∘g)`.
    pub fn pushforward(&self, lambda: &Scalar, w: &Scalar) -> Result<(Scalar, Factor)> {
        if lambda.is_zero() {
            return Err(Error::ZeroDilation);
        }
        Ok(match self {
            Factor::Delta { p, d } => (lambda.powi(*d as i64)?, Factor::Delta { p: &(lambda * p) + w, d: *d }),
            Factor::Moment { c, r2, n } => (
                lambda.powi(-n - 1)?,
                Factor::Moment { c: &(lambda * c) + w, r2: r2.mul(&lambda.norm_sqr()), n: *n },
            ),
        })
    }

    /// Exact application to one coordinate of a function, the others staying
    /// symbolic with the given supports.
    fn apply(&self, f: &FactorSum, var: usize, supports: &[Option<Support>]) -> Result<FactorSum> {
        match self {
            Factor::Delta { p, d } => apply_jet(f, var, p, *d),
            Factor::Moment { c, r2, n } => apply_moment(f, var, c, r2, *n, supports),
        }
    }

    /// Quadrature nodes and weights; jets use a circle of radius `jet_radius`.
    fn nodes(&self, quad_n: usize, jet_radius: f64) -> Vec<(Complex64, Complex64)> {
        let circle = |c: Complex64, r: f64, n: i64| {
            (0..quad_n)
                .map(|j| {
                    let e = Complex64::from_polar(1.0, TAU * j as f64 / quad_n as f64);
                    let wgt = e.powi((n + 1) as i32) * r.powi((n + 1) as i32) / quad_n as f64;
                    (c + e * r, wgt)
                })
                .collect()
        };
        match self {
            Factor::Delta { p, d: 0 } => vec![(p.to_c64(), Complex64::new(1.0, 0.0))],
            Factor::Delta { p, d } => circle(p.to_c64(), jet_radius, -(*d as i64) - 1),
            Factor::Moment { c, r2, n } => circle(c.to_c64(), r2.sqrt_f64(), *n),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Delta { p, d: 0 } => write!(f, "δ[{p}]"),
            Factor::Delta { p, d } => write!(f, "δ{d}[{p}]"),
            Factor::Moment { c, r2, n } => match r2.exact_sqrt() {
                Some(r) => write!(f, "∮[{c};{};{n}]", format_rational(&r)),
                None => write!(f, "∮[{c};√{r2};{n}]"),
            },
        }
    }
}

/// Whether the supports of two coordinates are separated, so that the
/// product functional never sees the diagonal.
pub fn supports_separated(a: &Support, b: &Support) -> bool {
    match (a, b) {
        (Support::Point(p), Support::Point(q)) => {
            if p.is_exact() && q.is_exact() {
                p != q
            } else {
                (p.to_c64() - q.to_c64()).norm() > 1e-12
            }
        }
        (Support::Point(p), Support::Circle(c, r2)) | (Support::Circle(c, r2), Support::Point(p)) => {
            point_vs_circle(p, c, r2) != Position::On
        }
        (Support::Circle(c1, r1), Support::Circle(c2, r2)) => circle_vs_circle(c1, r1, c2, r2) != Position::On,
    }
}

/// A product of per-coordinate factors with a coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicFunctional {
    pub coeff: Scalar,
    pub factors: Vec<Factor>,
}

/// A finite linear combination of atomic functionals of one arity, stored
/// canonically (merged and sorted by factor list).
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    arity: usize,
    atoms: BTreeMap<Vec<Factor>, Scalar>,
}

/// Numeric evaluation settings.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    pub n: usize,
    pub jet_radius: f64,
}

/// Values a functional can be applied to numerically.
pub trait LinearValue: Clone {
    fn zero_like(&self) -> Self;
    fn axpy(&mut self, c: Complex64, x: &Self);
    fn size(&self) -> f64;
    fn distance(&self, other: &Self) -> f64;
}

impl LinearValue for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn axpy(&mut self, c: Complex64, x: &Self) {
        *self += c * x;
    }
    fn size(&self) -> f64 {
        self.norm()
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl LinearValue for ProductVector {
    fn zero_like(&self) -> Self {
        ProductVector::zero(self.window())
    }
    fn axpy(&mut self, c: Complex64, x: &Self) {
        self.add_scaled(x, &Scalar::Approx(c));
    }
    fn size(&self) -> f64 {
        self.norm()
    }
    fn distance(&self, other: &Self) -> f64 {
        self.sub(other).norm()
    }
}

impl Functional {
    pub fn zero(arity: usize) -> Self {
        Functional { arity, atoms: BTreeMap::new() }
    }

    /// The arity-0 functional with value 1.
    pub fn unit() -> Self {
        Functional::atom(Scalar::one(), vec![])
    }

    pub fn atom(coeff: Scalar, factors: Vec<Factor>) -> Self {
        let mut f = Functional::zero(factors.len());
        f.add_atom(factors, coeff);
        f
    }

    /// Point evaluation at the given points.
    pub fn deltas(points: &[Scalar]) -> Self {
        Functional::atom(Scalar::one(), points.iter().cloned().map(Factor::delta).collect())
    }

    fn add_atom(&mut self, factors: Vec<Factor>, c: Scalar) {
        assert_eq!(factors.len(), self.arity);
        if c.is_zero() {
            return;
        }
        let slot = self.atoms.entry(factors.clone()).or_insert_with(Scalar::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.atoms.remove(&factors);
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = AtomicFunctional> + '_ {
        self.atoms.iter().map(|(f, c)| AtomicFunctional { coeff: c.clone(), factors: f.clone() })
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Factor>, &Scalar)> {
        self.atoms.iter()
    }

    pub fn add(&self, other: &Functional) -> Result<Functional> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: other.arity });
        }
        let mut r = self.clone();
        for (f, c) in &other.atoms {
            r.add_atom(f.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn scale(&self, c: &Scalar) -> Functional {
        let mut r = Functional::zero(self.arity);
        for (f, x) in &self.atoms {
            r.add_atom(f.clone(), x * c);
        }
        r
    }

    /// `α × β (f) = α(z ↦ β(w ↦ f(z, w)))`.
    pub fn external_product(&self, other: &Functional) -> Functional {
        let mut r = Functional::zero(self.arity + other.arity);
        for (fa, ca) in &self.atoms {
            for (fb, cb) in &other.atoms {
                let mut fs = fa.clone();
                fs.extend(fb.iter().cloned());
                r.add_atom(fs, ca * cb);
            }
        }
        r
    }

    /// Pushforward along `g × … × g` with `g(x) = λx + w`.
    pub fn pushforward_affine(&self, lambda: &Scalar, w: &Scalar) -> Result<Functional> {
        let maps = vec![(lambda.clone(), w.clone()); self.arity];
        self.pushforward_product(&maps)
    }

    /// Pushforward along a product of affine maps, one per coordinate.
    pub fn pushforward_product(&self, maps: &[(Scalar, Scalar)]) -> Result<Functional> {
        if maps.len() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: maps.len() });
        }
        let mut r = Functional::zero(self.arity);
        for (fs, c) in &self.atoms {
            let mut coeff = c.clone();
            let mut out = Vec::with_capacity(fs.len());
            for (f, (l, w)) in fs.iter().zip(maps) {
                let (s, g) = f.pushforward(l, w)?;
                coeff = &coeff * &s;
                out.push(g);
            }
            r.add_atom(out, coeff);
        }
        Ok(r)
    }

    /// Pushforward along a permutation of coordinates: factor `j` moves to
    /// slot `perm[j]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Functional> {
        if perm.len() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: perm.len() });
        }
        let mut r = Functional::zero(self.arity);
        for (fs, c) in &self.atoms {
            let mut out = fs.clone();
            for (j, f) in fs.iter().enumerate() {
                out[perm[j]] = f.clone();
            }
            r.add_atom(out, c.clone());
        }
        Ok(r)
    }

    /// Every atom keeps its coordinates apart: no two supports meet.
    pub fn validate_supports(&self) -> Result<()> {
        for fs in self.atoms.keys() {
            for i in 0..fs.len() {
                for j in i + 1..fs.len() {
                    if !supports_separated(&fs[i].support(), &fs[j].support()) {
                        return Err(Error::InvalidSupport(format!("coordinates {i} and {j} meet: {} and {}", fs[i], fs[j])));
                    }
                }
            }
        }
        Ok(())
    }

    /// Exact value on a function of the coordinates; coordinates are
    /// integrated from the last to the first.
    pub fn apply_exact(&self, f: &FactorSum) -> Result<Scalar> {
        let mut total = Scalar::zero();
        for (fs, c) in &self.atoms {
            let supports: Vec<Option<Support>> = fs.iter().map(|x| Some(x.support())).collect();
            let mut g = f.clone();
            for (var, factor) in fs.iter().enumerate().rev() {
                if g.is_zero() {
                    break;
                }
                g = factor.apply(&g, var, &supports)?;
            }
            let v = g.as_constant().ok_or_else(|| {
                Error::ExactPathUnavailable("function depends on more coordinates than the functional has".into())
            })?;
            total += &(c * &v);
        }
        Ok(total)
    }

    /// Numeric value on a callable by tensor-product trapezoid quadrature.
    pub fn apply_numeric<T: LinearValue>(
        &self,
        f: &mut dyn FnMut(&[Complex64]) -> Result<T>,
        zero: &T,
        opts: QuadratureOptions,
    ) -> Result<T> {
        let mut total = zero.zero_like();
        for (fs, c) in &self.atoms {
            let nodes: Vec<Vec<(Complex64, Complex64)>> = fs.iter().map(|x| x.nodes(opts.n, opts.jet_radius)).collect();
            let mut pts = vec![Complex64::new(0.0, 0.0); fs.len()];
            let count: usize = nodes.iter().map(Vec::len).product();
            for flat in 0..count {
                let mut rest = flat;
                let mut wgt = c.to_c64();
                for i in (0..fs.len()).rev() {
                    let (z, w) = nodes[i][rest % nodes[i].len()];
                    rest /= nodes[i].len();
                    pts[i] = z;
                    wgt *= w;
                }
                total.axpy(wgt, &f(&pts)?);
            }
        }
        Ok(total)
    }

    /// [`Functional::apply_numeric`] at `n` and `2n` nodes; fails when the two
    /// differ by more than `tol` relative to the larger value.
    pub fn apply_numeric_checked<T: LinearValue>(
        &self,
        f: &mut dyn FnMut(&[Complex64]) -> Result<T>,
        zero: &T,
        opts: QuadratureOptions,
        tol: f64,
    ) -> Result<T> {
        let a = self.apply_numeric(f, zero, opts)?;
        let b = self.apply_numeric(f, zero, QuadratureOptions { n: 2 * opts.n, ..opts })?;
        let diff = a.distance(&b);
        let scale = a.size().max(b.size()).max(1.0);
        if diff > tol * scale {
            return Err(Error::NonConvergentQuadrature { diff: diff / scale, tol });
        }
        Ok(b)
    }

    /// Applies the functional componentwise to per-degree closed forms.
    pub fn evaluate_components(
        &self,
        window: DegreeWindow,
        mut component: impl FnMut(i64) -> Result<crate::correlator::ExactComponent>,
    ) -> Result<ProductVector> {
        let mut out = ProductVector::zero(window);
        for k in window.degrees() {
            let comp = component(k)?;
            let mut v = GradedVector::zero();
            for (m, f) in comp.terms() {
                v.add_term(m.clone(), self.apply_exact(f)?);
            }
            out.add_component(k, &v, &Scalar::one());
        }
        Ok(out)
    }
}

/// Default quadrature size for a window, `2·hi + 16`.
pub fn default_quadrature_n(window: DegreeWindow) -> usize {
    (2 * window.hi().max(0) + 16) as usize
}

/// `(1/2πi)∮_{|ζ−c|=r} (ζ−c)ⁿ f(ζ) dζ` by the trapezoid rule on `n_nodes`
/// equispaced nodes.
pub fn quadrature_moment(f: impl Fn(Complex64) -> Complex64, c: Complex64, r: f64, n: i64, n_nodes: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n_nodes {
        let e = Complex64::from_polar(1.0, TAU * j as f64 / n_nodes as f64);
        acc += e.powi((n + 1) as i32) * f(c + e * r);
    }
    acc * r.powi((n + 1) as i32) / n_nodes as f64
}

fn scalar_json(s: &Scalar) -> Value {
    Value::String(s.to_string())
}

pub(crate) fn factor_json(f: &Factor) -> Value {
    match f {
        Factor::Delta { p, d } => json!({"delta": {"p": scalar_json(p), "d": d}}),
        Factor::Moment { c, r2, n } => {
            let radius = match (r2.exact_sqrt(), r2) {
                (Some(r), _) => ("r", Value::String(format_rational(&r))),
                (None, Real::Exact(q)) => ("r2", Value::String(format_rational(q))),
                (None, Real::Approx(v)) => ("r", json!(v.sqrt())),
            };
            let mut m = serde_json::Map::new();
            m.insert("c".into(), scalar_json(c));
            m.insert(radius.0.into(), radius.1);
            m.insert("n".into(), json!(n));
            json!({ "moment": m })
        }
    }
}

pub(crate) fn parse_scalar_value(v: &Value) -> Result<Scalar> {
    match v {
        Value::String(s) => s.parse(),
        Value::Number(n) => Ok(Scalar::approx(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        _ => Err(Error::Parse(format!("expected a number or string, got {v}"))),
    }
}

pub(crate) fn factor_from_json(v: &Value) -> Result<Factor> {
    if let Some(d) = v.get("delta") {
        let p = parse_scalar_value(d.get("p").ok_or_else(|| Error::Parse("delta needs `p`".into()))?)?;
        let order = d.get("d").and_then(Value::as_u64).unwrap_or(0) as u32;
        return Ok(Factor::jet(p, order));
    }
    if let Some(m) = v.get("moment") {
        let c = parse_scalar_value(m.get("c").ok_or_else(|| Error::Parse("moment needs `c`".into()))?)?;
        let n = m.get("n").and_then(Value::as_i64).ok_or_else(|| Error::Parse("moment needs integer `n`".into()))?;
        if let Some(r2) = m.get("r2") {
            let r2 = match r2 {
                Value::String(s) => Real::Exact(parse_rational(s)?),
                Value::Number(x) => Real::Approx(x.as_f64().unwrap_or(f64::NAN)),
                _ => return Err(Error::Parse("bad `r2`".into())),
            };
            if r2.to_f64() <= 0.0 {
                return Err(Error::InvalidSupport("radius must be positive".into()));
            }
            return Ok(Factor::Moment { c, r2, n });
        }
        let r = parse_scalar_value(m.get("r").ok_or_else(|| Error::Parse("moment needs `r`".into()))?)?;
        return Factor::moment(c, &r, n);
    }
    Err(Error::Parse(format!("unknown functional factor {v}")))
}

impl Serialize for Functional {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let atoms: Vec<Value> = self
            .atoms
            .iter()
            .map(|(fs, c)| json!({"coeff": scalar_json(c), "factors": fs.iter().map(factor_json).collect::<Vec<_>>()}))
            .collect();
        json!({"arity": self.arity, "atoms": atoms}).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Functional {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Functional::from_json(&v).map_err(D::Error::custom)
    }
}

impl Functional {
    pub fn from_json(v: &Value) -> Result<Functional> {
        let arity = v.get("arity").and_then(Value::as_u64).ok_or_else(|| Error::Parse("functional needs `arity`".into()))?
            as usize;
        let mut f = Functional::zero(arity);
        for a in v.get("atoms").and_then(Value::as_array).into_iter().flatten() {
            let coeff = a.get("coeff").map(parse_scalar_value).transpose()?.unwrap_or_else(Scalar::one);
            let factors = a
                .get("factors")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("atom needs `factors`".into()))?
                .iter()
                .map(factor_from_json)
                .collect::<Result<Vec<_>>>()?;
            if factors.len() != arity {
                return Err(Error::ArityMismatch { expected: arity, got: factors.len() });
            }
            f.add_atom(factors, coeff);
        }
        Ok(f)
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "0");
        }
        for (i, (fs, c)) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for x in fs {
                write!(f, "·{x}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(s: &str) -> Scalar {
        s.parse().unwrap()
    }

    fn z_pow(var: usize, e: i64) -> FactorSum {
        FactorSum::shift_power(var, Scalar::zero(), e)
    }

    #[test]
    fn moment_and_delta_basics() {
        let m = Functional::atom(Scalar::one(), vec![Factor::moment(Scalar::zero(), &sc("3/2"), 1).unwrap()]);
        assert_eq!(m.apply_exact(&z_pow(0, -2)).unwrap(), Scalar::one());
        assert_eq!(m.apply_exact(&z_pow(0, 4)).unwrap(), Scalar::zero());
        let d = Functional::deltas(&[sc("2")]);
        assert_eq!(d.apply_exact(&z_pow(0, 3)).unwrap(), Scalar::from_int(8));
        let j = Functional::atom(Scalar::one(), vec![Factor::jet(sc("2"), 2)]);
        // (z^3)''/2 at 2 = 3·2 = 6
        assert_eq!(j.apply_exact(&z_pow(0, 3)).unwrap(), Scalar::from_int(6));
    }

    #[test]
    fn external_product_examples() {
        let a = Functional::deltas(&[sc("1")]);
        let b = Functional::deltas(&[sc("2")]);
        assert_eq!(a.external_product(&b), Functional::deltas(&[sc("1"), sc("2")]));
        assert_eq!(Functional::unit().external_product(&b), b);
        // product function h(x)g(y)
        let m = Functional::atom(Scalar::one(), vec![Factor::moment(sc("2"), &sc("1/2"), -2).unwrap()]);
        let h = z_pow(0, 3);
        let g = z_pow(1, 2);
        let ab = a.external_product(&m);
        let lhs = ab.apply_exact(&h.mul(&g)).unwrap();
        let rhs = &a.apply_exact(&h).unwrap() * &m.apply_exact(&z_pow(0, 2)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pushforward_examples() {
        let d0 = Functional::deltas(&[Scalar::zero()]);
        assert_eq!(d0.pushforward_affine(&Scalar::one(), &Scalar::zero()).unwrap(), d0);
        assert_eq!(d0.pushforward_affine(&Scalar::one(), &sc("1+i")).unwrap(), Functional::deltas(&[sc("1+i")]));
        assert!(matches!(d0.pushforward_affine(&Scalar::zero(), &Scalar::one()), Err(Error::ZeroDilation)));
        // dilation of a moment against monomials: g_*α(z^m) = α(λ^m z^m)
        let lam = sc("2/3+1/3i");
        for n in -3..=3 {
            let a = Functional::atom(Scalar::one(), vec![Factor::moment(Scalar::zero(), &sc("1"), n).unwrap()]);
            let ga = a.pushforward_affine(&lam, &Scalar::zero()).unwrap();
            for m in -8..=8 {
                let lhs = ga.apply_exact(&z_pow(0, m)).unwrap();
                let rhs = &lam.powi(m).unwrap() * &a.apply_exact(&z_pow(0, m)).unwrap();
                assert_eq!(lhs, rhs, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn jet_pushforward_uses_chain_rule() {
        // g(x) = λx + w; (f∘g)''(p)/2 = λ² f''(g(p))/2
        let lam = sc("3");
        let w = sc("1");
        let a = Functional::atom(Scalar::one(), vec![Factor::jet(sc("1/2"), 2)]);
        let ga = a.pushforward_affine(&lam, &w).unwrap();
        let f = z_pow(0, 4);
        // f∘g = (3x + 1)^4 = 81 (x + 1/3)^4
        let fg = FactorSum::shift_power(0, sc("-1/3"), 4).scale(&Scalar::from_int(81));
        assert_eq!(ga.apply_exact(&f).unwrap(), a.apply_exact(&fg).unwrap());
    }

    #[test]
    fn quadrature_examples() {
        let one = |z: Complex64| z * z;
        let v = quadrature_moment(one, Complex64::new(0.0, 0.0), 1.0, -3, 16);
        assert!((v - 1.0).norm() < 1e-13);
        let v = quadrature_moment(|z| z.powi(-2), Complex64::new(0.0, 0.0), 1.5, 1, 16);
        assert!((v - 1.0).norm() < 1e-13);
        let f = |z: Complex64| (-5i32..=5).map(|j| z.powi(j) * j as f64).sum::<Complex64>();
        for k in -5..=5 {
            let v = quadrature_moment(f, Complex64::new(0.0, 0.0), 1.0, -k - 1, 16);
            assert!((v - k as f64).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn numeric_matches_exact() {
        // f(x, y) = x² (x − y)^{-2} y with the y-circle inside the x-circle
        let f = z_pow(0, 2).mul(&FactorSum::diff_power(0, 1, -2)).mul(&z_pow(1, 1));
        let a = Functional::atom(
            sc("1/2"),
            vec![Factor::moment(Scalar::zero(), &sc("2"), -1).unwrap(), Factor::moment(sc("1/4"), &sc("1/2"), 0).unwrap()],
        )
        .add(&Functional::atom(Scalar::one(), vec![Factor::jet(sc("3"), 1), Factor::delta(sc("1/2"))]))
        .unwrap();
        a.validate_supports().unwrap();
        let exact = a.apply_exact(&f).unwrap().to_c64();
        let mut call = |p: &[Complex64]| -> Result<Complex64> { Ok(p[0] * p[0] * (p[0] - p[1]).powi(-2) * p[1]) };
        let opts = QuadratureOptions { n: 64, jet_radius: 0.5 };
        let num = a.apply_numeric_checked(&mut call, &Complex64::new(0.0, 0.0), opts, 1e-9).unwrap();
        assert!((num - exact).norm() < 1e-9 * exact.norm().max(1.0), "{num} vs {exact}");
    }

    #[test]
    fn braiding_swaps_factors() {
        let a = Functional::atom(Scalar::one(), vec![Factor::moment(Scalar::zero(), &sc("3"), 2).unwrap()]);
        let b = Functional::atom(sc("2"), vec![Factor::jet(sc("1"), 1)]);
        let ab = a.external_product(&b);
        assert_eq!(ab.permute(&[1, 0]).unwrap(), b.external_product(&a));
    }

    #[test]
    fn json_round_trip() {
        let a = Functional::atom(sc("1/2-i"), vec![Factor::moment(Scalar::zero(), &sc("3/2"), 1).unwrap(), Factor::delta(sc("1/4"))])
            .add(&Functional::atom(Scalar::one(), vec![Factor::jet(sc("2"), 3), Factor::delta(Scalar::zero())]))
            .unwrap();
        let v = serde_json::to_value(&a).unwrap();
        assert_eq!(v["arity"], 2);
        let back: Functional = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(back, a);
        // irrational radius after a rotation-dilation keeps its square
        let b = a.pushforward_affine(&sc("1+i"), &Scalar::zero()).unwrap();
        let back: Functional = serde_json::from_value(serde_json::to_value(&b).unwrap()).unwrap();
        assert_eq!(back, b);
        let parsed: Functional = serde_json::from_str(
            r#"{"arity":1,"atoms":[{"coeff":"1","factors":[{"moment":{"c":"0","r":"3/2","n":1}}]}]}"#,
        )
        .unwrap();
        assert_eq!(parsed.arity(), 1);
    }

    #[test]
    fn support_validation() {
        let bad = Functional::atom(
            Scalar::one(),
            vec![Factor::moment(Scalar::zero(), &sc("1"), 0).unwrap(), Factor::delta(sc("1"))],
        );
        assert!(bad.validate_supports().is_err());
        let crossing = Functional::atom(
            Scalar::one(),
            vec![Factor::moment(Scalar::zero(), &sc("1"), 0).unwrap(), Factor::moment(sc("1"), &sc("1"), 0).unwrap()],
        );
        assert!(crossing.validate_supports().is_err());
        assert!(Factor::moment(Scalar::zero(), &sc("-1"), 0).is_err());
    }
}
