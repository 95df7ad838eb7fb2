//! Exact residue calculus on sums of products of linear forms.
//!
//! Correlator components of arity ≤ 2 are finite sums of terms
//! `c · Π (xᵢ − p)^e · Π (xᵢ − xⱼ)^e` with integer exponents. That class is
//! closed under taking a Taylor coefficient or a circle moment in one
//! coordinate while the others stay symbolic: every such operation is a sum
//! of residues at finitely many base points, and expanding the remaining
//! factors around a base point only produces new linear forms of the same
//! shape.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{binomial, cmp_sqrt_sums, Real, Scalar};

/// A linear form in the coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinForm {
    /// `x_var − point`
    Shift { var: usize, point: Scalar },
    /// `x_i − x_j` with `i < j`
    Diff { i: usize, j: usize },
}

impl LinForm {
    fn involves(&self, v: usize) -> bool {
        match self {
            LinForm::Shift { var, .. } => *var == v,
            LinForm::Diff { i, j } => *i == v || *j == v,
        }
    }
}

type Factors = Vec<(LinForm, i64)>;

/// A finite sum of coefficient × product of powers of linear forms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FactorSum {
    terms: BTreeMap<Factors, Scalar>,
}

fn merge_factors(a: &Factors, b: &Factors) -> Factors {
    let mut m: BTreeMap<LinForm, i64> = BTreeMap::new();
    for (f, e) in a.iter().chain(b.iter()) {
        *m.entry(f.clone()).or_insert(0) += e;
    }
    m.into_iter().filter(|(_, e)| *e != 0).collect()
}

impl FactorSum {
    pub fn zero() -> Self {
        FactorSum::default()
    }

    pub fn constant(c: Scalar) -> Self {
        let mut s = FactorSum::zero();
        s.add_term(Vec::new(), c);
        s
    }

    /// `c · Π forms^exps`.
    pub fn monomial(c: Scalar, factors: Vec<(LinForm, i64)>) -> Self {
        let mut s = FactorSum::zero();
        s.add_term(merge_factors(&factors, &Vec::new()), c);
        s
    }

    /// `(x_var − point)^e`
    pub fn shift_power(var: usize, point: Scalar, e: i64) -> Self {
        FactorSum::monomial(Scalar::one(), vec![(LinForm::Shift { var, point }, e)])
    }

    /// `(x_i − x_j)^e` for `i ≠ j`.
    pub fn diff_power(i: usize, j: usize, e: i64) -> Self {
        assert_ne!(i, j);
        let (lo, hi, sign) = if i < j { (i, j, 1) } else { (j, i, if e % 2 == 0 { 1 } else { -1 }) };
        FactorSum::monomial(Scalar::from_int(sign), vec![(LinForm::Diff { i: lo, j: hi }, e)])
    }

    fn add_term(&mut self, f: Factors, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(f.clone()).or_insert_with(Scalar::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&f);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of distinct products of linear forms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &FactorSum) -> FactorSum {
        let mut r = self.clone();
        for (f, c) in &o.terms {
            r.add_term(f.clone(), c.clone());
        }
        r
    }

    pub fn scale(&self, c: &Scalar) -> FactorSum {
        let mut r = FactorSum::zero();
        for (f, x) in &self.terms {
            r.add_term(f.clone(), x * c);
        }
        r
    }

    pub fn mul(&self, o: &FactorSum) -> FactorSum {
        let mut r = FactorSum::zero();
        for (fa, ca) in &self.terms {
            for (fb, cb) in &o.terms {
                r.add_term(merge_factors(fa, fb), ca * cb);
            }
        }
        r
    }

    /// The value once every coordinate has been integrated out.
    pub fn as_constant(&self) -> Option<Scalar> {
        if self.terms.is_empty() {
            return Some(Scalar::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Vec::new()) {
                return Some(c.clone());
            }
        }
        None
    }

    /// Substitutes numbers for all coordinates.
    pub fn eval_at(&self, xs: &[Scalar]) -> Result<Scalar> {
        let mut total = Scalar::zero();
        for (fs, c) in &self.terms {
            let mut t = c.clone();
            for (f, e) in fs {
                let base = match f {
                    LinForm::Shift { var, point } => &xs[*var] - point,
                    LinForm::Diff { i, j } => &xs[*i] - &xs[*j],
                };
                t = &t * &base.powi(*e)?;
            }
            total += &t;
        }
        Ok(total)
    }
}

/// Where a not-yet-integrated coordinate is supported.
#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    Point(Scalar),
    /// Circle with center and squared radius.
    Circle(Scalar, Real),
}

/// A base point of a linear factor seen from the coordinate being
/// integrated: `x_v − base`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Base {
    Const(Scalar),
    Var(usize),
}

/// The difference `s − b` of two base points: a scalar, or `sign · form`.
enum Delta {
    Scalar(Scalar),
    Form(i64, LinForm),
}

fn delta(s: &Base, b: &Base) -> Delta {
    match (s, b) {
        (Base::Const(p), Base::Const(q)) => Delta::Scalar(p - q),
        (Base::Const(p), Base::Var(i)) => Delta::Form(-1, LinForm::Shift { var: *i, point: p.clone() }),
        (Base::Var(i), Base::Const(q)) => Delta::Form(1, LinForm::Shift { var: *i, point: q.clone() }),
        (Base::Var(i), Base::Var(j)) => {
            if i < j {
                Delta::Form(1, LinForm::Diff { i: *i, j: *j })
            } else {
                Delta::Form(-1, LinForm::Diff { i: *j, j: *i })
            }
        }
    }
}

/// Taylor coefficients `[t⁰..t^order]` of `(δ + t)^e`.
fn expand_power(d: &Delta, e: i64, order: usize) -> Result<Vec<FactorSum>> {
    let mut out = Vec::with_capacity(order + 1);
    for u in 0..=order {
        let c = binomial(e, u as u64);
        if c == 0.into() {
            out.push(FactorSum::zero());
            continue;
        }
        let c = Scalar::from_bigint(c);
        let rest = e - u as i64;
        let term = match d {
            Delta::Scalar(s) => {
                if s.is_zero() && rest < 0 {
                    return Err(Error::ExpansionDomainMismatch("expansion about a singular point".into()));
                }
                FactorSum::constant(&c * &s.powi(rest)?)
            }
            Delta::Form(sign, form) => {
                let sgn = if *sign < 0 && rest.rem_euclid(2) == 1 { -1 } else { 1 };
                FactorSum::monomial(&c * &Scalar::from_int(sgn), vec![(form.clone(), rest)])
            }
        };
        out.push(term);
    }
    Ok(out)
}

/// Splits one product term into the factors in `x_v` (as base/exponent) and
/// the remaining factors together with a sign.
fn split_term(fs: &Factors, v: usize) -> (BTreeMap<Base, i64>, Factors, i64) {
    let mut bases: BTreeMap<Base, i64> = BTreeMap::new();
    let mut rest = Vec::new();
    let mut sign = 1;
    for (f, e) in fs {
        if !f.involves(v) {
            rest.push((f.clone(), *e));
            continue;
        }
        match f {
            LinForm::Shift { point, .. } => *bases.entry(Base::Const(point.clone())).or_insert(0) += e,
            LinForm::Diff { i, j } => {
                if *i == v {
                    *bases.entry(Base::Var(*j)).or_insert(0) += e;
                } else {
                    // (x_i − x_v)^e = (−1)^e (x_v − x_i)^e
                    if e.rem_euclid(2) == 1 {
                        sign = -sign;
                    }
                    *bases.entry(Base::Var(*i)).or_insert(0) += e;
                }
            }
        }
    }
    (bases, rest, sign)
}

/// Residue at `x_v = s` of `Π_b (x_v − b)^{e_b}`, the other coordinates left
/// symbolic.
fn residue_at(bases: &BTreeMap<Base, i64>, s: &Base) -> Result<FactorSum> {
    let own = bases.get(s).copied().unwrap_or(0);
    let need = -1 - own;
    if need < 0 {
        return Ok(FactorSum::zero());
    }
    let order = need as usize;
    // Power series in t = x_v − s, truncated at t^order.
    let mut series = vec![FactorSum::constant(Scalar::one())];
    series.resize(order + 1, FactorSum::zero());
    for (b, e) in bases {
        if b == s || *e == 0 {
            continue;
        }
        let exp = expand_power(&delta(s, b), *e, order)?;
        let mut next = vec![FactorSum::zero(); order + 1];
        for (i, a) in series.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, x) in exp.iter().enumerate().take(order + 1 - i) {
                if !x.is_zero() {
                    next[i + j] = next[i + j].add(&a.mul(x));
                }
            }
        }
        series = next;
    }
    Ok(series.swap_remove(order))
}

/// Relative position of a coordinate's support and a circle.
#[derive(Debug, PartialEq)]
pub(crate) enum Position {
    Inside,
    Outside,
    On,
}

pub(crate) fn point_vs_circle(p: &Scalar, c: &Scalar, r2: &Real) -> Position {
    let d2 = (p - c).norm_sqr();
    if d2.is_exact() && r2.is_exact() {
        return match d2.cmp_real(r2) {
            Ordering::Less => Position::Inside,
            Ordering::Greater => Position::Outside,
            Ordering::Equal => Position::On,
        };
    }
    let (d, r) = (d2.sqrt_f64(), r2.sqrt_f64());
    if (d - r).abs() <= 1e-12 * r.max(1.0) {
        Position::On
    } else if d < r {
        Position::Inside
    } else {
        Position::Outside
    }
}

pub(crate) fn circle_vs_circle(c2: &Scalar, rr2: &Real, c: &Scalar, r2: &Real) -> Position {
    let d2 = (c2 - c).norm_sqr();
    let zero = Real::from_ratio(0, 1);
    // inside: D + r' < r
    if cmp_sqrt_sums([&d2, rr2], [r2, &zero]) == Ordering::Less {
        return Position::Inside;
    }
    // apart: D > r + r'; or enclosing: r' > D + r
    if cmp_sqrt_sums([&d2, &zero], [r2, rr2]) == Ordering::Greater
        || cmp_sqrt_sums([rr2, &zero], [&d2, r2]) == Ordering::Greater
    {
        return Position::Outside;
    }
    Position::On
}

pub(crate) fn support_vs_circle(s: &Support, c: &Scalar, r2: &Real) -> Position {
    match s {
        Support::Point(p) => point_vs_circle(p, c, r2),
        Support::Circle(c2, rr2) => circle_vs_circle(c2, rr2, c, r2),
    }
}

/// `f ↦ (1/d!) ∂ᵈf/∂x_vᵈ` at `x_v = p`.
pub fn apply_jet(f: &FactorSum, v: usize, p: &Scalar, d: u32) -> Result<FactorSum> {
    let s = Base::Const(p.clone());
    let mut out = FactorSum::zero();
    for (fs, c) in &f.terms {
        let (mut bases, rest, sign) = split_term(fs, v);
        if bases.get(&s).copied().unwrap_or(0) < 0 {
            return Err(Error::ExpansionDomainMismatch(format!("jet at {p}, where the function has a pole")));
        }
        *bases.entry(s.clone()).or_insert(0) -= d as i64 + 1;
        let r = residue_at(&bases, &s)?;
        out = out.add(&r.mul(&FactorSum::monomial(c * &Scalar::from_int(sign), rest)));
    }
    Ok(out)
}

/// `f ↦ (1/2πi) ∮_{|x_v − c| = r} (x_v − c)^n f dx_v`, summing residues at
/// every pole enclosed by the circle. `supports[i]` locates coordinate `i`.
pub fn apply_moment(
    f: &FactorSum,
    v: usize,
    c: &Scalar,
    r2: &Real,
    n: i64,
    supports: &[Option<Support>],
) -> Result<FactorSum> {
    let center = Base::Const(c.clone());
    let mut out = FactorSum::zero();
    for (fs, coeff) in &f.terms {
        let (mut bases, rest, sign) = split_term(fs, v);
        *bases.entry(center.clone()).or_insert(0) += n;
        let mut total = FactorSum::zero();
        for (b, e) in &bases {
            if *e >= 0 {
                continue;
            }
            let inside = match b {
                Base::Const(s) => match point_vs_circle(s, c, r2) {
                    Position::Inside => true,
                    Position::Outside => false,
                    Position::On => {
                        return Err(Error::ExpansionDomainMismatch(format!(
                            "pole at {s} lies on the circle about {c}"
                        )))
                    }
                },
                Base::Var(i) => {
                    let sup = supports.get(*i).and_then(Option::as_ref).ok_or_else(|| {
                        Error::InvalidSupport(format!("coordinate {i} has no known support"))
                    })?;
                    match support_vs_circle(sup, c, r2) {
                        Position::Inside => true,
                        Position::Outside => false,
                        Position::On => {
                            return Err(Error::InvalidSupport(format!(
                                "support of coordinate {i} meets the contour of coordinate {v}"
                            )))
                        }
                    }
                }
            };
            if inside {
                total = total.add(&residue_at(&bases, b)?);
            }
        }
        out = out.add(&total.mul(&FactorSum::monomial(coeff * &Scalar::from_int(sign), rest)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Scalar {
        x.parse().unwrap()
    }

    fn r2(x: &str) -> Real {
        let r = s(x);
        r.norm_sqr()
    }

    #[test]
    fn moment_extracts_laurent_coefficient() {
        // (1/2πi)∮ z · z^{-2} dz = 1
        let f = FactorSum::shift_power(0, Scalar::zero(), -2);
        let v = apply_moment(&f, 0, &Scalar::zero(), &r2("3/2"), 1, &[None]).unwrap();
        assert_eq!(v.as_constant().unwrap(), Scalar::one());
        // entire integrand
        let g = FactorSum::shift_power(0, Scalar::zero(), 3);
        let v = apply_moment(&g, 0, &Scalar::zero(), &r2("3/2"), 1, &[None]).unwrap();
        assert_eq!(v.as_constant().unwrap(), Scalar::zero());
        // pole outside the circle
        let h = FactorSum::shift_power(0, s("2"), -1);
        let v = apply_moment(&h, 0, &Scalar::zero(), &r2("1"), 0, &[None]).unwrap();
        assert!(v.as_constant().unwrap().is_zero());
        let v = apply_moment(&h, 0, &Scalar::zero(), &r2("3"), 0, &[None]).unwrap();
        assert_eq!(v.as_constant().unwrap(), Scalar::one());
        assert!(apply_moment(&h, 0, &Scalar::zero(), &r2("2"), 0, &[None]).is_err());
    }

    #[test]
    fn moment_about_shifted_center() {
        // (1/2πi)∮_{|z−1|=1/2} (z−1)^{-1} z^2 dz = 1
        let f = FactorSum::shift_power(0, Scalar::zero(), 2);
        let v = apply_moment(&f, 0, &Scalar::one(), &r2("1/2"), -1, &[None]).unwrap();
        assert_eq!(v.as_constant().unwrap(), Scalar::one());
        // (1/2πi)∮_{|z−1|=1/2} (z−1)^{-2} z^3 dz = 3
        let f = FactorSum::shift_power(0, Scalar::zero(), 3);
        let v = apply_moment(&f, 0, &Scalar::one(), &r2("1/2"), -2, &[None]).unwrap();
        assert_eq!(v.as_constant().unwrap(), Scalar::from_int(3));
    }

    #[test]
    fn jets_are_taylor_coefficients() {
        // f = (z − 2)^{-1}; Taylor coefficients at 0 are −2^{-d-1}
        let f = FactorSum::shift_power(0, s("2"), -1);
        for d in 0..5 {
            let v = apply_jet(&f, 0, &Scalar::zero(), d).unwrap();
            assert_eq!(v.as_constant().unwrap(), -Scalar::from_int(2).powi(-(d as i64) - 1).unwrap());
        }
        assert!(apply_jet(&f, 0, &s("2"), 0).is_err());
    }

    #[test]
    fn two_variable_residues_agree_in_either_order() {
        // f(z,w) = w (z − w)^{-2}; moment in z about 0 radius 3/2 with n = 1,
        // delta in w at 1/2.
        let f = FactorSum::shift_power(1, Scalar::zero(), 1).mul(&FactorSum::diff_power(0, 1, -2));
        let supports_a = [Some(Support::Circle(Scalar::zero(), r2("3/2"))), Some(Support::Point(s("1/2")))];
        // z first
        let g = apply_moment(&f, 0, &Scalar::zero(), &r2("3/2"), 1, &supports_a).unwrap();
        let a = apply_jet(&g, 1, &s("1/2"), 0).unwrap().as_constant().unwrap();
        // w first
        let g = apply_jet(&f, 1, &s("1/2"), 0).unwrap();
        let b = apply_moment(&g, 0, &Scalar::zero(), &r2("3/2"), 1, &supports_a).unwrap();
        let b = b.as_constant().unwrap();
        // direct: residue of z · (1/2) (z − 1/2)^{-2} at z = 1/2 is 1/2
        assert_eq!(a, Scalar::from_ratio(1, 2));
        assert_eq!(a, b);
    }

    #[test]
    fn evaluation_at_points() {
        let f = FactorSum::shift_power(1, Scalar::zero(), 2).mul(&FactorSum::diff_power(1, 0, -1));
        // w² / (w − z) at z = 1, w = 3: 9/2
        assert_eq!(f.eval_at(&[s("1"), s("3")]).unwrap(), Scalar::from_ratio(9, 2));
    }
}
