//! Exact Gaussian-rational and approximate complex scalars.
//!
//! [`Scalar`] is a two-variant number: exact values live in ℚ(i) with
//! arbitrary-precision numerators and denominators, approximate values are
//! `Complex64`. Arithmetic between two exact values stays exact; as soon as an
//! approximate operand is involved the result is approximate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Relative tolerance used when comparing approximate vectors.
pub const APPROX_REL_TOL: f64 = 1e-9;

/// An element of ℚ(i).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat { re, im: BigRational::zero() }
    }

    pub fn zero() -> Self {
        GaussRat::real(BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRat::real(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussRat { re: &self.re / &n, im: -(&self.im / &n) })
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    fn add_ref(&self, o: &Self) -> Self {
        GaussRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    fn sub_ref(&self, o: &Self) -> Self {
        GaussRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    fn mul_ref(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRat::real(&self.re * &o.re);
        }
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

pub(crate) fn rat_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Huge numerators/denominators: scale through bit lengths.
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    let (n2, d2) = if shift > 0 {
        (n.clone(), d.clone() << (shift as usize))
    } else {
        (n.clone() << ((-shift) as usize), d.clone())
    };
    let base = BigRational::new(n2, d2).to_f64().unwrap_or(0.0);
    base * 2f64.powi(shift as i32)
}

/// A complex scalar, either exact (Gaussian rational) or approximate.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(GaussRat),
    Approx(Complex64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(GaussRat::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(GaussRat::one())
    }

    pub fn i() -> Self {
        Scalar::Exact(GaussRat::new(BigRational::zero(), BigRational::one()))
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(GaussRat::real(BigRational::from_integer(BigInt::from(n))))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Scalar::Exact(GaussRat::real(BigRational::from_integer(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Exact(GaussRat::real(BigRational::new(BigInt::from(num), BigInt::from(den))))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar::Exact(GaussRat::real(r))
    }

    pub fn gaussian(re: BigRational, im: BigRational) -> Self {
        Scalar::Exact(GaussRat::new(re, im))
    }

    pub fn approx(re: f64, im: f64) -> Self {
        Scalar::Approx(Complex64::new(re, im))
    }

    pub fn from_c64(z: Complex64) -> Self {
        Scalar::Approx(z)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&GaussRat> {
        match self {
            Scalar::Exact(g) => Some(g),
            Scalar::Approx(_) => None,
        }
    }

    /// Exact zero test for exact values; approximate values are zero only
    /// when both parts are literally `0.0`.
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(g) => g.is_zero(),
            Scalar::Approx(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(g) => g.is_one(),
            Scalar::Approx(z) => z.re == 1.0 && z.im == 0.0,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Exact(g) => g.to_c64(),
            Scalar::Approx(z) => *z,
        }
    }

    pub fn to_approx(&self) -> Self {
        Scalar::Approx(self.to_c64())
    }

    pub fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    pub fn conj(&self) -> Self {
        match self {
            Scalar::Exact(g) => Scalar::Exact(g.conj()),
            Scalar::Approx(z) => Scalar::Approx(z.conj()),
        }
    }

    /// |z|² as a real number, exact when `self` is exact.
    pub fn norm_sqr(&self) -> Real {
        match self {
            Scalar::Exact(g) => Real::Exact(g.norm_sqr()),
            Scalar::Approx(z) => Real::Approx(z.norm_sqr()),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        match self {
            Scalar::Exact(g) => g.recip().map(Scalar::Exact).ok_or(Error::DivisionByZero),
            Scalar::Approx(z) => {
                if z.norm_sqr() == 0.0 {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(Scalar::Approx(z.inv()))
                }
            }
        }
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn powi(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.recip()?.powi(-e);
        }
        match self {
            Scalar::Approx(z) => Ok(Scalar::Approx(z.powi(e as i32))),
            Scalar::Exact(_) => {
                let mut base = self.clone();
                let mut acc = Scalar::one();
                let mut e = e as u64;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = &acc * &base;
                    }
                    e >>= 1;
                    if e > 0 {
                        base = &base * &base;
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Approximate equality with relative tolerance `rel` against the larger
    /// magnitude (absolute `rel` near zero). Exact pairs compare exactly.
    pub fn approx_eq(&self, other: &Scalar, rel: f64) -> bool {
        if let (Scalar::Exact(a), Scalar::Exact(b)) = (self, other) {
            return a == b;
        }
        let a = self.to_c64();
        let b = other.to_c64();
        let scale = a.norm().max(b.norm()).max(1.0);
        (a - b).norm() <= rel * scale
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            (Scalar::Exact(_), Scalar::Approx(_)) => Ordering::Less,
            (Scalar::Approx(_), Scalar::Exact(_)) => Ordering::Greater,
            (Scalar::Approx(a), Scalar::Approx(b)) => {
                a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
            }
        }
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.total_cmp(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Structural total order (exact values first); used only for canonical
/// sorting, it carries no arithmetic meaning.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}

impl std::hash::Hash for Scalar {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Scalar::Exact(g) => {
                0u8.hash(state);
                g.hash(state);
            }
            Scalar::Approx(z) => {
                1u8.hash(state);
                z.re.to_bits().hash(state);
                z.im.to_bits().hash(state);
            }
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $exact:ident, $op:tt) => {
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.$exact(b)),
                    _ => Scalar::Approx(self.to_c64() $op rhs.to_c64()),
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, add_ref, +);
binop!(Sub, sub, sub_ref, -);
binop!(Mul, mul, mul_ref, *);

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    /// Panics on division by exact zero; use [`Scalar::recip`] to handle it.
    fn div(self, rhs: &'a Scalar) -> Scalar {
        self * &rhs.recip().expect("division by zero")
    }
}

impl Div<Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        &self / &rhs
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(GaussRat { re: -g.re.clone(), im: -g.im.clone() }),
            Scalar::Approx(z) => Scalar::Approx(-z),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = &*self * rhs;
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<Complex64> for Scalar {
    fn from(z: Complex64) -> Self {
        Scalar::Approx(z)
    }
}

/// Formats a rational as `p` or `p/q`.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `-p`, `p/q` or a decimal such as `0.25` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.trim_start().starts_with('-');
        let int_part = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| bad())?
        };
        let frac_part = BigInt::from_str(frac).map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = int_part.abs() * &scale + frac_part;
        let v = BigRational::new(if neg { -mag } else { mag }, scale);
        return Ok(v);
    }
    Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?))
}

impl FromStr for Scalar {
    type Err = Error;

    /// Accepts `a`, `bi`, `a+bi`, `a-bi` where `a`, `b` are rationals (`p/q`
    /// or decimals). A bare `i` means one.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        if let Some(body) = t.strip_suffix('i') {
            // Split at the last sign that is not the leading one.
            let split = body
                .char_indices()
                .skip(1)
                .filter(|(_, c)| *c == '+' || *c == '-')
                .map(|(i, _)| i)
                .last();
            let (re_s, im_s) = match split {
                Some(i) => (&body[..i], &body[i..]),
                None => ("0", body),
            };
            let im_s = match im_s {
                "" | "+" => "1",
                "-" => "-1",
                other => other.strip_prefix('+').unwrap_or(other),
            };
            let re = parse_rational(re_s)?;
            let im = parse_rational(im_s)?;
            return Ok(Scalar::gaussian(re, im));
        }
        Ok(Scalar::from_rational(parse_rational(&t)?))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(g) => {
                if g.im.is_zero() {
                    write!(f, "{}", format_rational(&g.re))
                } else if g.re.is_zero() {
                    write!(f, "{}i", format_rational(&g.im))
                } else if g.im.is_negative() {
                    write!(f, "{}-{}i", format_rational(&g.re), format_rational(&-g.im.clone()))
                } else {
                    write!(f, "{}+{}i", format_rational(&g.re), format_rational(&g.im))
                }
            }
            Scalar::Approx(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

/// A nonnegative-or-signed real number, exact or approximate. Used for
/// squared radii and squared distances, which stay rational under the
/// affine maps even when the radii themselves do not.
#[derive(Clone, Debug)]
pub enum Real {
    Exact(BigRational),
    Approx(f64),
}

impl Real {
    pub fn from_ratio(n: i64, d: i64) -> Self {
        Real::Exact(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(r) => rat_to_f64(r),
            Real::Approx(v) => *v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn mul(&self, o: &Real) -> Real {
        match (self, o) {
            (Real::Exact(a), Real::Exact(b)) => Real::Exact(a * b),
            _ => Real::Approx(self.to_f64() * o.to_f64()),
        }
    }

    /// Square root as a float.
    pub fn sqrt_f64(&self) -> f64 {
        self.to_f64().max(0.0).sqrt()
    }

    pub fn cmp_real(&self, o: &Real) -> Ordering {
        match (self, o) {
            (Real::Exact(a), Real::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&o.to_f64()),
        }
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_real(other) == Ordering::Equal
    }
}

impl Eq for Real {}

impl std::hash::Hash for Real {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Real::Exact(r) => r.hash(state),
            Real::Approx(v) => v.to_bits().hash(state),
        }
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Real {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_real(other)
    }
}

impl Real {
    /// `√self` when it is an exact rational.
    pub fn exact_sqrt(&self) -> Option<BigRational> {
        let Real::Exact(r) = self else { return None };
        if r.is_negative() {
            return None;
        }
        let (n, d) = (r.numer().sqrt(), r.denom().sqrt());
        (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| BigRational::new(n, d))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(r) => f.write_str(&format_rational(r)),
            Real::Approx(v) => write!(f, "{v}"),
        }
    }
}

/// Compares `√a₁ + √a₂` with `√b₁ + √b₂` for nonnegative reals given by their
/// squares. Exact inputs are decided exactly by repeated squaring; any
/// approximate input falls back to floating point.
pub fn cmp_sqrt_sums(lhs: [&Real; 2], rhs: [&Real; 2]) -> Ordering {
    let all = [lhs[0], lhs[1], rhs[0], rhs[1]];
    if all.iter().any(|r| !r.is_exact()) {
        let l = lhs[0].sqrt_f64() + lhs[1].sqrt_f64();
        let r = rhs[0].sqrt_f64() + rhs[1].sqrt_f64();
        return l.total_cmp(&r);
    }
    let q = |r: &Real| match r {
        Real::Exact(v) => v.clone(),
        Real::Approx(_) => unreachable!(),
    };
    let (a1, a2, b1, b2) = (q(lhs[0]), q(lhs[1]), q(rhs[0]), q(rhs[1]));
    // Both sides are nonnegative, so compare squares:
    // (a1 + a2 − b1 − b2) + √(4 a1 a2) − √(4 b1 b2).
    let four = BigRational::from_integer(BigInt::from(4));
    let u = &a1 + &a2 - &b1 - &b2;
    let p = &four * &a1 * &a2;
    let qq = &four * &b1 * &b2;
    sign_rat_plus_sqrt_diff(&u, &p, &qq)
}

/// Sign of `u + √p − √q` for rational `u` and `p, q ≥ 0`.
fn sign_rat_plus_sqrt_diff(u: &BigRational, p: &BigRational, q: &BigRational) -> Ordering {
    let s = p.cmp(q); // sign of √p − √q
    let su = u.cmp(&BigRational::zero());
    match (su, s) {
        (Ordering::Equal, s) => s,
        (su, Ordering::Equal) => su,
        (a, b) if a == b => a,
        _ => {
            // Opposite signs: compare |u| with |√p − √q|, i.e. u² with
            // p + q − 2√(pq). sign(u² − p − q + √(4pq)).
            let v = u * u - p - q;
            let r = BigRational::from_integer(BigInt::from(4)) * p * q;
            let mag = if v >= BigRational::zero() {
                if v.is_zero() && r.is_zero() {
                    Ordering::Equal
                } else {
                    Ordering::Greater
                }
            } else {
                // v < 0: sign(√r − |v|) = sign(r − v²)
                r.cmp(&(&v * &v))
            };
            // mag compares |u| against |√p − √q|; the larger one wins.
            match mag {
                Ordering::Greater => su,
                Ordering::Less => s,
                Ordering::Equal => Ordering::Equal,
            }
        }
    }
}

/// Generalized binomial coefficient `C(n, k)` for integer `n` (possibly
/// negative) and `k ≥ 0`.
pub fn binomial(n: i64, k: u64) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..k {
        num *= BigInt::from(n - j as i64);
        den *= BigInt::from(j + 1);
    }
    num / den
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}
