//! Brute-force mode oracle, independent of the library's mode engine.
//!
//! States are sums of operator words on the vacuum, normal ordered by
//! repeated adjacent swaps `XY = YX + [X,Y]` with a bracket table encoded
//! here from scratch. Modes of composite states come from the nested
//! normal-ordered product of derivative fields,
//!
//! ```text
//! Y(u₍₋₁₋ₚ₎a′, z) = :∂⁽ᵖ⁾u(z) Y(a′, z):
//! (:A X:)₍ₙ₎ = Σ_{j<0} A₍ⱼ₎ X₍ₙ₋ⱼ₋₁₎ + Σ_{j≥0} X₍ₙ₋ⱼ₋₁₎ A₍ⱼ₎
//! (∂⁽ᵖ⁾u)₍ₙ₎ = (−1)ᵖ C(n,p) u₍ₙ₋ₚ₎
//! ```
//!
//! which never uses the iterate identity.

#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use voxfact::{GradedVector, Generator, ModeFactor, Monomial, Scalar};

#[derive(Clone, Debug)]
pub enum Kind {
    Heisenberg,
    Virasoro(BigRational),
    Sl2(BigRational),
}

/// Oracle algebra with memo tables for word application and nested modes.
pub struct Algebra {
    kind: Kind,
    applied: RefCell<HashMap<(Op, Word), Fock>>,
    modes: RefCell<HashMap<(Vec<(Generator, i64)>, i64, Word), Fock>>,
}

type Op = (Generator, i64); // conformal mode g_n
type Word = Vec<Op>;
pub type Fock = BTreeMap<Word, BigRational>;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn binom(n: i64, k: i64) -> BigRational {
    if k < 0 {
        return BigRational::zero();
    }
    let mut r = BigRational::one();
    for j in 0..k {
        r = r * rat(n - j) / rat(j + 1);
    }
    r
}

fn weight(g: Generator) -> i64 {
    if g == Generator::L {
        2
    } else {
        1
    }
}

fn gen_rank(g: Generator) -> u8 {
    match g {
        Generator::Alpha => 0,
        Generator::L => 1,
        Generator::E => 2,
        Generator::H => 3,
        Generator::F => 4,
    }
}

impl Algebra {
    pub fn new(kind: Kind) -> Self {
        Algebra { kind, applied: RefCell::default(), modes: RefCell::default() }
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    fn is_creation(&self, (g, n): Op) -> bool {
        n <= -weight(g)
    }

    /// Sort key; creation operators first in PBW order, everything else after.
    fn key(&self, op: Op) -> (u8, i64, u8) {
        if self.is_creation(op) {
            (0, op.1, gen_rank(op.0))
        } else {
            (1, 0, 0)
        }
    }

    /// `[x_m, y_n]` as modes plus a central scalar.
    fn bracket(&self, (x, m): Op, (y, n): Op) -> (Vec<(BigRational, Op)>, BigRational) {
        let d = m + n == 0;
        match &self.kind {
            Kind::Heisenberg => (vec![], if d { rat(m) } else { rat(0) }),
            Kind::Virasoro(c) => {
                let mut v = vec![];
                if m != n {
                    v.push((rat(m - n), (Generator::L, m + n)));
                }
                let cen = if d { c * rat(m * m * m - m) / rat(12) } else { rat(0) };
                (v, cen)
            }
            Kind::Sl2(k) => {
                use Generator::*;
                // structure constants of sl2 in the basis e, h, f
                let lie = match (x, y) {
                    (E, F) => Some((1, H)),
                    (F, E) => Some((-1, H)),
                    (H, E) => Some((2, E)),
                    (E, H) => Some((-2, E)),
                    (H, F) => Some((-2, F)),
                    (F, H) => Some((2, F)),
                    _ => None,
                };
                let form = match (x, y) {
                    (E, F) | (F, E) => 1,
                    (H, H) => 2,
                    _ => 0,
                };
                let v = lie.map(|(c, g)| vec![(rat(c), (g, m + n))]).unwrap_or_default();
                let cen = if d { k * rat(m * form) } else { rat(0) };
                (v, cen)
            }
        }
    }

    /// Normal orders `word |0⟩`.
    pub fn normal_order(&self, word: Word) -> Fock {
        let mut out = Fock::new();
        let mut work: Vec<(BigRational, Word)> = vec![(BigRational::one(), word)];
        while let Some((c, w)) = work.pop() {
            if c.is_zero() {
                continue;
            }
            if let Some(last) = w.last() {
                if !self.is_creation(*last) {
                    continue; // kills the vacuum
                }
            }
            let bad = (0..w.len().saturating_sub(1)).find(|&i| self.key(w[i]) > self.key(w[i + 1]));
            match bad {
                None => {
                    let e = out.entry(w).or_insert_with(BigRational::zero);
                    *e += c;
                }
                Some(i) => {
                    let mut swapped = w.clone();
                    swapped.swap(i, i + 1);
                    work.push((c.clone(), swapped));
                    let (modes, central) = self.bracket(w[i], w[i + 1]);
                    for (k, op) in modes {
                        let mut nw = w[..i].to_vec();
                        nw.push(op);
                        nw.extend_from_slice(&w[i + 2..]);
                        work.push((&c * k, nw));
                    }
                    if !central.is_zero() {
                        let mut nw = w[..i].to_vec();
                        nw.extend_from_slice(&w[i + 2..]);
                        work.push((&c * central, nw));
                    }
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Applies the conformal mode `op` to a Fock vector.
    pub fn apply(&self, op: Op, v: &Fock) -> Fock {
        let mut out = Fock::new();
        for (w, c) in v {
            let key = (op, w.clone());
            let cached = self.applied.borrow().get(&key).cloned();
            let r = match cached {
                Some(r) => r,
                None => {
                    let mut nw = vec![op];
                    nw.extend_from_slice(w);
                    let r = self.normal_order(nw);
                    self.applied.borrow_mut().insert(key, r.clone());
                    r
                }
            };
            for (w2, c2) in r {
                *out.entry(w2).or_insert_with(BigRational::zero) += c * c2;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Field mode `u₍ₖ₎ = u_{k−w+1}`.
    fn field(&self, g: Generator, k: i64, v: &Fock) -> Fock {
        self.apply((g, k - weight(g) + 1), v)
    }

    /// `(∂⁽ᵖ⁾u)₍ₙ₎ v`.
    fn deriv_field(&self, g: Generator, p: i64, n: i64, v: &Fock) -> Fock {
        let c = binom(n, p) * rat(if p % 2 == 0 { 1 } else { -1 });
        if c.is_zero() {
            return Fock::new();
        }
        scale(&self.field(g, n - p, v), &c)
    }

    /// Mode `n` of the nested normal-ordered product of `fields` (each a
    /// generator with derivative order `p`), applied to `v`.
    fn nested(&self, fields: &[(Generator, i64)], n: i64, v: &Fock) -> Fock {
        let mut out = Fock::new();
        for (w, c) in v {
            let key = (fields.to_vec(), n, w.clone());
            let cached = self.modes.borrow().get(&key).cloned();
            let r = match cached {
                Some(r) => r,
                None => {
                    let single: Fock = [(w.clone(), BigRational::one())].into_iter().collect();
                    let r = self.nested_uncached(fields, n, &single);
                    self.modes.borrow_mut().insert(key, r.clone());
                    r
                }
            };
            add_into(&mut out, &scale(&r, c));
        }
        out
    }

    fn nested_uncached(&self, fields: &[(Generator, i64)], n: i64, v: &Fock) -> Fock {
        let Some((&(g, p), rest)) = fields.split_first() else {
            return if n == -1 { v.clone() } else { Fock::new() };
        };
        if v.is_empty() {
            return Fock::new();
        }
        let deg_rest: i64 = rest.iter().map(|(h, q)| weight(*h) + q).sum();
        let deg_v = v.keys().map(|w| fock_degree(w)).max().unwrap();
        let mut out = Fock::new();
        // creation part of A: j < 0
        for j in (n - deg_rest - deg_v)..0 {
            let inner = self.nested(rest, n - j - 1, v);
            if !inner.is_empty() {
                add_into(&mut out, &self.deriv_field(g, p, j, &inner));
            }
        }
        // annihilation part of A: j ≥ 0
        for j in 0..(deg_v + weight(g) + p) {
            let av = self.deriv_field(g, p, j, v);
            if !av.is_empty() {
                add_into(&mut out, &self.nested(rest, n - j - 1, &av));
            }
        }
        out
    }

    /// `a₍ₙ₎b` for a basis monomial `a`.
    pub fn mode(&self, a: &Monomial, n: i64, b: &GradedVector) -> GradedVector {
        let fields: Vec<(Generator, i64)> =
            a.factors().iter().map(|f| (f.gen, f.n as i64 - weight(f.gen))).collect();
        to_graded(&self.nested(&fields, n, &from_graded(b)))
    }
}

fn fock_degree(w: &Word) -> i64 {
    w.iter().map(|(_, n)| -n).sum()
}

fn scale(v: &Fock, c: &BigRational) -> Fock {
    v.iter().map(|(w, x)| (w.clone(), x * c)).collect()
}

fn add_into(acc: &mut Fock, v: &Fock) {
    for (w, c) in v {
        *acc.entry(w.clone()).or_insert_with(BigRational::zero) += c;
    }
    acc.retain(|_, v| !v.is_zero());
}

pub fn from_graded(v: &GradedVector) -> Fock {
    let mut out = Fock::new();
    for (m, c) in v.terms() {
        let g = c.as_exact().expect("oracle handles real rational coefficients");
        assert!(g.im.is_zero());
        let w: Word = m.factors().iter().map(|f| (f.gen, -(f.n as i64))).collect();
        out.insert(w, g.re.clone());
    }
    out
}

pub fn to_graded(v: &Fock) -> GradedVector {
    let mut out = GradedVector::zero();
    for (w, c) in v {
        let fs: Vec<ModeFactor> = w.iter().map(|(g, n)| ModeFactor::new(*g, (-n) as u32)).collect();
        let m = Monomial::new(fs.clone());
        assert_eq!(m.factors(), &fs[..], "oracle word not in PBW order");
        out.add_term(m, Scalar::from_rational(c.clone()));
    }
    out
}

/// L₋₁ by its action as an operator word, for the Virasoro algebra, or by the
/// Sugawara-free derivation rule written out as words otherwise.
pub fn translate(alg: &Algebra, b: &GradedVector) -> GradedVector {
    match alg.kind() {
        Kind::Virasoro(_) => to_graded(&alg.apply((Generator::L, -1), &from_graded(b))),
        _ => {
            let mut out = Fock::new();
            for (w, c) in from_graded(b) {
                for i in 0..w.len() {
                    let (g, n) = w[i];
                    let k = -n - weight(g) + 1;
                    let mut nw = w.clone();
                    nw[i] = (g, n - 1);
                    let v = alg.normal_order(nw);
                    add_into(&mut out, &scale(&v, &(c.clone() * rat(k))));
                }
            }
            to_graded(&out)
        }
    }
}
