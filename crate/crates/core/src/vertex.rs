//! Vertex-algebra presets on PBW Fock bases.
//!
//! Generator modes act by commuting through a monomial with the preset's
//! bracket until they either reach canonical position or the vacuum. Modes of
//! composite states `a₍ₙ₎b` are computed with the iterate (Borcherds)
//! identity by peeling off the leading PBW factor of `a`:
//!
//! ```text
//! (u₍ⱼ₎a′)₍ₙ₎b = Σ_{i≥0} (−1)^i C(j,i) [ u₍ⱼ₋ᵢ₎ a′₍ₙ₊ᵢ₎ b − (−1)^j a′₍ⱼ₊ₙ₋ᵢ₎ u₍ᵢ₎ b ]
//! ```
//!
//! Both sums are finite because annihilation modes kill states of bounded
//! degree. Basis-level results are memoized; the caches are invisible to
//! callers since every operation is a pure function of its inputs.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grading::{GradedVector, Generator, ModeFactor, Monomial};
use crate::scalar::{binomial, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PresetKind {
    Heisenberg,
    Virasoro { c: Scalar },
    AffineSl2 { level: Scalar },
}

/// Serialized preset selection: `{"preset":"virasoro","c":"1/2"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresetSpec {
    pub preset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
}

/// Linear combination of generator modes plus a central scalar.
struct Bracket {
    modes: Vec<(Scalar, Generator, i64)>,
    central: Scalar,
}

type ModeKey = (Generator, i64, Monomial);
type StateKey = (Monomial, i64, Monomial);
type ApproxVec = Arc<Vec<(Monomial, Complex64)>>;

#[derive(Default)]
struct Caches {
    apply: RwLock<HashMap<ModeKey, Arc<GradedVector>>>,
    state: RwLock<HashMap<StateKey, Arc<GradedVector>>>,
    state_approx: RwLock<HashMap<StateKey, ApproxVec>>,
}

/// One of the built-in vertex algebras together with its mode engine.
#[derive(Clone)]
pub struct Preset {
    kind: PresetKind,
    caches: Arc<Caches>,
}

impl fmt::Debug for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Preset").field("kind", &self.kind).finish()
    }
}

impl PartialEq for Preset {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Preset {
    pub fn new(kind: PresetKind) -> Result<Self> {
        match &kind {
            PresetKind::Virasoro { c } if !c.is_exact() => {
                return Err(Error::Config("central charge must be exact".into()))
            }
            PresetKind::AffineSl2 { level } if !level.is_exact() => {
                return Err(Error::Config("level must be exact".into()))
            }
            _ => {}
        }
        Ok(Preset { kind, caches: Arc::default() })
    }

    pub fn heisenberg() -> Self {
        Preset::new(PresetKind::Heisenberg).expect("valid preset")
    }

    pub fn virasoro(c: Scalar) -> Result<Self> {
        Preset::new(PresetKind::Virasoro { c })
    }

    pub fn affine_sl2(level: Scalar) -> Result<Self> {
        Preset::new(PresetKind::AffineSl2 { level })
    }

    pub fn from_spec(spec: &PresetSpec) -> Result<Self> {
        let parse = |s: &Option<String>, default: &str| -> Result<Scalar> {
            s.as_deref()
                .unwrap_or(default)
                .parse()
                .map_err(|e| Error::Config(format!("{e}")))
        };
        match spec.preset.as_str() {
            "heisenberg" | "free_boson" => Ok(Preset::heisenberg()),
            "virasoro" => Preset::virasoro(parse(&spec.c, "1/2")?),
            "affine_sl2" => Preset::affine_sl2(parse(&spec.level, "1")?),
            other => Err(Error::Config(format!("unknown preset `{other}`"))),
        }
    }

    pub fn spec(&self) -> PresetSpec {
        match &self.kind {
            PresetKind::Heisenberg => PresetSpec { preset: "heisenberg".into(), c: None, level: None },
            PresetKind::Virasoro { c } => {
                PresetSpec { preset: "virasoro".into(), c: Some(c.to_string()), level: None }
            }
            PresetKind::AffineSl2 { level } => {
                PresetSpec { preset: "affine_sl2".into(), c: None, level: Some(level.to_string()) }
            }
        }
    }

    pub fn kind(&self) -> &PresetKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PresetKind::Heisenberg => "heisenberg",
            PresetKind::Virasoro { .. } => "virasoro",
            PresetKind::AffineSl2 { .. } => "affine_sl2",
        }
    }

    pub fn generators(&self) -> &'static [Generator] {
        match self.kind {
            PresetKind::Heisenberg => &[Generator::Alpha],
            PresetKind::Virasoro { .. } => &[Generator::L],
            PresetKind::AffineSl2 { .. } => &[Generator::E, Generator::H, Generator::F],
        }
    }

    pub fn has_generator(&self, g: Generator) -> bool {
        self.generators().contains(&g)
    }

    pub fn generator_by_symbol(&self, s: &str) -> Result<Generator> {
        Generator::from_symbol(s)
            .filter(|g| self.has_generator(*g))
            .ok_or_else(|| Error::UnknownGenerator(s.to_string(), self.name().to_string()))
    }

    /// Smallest `n` such that `g_{-n}` appears in PBW monomials.
    pub fn creation_floor(&self, g: Generator) -> u32 {
        g.weight()
    }

    /// The state `g_{-w}|0⟩` of the generating field.
    pub fn generator_state(&self, g: Generator) -> GradedVector {
        GradedVector::basis(Monomial::new(vec![ModeFactor::new(g, g.weight())]))
    }

    /// Conformal vector for the Virasoro preset.
    pub fn omega(&self) -> Option<GradedVector> {
        matches!(self.kind, PresetKind::Virasoro { .. }).then(|| self.generator_state(Generator::L))
    }

    fn check_monomial(&self, m: &Monomial) -> Result<()> {
        for f in m.factors() {
            if !self.has_generator(f.gen) || f.n < self.creation_floor(f.gen) {
                return Err(Error::BasisMismatch(self.name().into(), m.to_string()));
            }
        }
        Ok(())
    }

    pub fn check_vector(&self, v: &GradedVector) -> Result<()> {
        v.terms().try_for_each(|(m, _)| self.check_monomial(m))
    }

    /// All PBW monomials of the given degree, in basis order.
    pub fn basis(&self, degree: i64) -> Vec<Monomial> {
        if degree < 0 {
            return Vec::new();
        }
        let d = degree as u32;
        let mut factors: Vec<ModeFactor> = self
            .generators()
            .iter()
            .flat_map(|&g| (self.creation_floor(g)..=d.max(1)).map(move |n| ModeFactor::new(g, n)))
            .filter(|f| f.n <= d)
            .collect();
        factors.sort();
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(fs: &[ModeFactor], start: usize, left: u32, cur: &mut Vec<ModeFactor>, out: &mut Vec<Monomial>) {
            if left == 0 {
                out.push(Monomial::from_sorted(cur.clone()));
                return;
            }
            for i in start..fs.len() {
                if fs[i].n <= left {
                    cur.push(fs[i]);
                    rec(fs, i, left - fs[i].n, cur, out);
                    cur.pop();
                }
            }
        }
        rec(&factors, 0, d, &mut cur, &mut out);
        out.sort();
        out
    }

    /// Every basis monomial with degree in `lo..=hi`.
    pub fn basis_up_to(&self, lo: i64, hi: i64) -> Vec<Monomial> {
        (lo..=hi).flat_map(|d| self.basis(d)).collect()
    }

    fn bracket(&self, x: Generator, m: i64, y: Generator, n: i64) -> Bracket {
        let delta = m + n == 0;
        let mut modes = Vec::new();
        let mut central = Scalar::zero();
        match &self.kind {
            PresetKind::Heisenberg => {
                if delta {
                    central = Scalar::from_int(m);
                }
            }
            PresetKind::Virasoro { c } => {
                if m != n {
                    modes.push((Scalar::from_int(m - n), Generator::L, m + n));
                }
                if delta {
                    central = c * &Scalar::from_ratio(m * m * m - m, 12);
                }
            }
            PresetKind::AffineSl2 { level } => {
                use Generator::{E, F, H};
                let lie: Option<(i64, Generator)> = match (x, y) {
                    (E, F) => Some((1, H)),
                    (F, E) => Some((-1, H)),
                    (H, E) => Some((2, E)),
                    (E, H) => Some((-2, E)),
                    (H, F) => Some((-2, F)),
                    (F, H) => Some((2, F)),
                    _ => None,
                };
                if let Some((c, g)) = lie {
                    modes.push((Scalar::from_int(c), g, m + n));
                }
                if delta {
                    // Trace form: κ(e,f) = κ(f,e) = level, κ(h,h) = 2·level.
                    let k = match (x, y) {
                        (E, F) | (F, E) => 1,
                        (H, H) => 2,
                        _ => 0,
                    };
                    if k != 0 {
                        central = level * &Scalar::from_int(m * k);
                    }
                }
            }
        }
        Bracket { modes, central }
    }

    /// Applies the conformal mode `g_n` to a basis monomial.
    fn apply_mono(&self, g: Generator, n: i64, mono: &Monomial) -> Arc<GradedVector> {
        let key = (g, n, mono.clone());
        if let Some(v) = self.caches.apply.read().unwrap().get(&key) {
            return v.clone();
        }
        let v = Arc::new(self.apply_mono_uncached(g, n, mono));
        self.caches.apply.write().unwrap().insert(key, v.clone());
        v
    }

    fn apply_mono_uncached(&self, g: Generator, n: i64, mono: &Monomial) -> GradedVector {
        let creation = n <= -(self.creation_floor(g) as i64);
        let candidate = creation.then(|| ModeFactor::new(g, (-n) as u32));
        let Some((head, rest)) = mono.split_first() else {
            return match candidate {
                Some(f) => GradedVector::basis(Monomial::from_sorted(vec![f])),
                None => GradedVector::zero(),
            };
        };
        if let Some(f) = candidate {
            if f <= head {
                return GradedVector::basis(mono.prepend(f));
            }
        }
        // g_n X rest = X (g_n rest) + [g_n, X] rest
        let mut out = GradedVector::zero();
        let inner = self.apply_mono(g, n, &rest);
        for (m, c) in inner.terms() {
            out.add_scaled(&self.apply_mono(head.gen, -(head.n as i64), m), c);
        }
        let br = self.bracket(g, n, head.gen, -(head.n as i64));
        for (c, h, k) in &br.modes {
            out.add_scaled(&self.apply_mono(*h, *k, &rest), c);
        }
        if !br.central.is_zero() {
            out.add_term(rest, br.central);
        }
        out
    }

    /// Applies the conformal mode `g_n` (degree shift `−n`) to `b`.
    pub fn generator_mode_apply(&self, g: Generator, n: i64, b: &GradedVector) -> Result<GradedVector> {
        if !self.has_generator(g) {
            return Err(Error::UnknownGenerator(g.symbol().into(), self.name().into()));
        }
        self.check_vector(b)?;
        Ok(self.apply_unchecked(g, n, b))
    }

    /// Symbol-keyed variant of [`Preset::generator_mode_apply`].
    pub fn generator_mode_apply_symbol(&self, g: &str, n: i64, b: &GradedVector) -> Result<GradedVector> {
        let g = self.generator_by_symbol(g)?;
        self.generator_mode_apply(g, n, b)
    }

    fn apply_unchecked(&self, g: Generator, n: i64, b: &GradedVector) -> GradedVector {
        let mut out = GradedVector::zero();
        for (m, c) in b.terms() {
            if n > m.degree() {
                continue;
            }
            out.add_scaled(&self.apply_mono(g, n, m), c);
        }
        out
    }

    /// Vertex-algebra mode `u₍ₖ₎ = u_{k−w+1}` of a generating field.
    fn field_mode(&self, g: Generator, k: i64, b: &GradedVector) -> GradedVector {
        self.apply_unchecked(g, k - g.weight() as i64 + 1, b)
    }

    /// `a₍ₙ₎b` for basis monomials.
    fn mode_basis(&self, a: &Monomial, n: i64, b: &Monomial) -> Arc<GradedVector> {
        let key = (a.clone(), n, b.clone());
        if let Some(v) = self.caches.state.read().unwrap().get(&key) {
            return v.clone();
        }
        let v = Arc::new(self.mode_basis_uncached(a, n, b));
        self.caches.state.write().unwrap().insert(key, v.clone());
        v
    }

    fn mode_basis_uncached(&self, a: &Monomial, n: i64, b: &Monomial) -> GradedVector {
        // Degree of the result would be negative.
        if a.degree() + b.degree() - n - 1 < 0 {
            return GradedVector::zero();
        }
        let Some((head, rest)) = a.split_first() else {
            return if n == -1 { GradedVector::basis(b.clone()) } else { GradedVector::zero() };
        };
        let u = head.gen;
        let w = u.weight() as i64;
        let j = -(head.n as i64) + w - 1;
        let bvec = GradedVector::basis(b.clone());
        let mut out = GradedVector::zero();

        // Σ_i (−1)^i C(j,i) u₍ⱼ₋ᵢ₎ (a′₍ₙ₊ᵢ₎ b); a′₍ₖ₎b = 0 once k ≥ deg a′ + deg b.
        let first_terms = rest.degree() + b.degree() - n;
        for i in 0..first_terms.max(0) {
            let coef = binomial(j, i as u64);
            if coef == 0.into() {
                continue;
            }
            let inner = self.mode_basis(&rest, n + i, b);
            if inner.is_zero() {
                continue;
            }
            let sign = if i % 2 == 0 { 1 } else { -1 };
            let c = Scalar::from_bigint(coef * sign);
            out.add_scaled(&self.field_mode(u, j - i, &inner), &c);
        }

        // −(−1)^j Σ_i (−1)^i C(j,i) a′₍ⱼ₊ₙ₋ᵢ₎ (u₍ᵢ₎ b); u₍ᵢ₎b = 0 once i ≥ deg b + w.
        let sign_j = if j.rem_euclid(2) == 0 { 1 } else { -1 };
        for i in 0..(b.degree() + w) {
            let coef = binomial(j, i as u64);
            if coef == 0.into() {
                continue;
            }
            let ub = self.field_mode(u, i, &bvec);
            if ub.is_zero() {
                continue;
            }
            let sign = if i % 2 == 0 { 1 } else { -1 };
            let c = Scalar::from_bigint(coef * (-sign_j * sign));
            for (m, x) in ub.terms() {
                out.add_scaled(&self.mode_basis(&rest, j + n - i, m), &(&c * x));
            }
        }
        out
    }

    fn mode_basis_approx(&self, a: &Monomial, n: i64, b: &Monomial) -> ApproxVec {
        let key = (a.clone(), n, b.clone());
        if let Some(v) = self.caches.state_approx.read().unwrap().get(&key) {
            return v.clone();
        }
        let exact = self.mode_basis(a, n, b);
        let v: ApproxVec = Arc::new(exact.terms().map(|(m, c)| (m.clone(), c.to_c64())).collect());
        self.caches.state_approx.write().unwrap().insert(key, v.clone());
        v
    }

    /// `a₍ₙ₎b`. Exact when both inputs are exact.
    pub fn state_mode(&self, a: &GradedVector, n: i64, b: &GradedVector) -> Result<GradedVector> {
        self.check_vector(a)?;
        self.check_vector(b)?;
        Ok(self.state_mode_unchecked(a, n, b))
    }

    pub(crate) fn state_mode_unchecked(&self, a: &GradedVector, n: i64, b: &GradedVector) -> GradedVector {
        let mut out = GradedVector::zero();
        for (am, ac) in a.terms() {
            for (bm, bc) in b.terms() {
                if am.degree() + bm.degree() - n - 1 < 0 {
                    continue;
                }
                let c = ac * bc;
                match c {
                    Scalar::Exact(_) => out.add_scaled(&self.mode_basis(am, n, bm), &c),
                    Scalar::Approx(z) => {
                        for (m, x) in self.mode_basis_approx(am, n, bm).iter() {
                            out.add_term(m.clone(), Scalar::Approx(z * x));
                        }
                    }
                }
            }
        }
        out
    }

    /// `L₋₁ b`, via the derivation rule `[L₋₁, u₋ₙ] = (n − w + 1) u₋ₙ₋₁`.
    pub fn translate(&self, b: &GradedVector) -> Result<GradedVector> {
        self.check_vector(b)?;
        Ok(self.translate_unchecked(b))
    }

    pub(crate) fn translate_unchecked(&self, b: &GradedVector) -> GradedVector {
        let mut out = GradedVector::zero();
        for (m, c) in b.terms() {
            let fs = m.factors();
            for i in 0..fs.len() {
                let f = fs[i];
                let coeff = f.n as i64 - f.gen.weight() as i64 + 1;
                if coeff == 0 {
                    continue;
                }
                let mut v = GradedVector::vacuum();
                for (idx, g) in fs.iter().enumerate().rev() {
                    let mode = if idx == i { -(g.n as i64) - 1 } else { -(g.n as i64) };
                    v = self.apply_unchecked(g.gen, mode, &v);
                }
                out.add_scaled(&v, &(c * &Scalar::from_int(coeff)));
            }
        }
        out
    }

    /// `L₋₁ʲ b / j!`.
    pub fn translate_power(&self, b: &GradedVector, j: u32) -> GradedVector {
        let mut v = b.clone();
        for i in 1..=j {
            v = self.translate_unchecked(&v).scale(&Scalar::from_ratio(1, i as i64));
        }
        v
    }

    /// Smallest `N ≥ 0` with `a₍ₙ₎b = 0` for all `n ≥ N` (homogeneous inputs).
    pub fn pole_bound(&self, a: &GradedVector, b: &GradedVector) -> Result<i64> {
        self.check_vector(a)?;
        self.check_vector(b)?;
        if a.is_zero() || b.is_zero() {
            return Ok(0);
        }
        let da = a.degree().ok_or(Error::NotHomogeneous)?;
        let db = b.degree().ok_or(Error::NotHomogeneous)?;
        for n in (0..=da + db).rev() {
            if !self.state_mode_unchecked(a, n, b).is_zero() {
                return Ok(n + 1);
            }
        }
        Ok(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(s: &str) -> GradedVector {
        GradedVector::from_tokens(s).unwrap()
    }

    fn vir() -> Preset {
        Preset::virasoro(Scalar::from_ratio(1, 2)).unwrap()
    }

    fn sl2() -> Preset {
        Preset::affine_sl2(Scalar::one()).unwrap()
    }

    #[test]
    fn heisenberg_generator_modes() {
        let p = Preset::heisenberg();
        let a = st("a-1");
        assert_eq!(p.generator_mode_apply(Generator::Alpha, 1, &a).unwrap(), GradedVector::vacuum());
        assert!(p.generator_mode_apply(Generator::Alpha, 0, &a).unwrap().is_zero());
        assert!(p.generator_mode_apply(Generator::Alpha, 0, &st("a-2 a-1")).unwrap().is_zero());
        // α₁ α₋₁² |0⟩ = 2 α₋₁|0⟩
        assert_eq!(
            p.generator_mode_apply(Generator::Alpha, 1, &st("a-1 a-1")).unwrap(),
            a.scale(&Scalar::from_int(2))
        );
        assert!(matches!(
            p.generator_mode_apply_symbol("L", 1, &a),
            Err(Error::UnknownGenerator(..))
        ));
        assert!(p.generator_mode_apply(Generator::Alpha, 1, &st("L-2")).is_err());
    }

    #[test]
    fn annihilation_past_degree() {
        for p in [Preset::heisenberg(), vir(), sl2()] {
            for d in 0..=3 {
                for m in p.basis(d) {
                    let b = GradedVector::basis(m);
                    for &g in p.generators() {
                        let n = 1 + d + g.weight() as i64;
                        assert!(p.generator_mode_apply(g, n, &b).unwrap().is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn heisenberg_two_point_modes() {
        let p = Preset::heisenberg();
        let a = st("a-1");
        assert_eq!(p.state_mode(&a, 1, &a).unwrap(), GradedVector::vacuum());
        assert!(p.state_mode(&a, 0, &a).unwrap().is_zero());
        for n in 2..6 {
            assert!(p.state_mode(&a, n, &a).unwrap().is_zero());
        }
        assert_eq!(p.state_mode(&a, -1, &a).unwrap(), st("a-1 a-1"));
        assert_eq!(p.state_mode(&a, -2, &a).unwrap(), st("a-2 a-1"));
    }

    #[test]
    fn virasoro_omega_products() {
        let p = vir();
        let w = p.omega().unwrap();
        assert_eq!(p.state_mode(&w, 3, &w).unwrap(), GradedVector::vacuum().scale(&Scalar::from_ratio(1, 4)));
        assert_eq!(p.state_mode(&w, 1, &w).unwrap(), w.scale(&Scalar::from_int(2)));
        assert!(p.state_mode(&w, 2, &w).unwrap().is_zero());
        // ω₍₀₎ω = L₋₁ω = L₋₃|0⟩
        assert_eq!(p.state_mode(&w, 0, &w).unwrap(), st("L-3"));
        assert_eq!(p.pole_bound(&w, &w).unwrap(), 4);
    }

    #[test]
    fn vacuum_modes() {
        for p in [Preset::heisenberg(), vir(), sl2()] {
            let vac = GradedVector::vacuum();
            for d in 0..=3 {
                for m in p.basis(d) {
                    let a = GradedVector::basis(m);
                    for n in 0..5 {
                        assert!(p.state_mode(&a, n, &vac).unwrap().is_zero());
                    }
                    assert_eq!(p.state_mode(&vac, -1, &a).unwrap(), a);
                    assert!(p.state_mode(&vac, 0, &a).unwrap().is_zero());
                    assert_eq!(p.state_mode(&a, -1, &vac).unwrap(), a);
                }
            }
        }
    }

    #[test]
    fn translation() {
        let p = Preset::heisenberg();
        assert!(p.translate(&GradedVector::vacuum()).unwrap().is_zero());
        assert_eq!(p.translate(&st("a-1")).unwrap(), st("a-2"));
        // L₋₁ α₋₁² = 2 α₋₂α₋₁
        assert_eq!(p.translate(&st("a-1 a-1")).unwrap(), st("a-2 a-1").scale(&Scalar::from_int(2)));
        let v = vir();
        let w = v.omega().unwrap();
        for d in 0..=5 {
            for m in v.basis(d) {
                let b = GradedVector::basis(m);
                assert_eq!(v.translate(&b).unwrap(), v.state_mode(&w, 0, &b).unwrap());
            }
        }
    }

    #[test]
    fn translate_is_minus_two_mode_on_vacuum() {
        for p in [Preset::heisenberg(), vir(), sl2()] {
            for d in 0..=4 {
                for m in p.basis(d) {
                    let b = GradedVector::basis(m);
                    let t = p.translate(&b).unwrap();
                    assert_eq!(t, p.state_mode(&b, -2, &GradedVector::vacuum()).unwrap());
                    if !t.is_zero() {
                        assert_eq!(t.degree(), Some(d + 1));
                    }
                }
            }
        }
    }

    #[test]
    fn pole_bounds() {
        let p = Preset::heisenberg();
        assert_eq!(p.pole_bound(&st("a-1"), &st("a-1")).unwrap(), 2);
        assert_eq!(p.pole_bound(&GradedVector::vacuum(), &st("a-1")).unwrap(), 0);
        let s = sl2();
        assert_eq!(s.pole_bound(&st("e-1"), &st("f-1")).unwrap(), 2);
        assert_eq!(s.pole_bound(&st("e-1"), &st("e-1")).unwrap(), 0);
        assert_eq!(s.pole_bound(&st("h-1"), &st("e-1")).unwrap(), 1);
    }

    #[test]
    fn basis_counts() {
        let counts = |p: &Preset| (0..=6).map(|d| p.basis(d).len()).collect::<Vec<_>>();
        assert_eq!(counts(&Preset::heisenberg()), vec![1, 1, 2, 3, 5, 7, 11]);
        assert_eq!(counts(&vir()), vec![1, 0, 1, 1, 2, 2, 4]);
        assert_eq!(counts(&sl2()), vec![1, 3, 9, 22, 51, 108, 221]);
    }

    #[test]
    fn affine_currents() {
        let p = sl2();
        // e₍₁₎f = κ(e,f)|0⟩ = level, e₍₀₎f = h
        assert_eq!(p.state_mode(&st("e-1"), 1, &st("f-1")).unwrap(), GradedVector::vacuum());
        assert_eq!(p.state_mode(&st("e-1"), 0, &st("f-1")).unwrap(), st("h-1"));
        assert_eq!(
            p.state_mode(&st("h-1"), 1, &st("h-1")).unwrap(),
            GradedVector::vacuum().scale(&Scalar::from_int(2))
        );
        assert_eq!(p.state_mode(&st("h-1"), 0, &st("e-1")).unwrap(), st("e-1").scale(&Scalar::from_int(2)));
    }

    #[test]
    fn preset_specs() {
        let p = Preset::from_spec(&PresetSpec { preset: "virasoro".into(), c: Some("1/2".into()), level: None })
            .unwrap();
        assert_eq!(p, vir());
        assert_eq!(Preset::from_spec(&p.spec()).unwrap(), p);
        assert!(Preset::from_spec(&PresetSpec { preset: "virasoro".into(), c: Some("1/0".into()), level: None })
            .is_err());
        assert!(Preset::from_spec(&PresetSpec { preset: "w3".into(), c: None, level: None }).is_err());
    }
}
