//! The multiplication maps `μ(a₁,z₁,…,aₘ,zₘ) = Y(a₁,z₁)…Y(aₘ,zₘ)|0⟩`.
//!
//! For arity ≤ 2 every degree component is a finite sum of
//! `v · x₁ʲ (x₀ − x₁)^e`, obtained from `Y(a,z)e^{wT}b = e^{wT}Y(a,z−w)b`; this
//! closed form is the analytic continuation to all of `ℂ²∖Δ`. General arity
//! is evaluated numerically as the radially ordered series.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grading::{DegreeWindow, GradedVector, Monomial, ProductVector};
use crate::report::CheckReport;
use crate::residue::FactorSum;
use crate::scalar::{Real, Scalar};
use crate::vertex::Preset;

const APPROX_SEPARATION: f64 = 1e-12;

fn points_distinct(a: &Scalar, b: &Scalar) -> bool {
    if a.is_exact() && b.is_exact() {
        a != b
    } else {
        (a.to_c64() - b.to_c64()).norm() > APPROX_SEPARATION
    }
}

fn moduli_equal(a: &Scalar, b: &Scalar) -> bool {
    let (na, nb) = (a.norm_sqr(), b.norm_sqr());
    if na.is_exact() && nb.is_exact() {
        na == nb
    } else {
        let (ra, rb) = (na.sqrt_f64(), nb.sqrt_f64());
        (ra - rb).abs() <= APPROX_SEPARATION * ra.max(rb).max(1.0)
    }
}

/// Pairwise distinct points of `ℂ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfiguration {
    points: Vec<Scalar>,
}

impl PointConfiguration {
    pub fn new(points: Vec<Scalar>) -> Result<Self> {
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if !points_distinct(&points[i], &points[j]) {
                    return Err(Error::CoincidentPoints(i, j));
                }
            }
        }
        Ok(PointConfiguration { points })
    }

    /// Parses a comma-separated list such as `"2+0i,1/2,0"`.
    pub fn parse(s: &str) -> Result<Self> {
        let pts = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Scalar>>>()?;
        PointConfiguration::new(pts)
    }

    pub fn points(&self) -> &[Scalar] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.points.iter().all(Scalar::is_exact)
    }

    /// Point indices sorted by strictly decreasing modulus.
    pub fn radial_order(&self) -> Result<Vec<usize>> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&i, &j| {
            self.points[j].norm_sqr().cmp_real(&self.points[i].norm_sqr()).then(i.cmp(&j))
        });
        for w in idx.windows(2) {
            if moduli_equal(&self.points[w[0]], &self.points[w[1]]) {
                return Err(Error::EqualModuli(w[0].min(w[1]), w[0].max(w[1])));
            }
        }
        Ok(idx)
    }
}

/// Closed discs `B_{rᵢ}(zᵢ)` inside an open disc `B_R(0)`; radii are stored
/// squared.
#[derive(Clone, Debug)]
pub struct DiscConfiguration {
    centers: Vec<Scalar>,
    radii2: Vec<Real>,
    outer2: Real,
}

impl DiscConfiguration {
    pub fn new(centers: Vec<Scalar>, radii: Vec<Scalar>, outer: Scalar) -> Result<Self> {
        if centers.len() != radii.len() {
            return Err(Error::ArityMismatch { expected: centers.len(), got: radii.len() });
        }
        let zero = Real::from_ratio(0, 1);
        let radii2: Vec<Real> = radii.iter().map(Scalar::norm_sqr).collect();
        let outer2 = outer.norm_sqr();
        for (i, (c, r2)) in centers.iter().zip(&radii2).enumerate() {
            if r2.cmp_real(&zero).is_le() {
                return Err(Error::InvalidSupport(format!("disc {i} has zero radius")));
            }
            // |c| + r < R
            if crate::scalar::cmp_sqrt_sums([&c.norm_sqr(), r2], [&outer2, &zero]).is_ge() {
                return Err(Error::NotASubset);
            }
            for j in i + 1..centers.len() {
                let d2 = (c - &centers[j]).norm_sqr();
                if crate::scalar::cmp_sqrt_sums([&d2, &zero], [r2, &radii2[j]]).is_le() {
                    return Err(Error::NotDisjoint);
                }
            }
        }
        Ok(DiscConfiguration { centers, radii2, outer2 })
    }

    pub fn centers(&self) -> &[Scalar] {
        &self.centers
    }

    pub fn radii_squared(&self) -> &[Real] {
        &self.radii2
    }

    pub fn outer_squared(&self) -> &Real {
        &self.outer2
    }
}

/// Splits a vector into its homogeneous parts.
fn homogeneous_parts(v: &GradedVector) -> Vec<(i64, GradedVector)> {
    v.degrees().into_iter().map(|d| (d, v.project_degree(d))).collect()
}

/// One degree component of `μ` in closed form: a map from basis monomials to
/// functions of the coordinates `x₀, x₁, …`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExactComponent {
    terms: BTreeMap<Monomial, FactorSum>,
}

impl ExactComponent {
    fn add_vector(&mut self, v: &GradedVector, f: &FactorSum) {
        for (m, c) in v.terms() {
            let slot = self.terms.entry(m.clone()).or_default();
            *slot = slot.add(&f.scale(c));
            if slot.is_zero() {
                self.terms.remove(m);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &FactorSum)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Applies a coordinate operation to every coefficient function.
    pub fn map(&self, f: impl Fn(&FactorSum) -> Result<FactorSum>) -> Result<ExactComponent> {
        let mut out = ExactComponent::default();
        for (m, g) in &self.terms {
            let h = f(g)?;
            if !h.is_zero() {
                out.terms.insert(m.clone(), h);
            }
        }
        Ok(out)
    }

    /// The vector once all coordinates are integrated out, if they are.
    pub fn as_vector(&self) -> Option<GradedVector> {
        let mut v = GradedVector::zero();
        for (m, g) in &self.terms {
            v.add_term(m.clone(), g.as_constant()?);
        }
        Some(v)
    }

    pub fn eval_at(&self, xs: &[Scalar]) -> Result<GradedVector> {
        let mut v = GradedVector::zero();
        for (m, g) in &self.terms {
            v.add_term(m.clone(), g.eval_at(xs)?);
        }
        Ok(v)
    }

    /// Largest number of Laurent monomials in any coefficient function.
    pub fn max_terms(&self) -> usize {
        self.terms.values().map(FactorSum::len).max().unwrap_or(0)
    }
}

/// `p_k μ(states; x₀, x₁, …)` in closed form, for at most two states.
pub fn mu_exact_component(preset: &Preset, states: &[GradedVector], k: i64) -> Result<ExactComponent> {
    for s in states {
        preset.check_vector(s)?;
    }
    let mut out = ExactComponent::default();
    match states {
        [] => {
            if k == 0 {
                out.add_vector(&GradedVector::vacuum(), &FactorSum::constant(Scalar::one()));
            }
        }
        [a] => {
            for (d, ad) in homogeneous_parts(a) {
                let j = k - d;
                if j >= 0 {
                    let v = preset.translate_power(&ad, j as u32);
                    out.add_vector(&v, &FactorSum::shift_power(0, Scalar::zero(), j));
                }
            }
        }
        [a, b] => {
            for (d, ad) in homogeneous_parts(a) {
                for (e, be) in homogeneous_parts(b) {
                    for j in 0..=k {
                        let n = d + e + j - k - 1;
                        let v = preset.state_mode_unchecked(&ad, n, &be);
                        if v.is_zero() {
                            continue;
                        }
                        let v = preset.translate_power(&v, j as u32);
                        let f = FactorSum::shift_power(1, Scalar::zero(), j).mul(&FactorSum::diff_power(0, 1, -n - 1));
                        out.add_vector(&v, &f);
                    }
                }
            }
        }
        _ => {
            return Err(Error::ExactPathUnavailable(format!(
                "closed form only for arity ≤ 2, got {}",
                states.len()
            )))
        }
    }
    Ok(out)
}

/// `p_k μ(a,z,b,0) = (a₍ₙ₎b) z^{−n−1}` with `n = deg a + deg b − k − 1`, for
/// each `k` in the window: the pair (coefficient vector, exponent of `z`).
pub fn mu_two_point_exact(
    preset: &Preset,
    a: &GradedVector,
    b: &GradedVector,
    window: DegreeWindow,
) -> Result<BTreeMap<i64, (GradedVector, i64)>> {
    preset.check_vector(a)?;
    preset.check_vector(b)?;
    let da = if a.is_zero() { 0 } else { a.degree().ok_or(Error::NotHomogeneous)? };
    let db = if b.is_zero() { 0 } else { b.degree().ok_or(Error::NotHomogeneous)? };
    let mut out = BTreeMap::new();
    for k in window.degrees() {
        let n = da + db - k - 1;
        out.insert(k, (preset.state_mode_unchecked(a, n, b), -n - 1));
    }
    Ok(out)
}

/// `μ` by the closed form, evaluated at the given points; arity ≤ 2.
pub fn mu_closed_form(
    preset: &Preset,
    states: &[GradedVector],
    config: &PointConfiguration,
    window: DegreeWindow,
) -> Result<ProductVector> {
    if states.len() != config.len() {
        return Err(Error::ArityMismatch { expected: states.len(), got: config.len() });
    }
    let mut out = ProductVector::zero(window);
    for k in window.degrees() {
        let v = mu_exact_component(preset, states, k)?.eval_at(config.points())?;
        out.add_component(k, &v, &Scalar::one());
    }
    Ok(out)
}

/// Truncation controls for the numeric series.
#[derive(Clone, Copy, Debug)]
pub struct MuOptions {
    /// Target tail, relative to `max(1, ‖result‖)`.
    pub tol: f64,
    /// Largest intermediate degree; defaults to `4·(hi+1)+16`.
    pub degree_cap: Option<i64>,
}

impl MuOptions {
    pub fn new(tol: f64) -> Self {
        MuOptions { tol, degree_cap: None }
    }

    /// Options whose degree cap also covers the slowest radial ratio of the
    /// configuration: enough degrees for `ρ^D` to fall well below `tol`.
    pub fn for_config(tol: f64, config: &PointConfiguration, window: DegreeWindow) -> Self {
        let base = 4 * (window.hi().max(0) + 1) + 16;
        let mut mods: Vec<f64> = config.points().iter().map(Scalar::abs).collect();
        mods.sort_by(|a, b| b.total_cmp(a));
        let rho = mods.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        let cap = if rho > 0.0 && rho < 1.0 {
            window.hi().max(0) + ((tol.max(1e-300) * 1e-4).ln() / rho.ln()).ceil() as i64 + 16
        } else {
            base
        };
        MuOptions { tol, degree_cap: Some(base.max(cap)) }
    }

    fn cap(&self, window: DegreeWindow) -> i64 {
        self.degree_cap.unwrap_or(4 * (window.hi().max(0) + 1) + 16)
    }
}

/// Result of the numeric series with its truncation data.
#[derive(Clone, Debug)]
pub struct NumericMu {
    pub value: ProductVector,
    /// Intermediate degree cap that was used.
    pub degree: i64,
    /// Largest admissible cap.
    pub degree_max: i64,
    /// Estimated tail at `degree`.
    pub tail: f64,
}

/// Geometric tail beyond `cap` of a nonnegative sequence `s[0..=cap]`, fitted
/// on its last three nonzero entries.
pub(crate) fn geometric_tail(s: &[f64]) -> f64 {
    let cap = s.len() as i64 - 1;
    let nz: Vec<(i64, f64)> = s.iter().enumerate().filter(|(_, x)| **x > 1e-300).map(|(i, x)| (i as i64, *x)).collect();
    if nz.is_empty() {
        return 0.0;
    }
    if nz.len() < 3 {
        return if nz.last().unwrap().0 < cap - 2 { 0.0 } else { f64::INFINITY };
    }
    let [(d1, s1), (d2, s2), (d3, s3)] = [nz[nz.len() - 3], nz[nz.len() - 2], nz[nz.len() - 1]];
    let r1 = (s2 / s1).powf(1.0 / (d2 - d1) as f64);
    let r2 = (s3 / s2).powf(1.0 / (d3 - d2) as f64);
    let rho = r1.max(r2);
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    s3 * rho.powi((cap + 1 - d3) as i32) / (1.0 - rho)
}

fn cpow(z: Complex64, e: i64) -> Complex64 {
    if e == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        z.powi(e as i32)
    }
}

/// `p_k Y(a,z)X` for `k` in `out`, from the components of `X`. Also returns,
/// per inner degree `D`, the size of its contribution with output degree `k`
/// weighted by `weight(k)`.
fn apply_field(
    preset: &Preset,
    a_parts: &[(i64, GradedVector)],
    z: Complex64,
    inner: &BTreeMap<i64, GradedVector>,
    out: impl Iterator<Item = i64>,
    weight: impl Fn(i64) -> f64,
) -> (BTreeMap<i64, GradedVector>, Vec<f64>) {
    let top = inner.keys().next_back().copied().unwrap_or(0).max(0);
    let mut sizes = vec![0.0; top as usize + 1];
    let mut res = BTreeMap::new();
    for k in out {
        let mut acc = GradedVector::zero();
        for (dd, x) in inner {
            for (d, ad) in a_parts {
                let n = d + dd - k - 1;
                let v = preset.state_mode_unchecked(ad, n, x);
                if !v.is_zero() {
                    let c = cpow(z, k - d - dd);
                    sizes[*dd as usize] += v.norm() * c.norm() * weight(k);
                    acc.add_scaled(&v, &Scalar::Approx(c));
                }
            }
        }
        if !acc.is_zero() {
            res.insert(k, acc);
        }
    }
    (res, sizes)
}

/// Components of `e^{zT}a` up to degree `cap`.
fn exp_translate(preset: &Preset, a_parts: &[(i64, GradedVector)], z: Complex64, cap: i64) -> BTreeMap<i64, GradedVector> {
    let mut res: BTreeMap<i64, GradedVector> = BTreeMap::new();
    for (d, ad) in a_parts {
        let mut t = ad.clone();
        for j in 0..=(cap - d).max(-1) {
            if j > 0 {
                t = preset.translate_unchecked(&t).scale(&Scalar::from_ratio(1, j));
            }
            if t.is_zero() {
                break;
            }
            let slot = res.entry(d + j).or_default();
            slot.add_scaled(&t.to_approx(), &Scalar::Approx(cpow(z, j)));
        }
    }
    res.retain(|_, v| !v.is_zero());
    res
}

/// `μ` as the radially ordered series, in double precision.
pub fn mu_numeric(
    preset: &Preset,
    states: &[GradedVector],
    config: &PointConfiguration,
    window: DegreeWindow,
    opts: MuOptions,
) -> Result<NumericMu> {
    if states.len() != config.len() {
        return Err(Error::ArityMismatch { expected: states.len(), got: config.len() });
    }
    for s in states {
        preset.check_vector(s)?;
    }
    let degree_max = opts.cap(window);
    if states.is_empty() {
        let value = ProductVector::from_graded(&GradedVector::vacuum().to_approx(), window);
        return Ok(NumericMu { value, degree: 0, degree_max, tail: 0.0 });
    }
    let order = config.radial_order()?;
    let zs: Vec<Complex64> = order.iter().map(|&i| config.points()[i].to_c64()).collect();
    let parts: Vec<Vec<(i64, GradedVector)>> = order.iter().map(|&i| homogeneous_parts(&states[i])).collect();
    let m = zs.len();
    let min_deg = parts.iter().flatten().map(|(d, _)| *d).min().unwrap_or(0);
    if min_deg < 0 {
        return Err(Error::Config("negative degrees are not supported by the numeric series".into()));
    }
    let mut cap = (window.hi().max(0) + 12).min(degree_max);
    loop {
        let mut tail = 0.0;
        let mut x = exp_translate(preset, &parts[m - 1], zs[m - 1], if m == 1 { window.hi() } else { cap });
        for lvl in (0..m - 1).rev() {
            let (next, sizes) = if lvl == 0 {
                apply_field(preset, &parts[0], zs[0], &x, window.degrees(), |_| 1.0)
            } else {
                let r = zs[lvl - 1].norm();
                apply_field(preset, &parts[lvl], zs[lvl], &x, 0..=cap, |k| r.powi(-(k as i32)))
            };
            let mut sizes = sizes;
            sizes.resize(cap as usize + 1, 0.0);
            tail += geometric_tail(&sizes);
            x = next;
        }
        let mut value = ProductVector::zero(window);
        for (k, v) in &x {
            value.add_component(*k, v, &Scalar::one());
        }
        let scale = value.norm().max(1.0);
        if tail <= opts.tol * scale {
            return Ok(NumericMu { value, degree: cap, degree_max, tail });
        }
        if cap >= degree_max {
            return Err(Error::NonConvergent { tail, tol: opts.tol * scale, cap });
        }
        cap = (cap + 8).min(degree_max);
    }
}

/// `μ` by the closed form for arity ≤ 2 and by the numeric series otherwise.
pub fn mu_evaluate(
    preset: &Preset,
    states: &[GradedVector],
    config: &PointConfiguration,
    window: DegreeWindow,
    opts: MuOptions,
) -> Result<ProductVector> {
    if states.len() <= 2 {
        mu_closed_form(preset, states, config, window)
    } else {
        Ok(mu_numeric(preset, states, config, window, opts)?.value)
    }
}

/// `p_k(e^{tT}X)` for `k` in the window of `x`; exact when the inputs are.
pub fn translate_product(preset: &Preset, x: &ProductVector, t: &Scalar) -> Result<ProductVector> {
    let w = x.window();
    let mut out = ProductVector::zero(w);
    for (d, v) in x.components() {
        preset.check_vector(v)?;
        let mut tv = v.clone();
        for j in 0..=(w.hi() - d) {
            if j > 0 {
                tv = preset.translate_unchecked(&tv).scale(&Scalar::from_ratio(1, j));
            }
            if tv.is_zero() {
                break;
            }
            out.add_component(d + j, &tv, &t.powi(j)?);
        }
    }
    Ok(out)
}

fn states_json(states: &[GradedVector]) -> Value {
    Value::Array(states.iter().map(|s| Value::String(s.to_string())).collect())
}

fn points_json(points: &[Scalar]) -> Value {
    Value::Array(points.iter().map(|s| Value::String(s.to_string())).collect())
}

fn product_error(a: &ProductVector, b: &ProductVector) -> f64 {
    if a.is_exact() && b.is_exact() {
        if a.approx_eq(b, 0.0) {
            0.0
        } else {
            a.max_rel_error(b).max(f64::MIN_POSITIVE)
        }
    } else {
        a.max_rel_error(b)
    }
}

/// `μ(a,0) = a` for every basis state with degree in the window (exact).
pub fn check_insertion_at_zero(preset: &Preset, window: DegreeWindow) -> Result<CheckReport> {
    let mut rep = CheckReport::new("insertion_at_zero");
    let zero = PointConfiguration::new(vec![Scalar::zero()])?;
    let basis = preset.basis_up_to(window.lo().max(0), window.hi());
    for m in &basis {
        let a = GradedVector::basis(m.clone());
        let got = mu_closed_form(preset, std::slice::from_ref(&a), &zero, window)?;
        let want = ProductVector::from_graded(&a, window);
        let err = product_error(&got, &want);
        rep.record(err, || json!({"state": m.to_string()}));
    }
    rep.set_truncation("window", window);
    rep.set_truncation("states", basis.len());
    Ok(rep.finish(0.0))
}

/// `μ(q.a₁, qz₁, …) = q.μ(a₁, z₁, …)`; exact for arity ≤ 2 with exact
/// inputs, numeric otherwise.
pub fn check_equivariance(
    preset: &Preset,
    q: &Scalar,
    states: &[GradedVector],
    config: &PointConfiguration,
    window: DegreeWindow,
    tol: f64,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new("equivariance");
    let qs = states.iter().map(|s| s.grading_act(q)).collect::<Result<Vec<_>>>()?;
    let qz = PointConfiguration::new(config.points().iter().map(|z| q * z).collect())?;
    let exact = states.len() <= 2 && q.is_exact() && config.is_exact() && states.iter().all(GradedVector::is_exact);
    let (lhs, rhs, tol) = if exact {
        let lhs = mu_closed_form(preset, &qs, &qz, window)?;
        let rhs = mu_closed_form(preset, states, config, window)?.grading_act(q)?;
        (lhs, rhs, 0.0)
    } else {
        let lhs = mu_numeric(preset, &qs, &qz, window, MuOptions::for_config(tol * 1e-2, &qz, window))?.value;
        let opts = MuOptions::for_config(tol * 1e-2, config, window);
        let rhs = mu_numeric(preset, states, config, window, opts)?.value.grading_act(q)?;
        (lhs, rhs, tol)
    };
    let err = product_error(&lhs, &rhs);
    rep.record(err, || json!({"q": q.to_string(), "states": states_json(states), "points": points_json(config.points())}));
    rep.set_truncation("window", window);
    rep.set_truncation("path", if exact { "exact" } else { "numeric" });
    Ok(rep.finish(tol))
}

/// Permutation invariance. Every reordering of the (state, point) pairs is
/// evaluated by the radial series; for two points the result is also
/// compared with the closed form of the unsorted order, which is valid off
/// the radial domain by continuation.
pub fn check_permutation_invariance(
    preset: &Preset,
    states: &[GradedVector],
    config: &PointConfiguration,
    window: DegreeWindow,
    tol: f64,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new("permutation_invariance");
    let opts = MuOptions::for_config(tol * 1e-2, config, window);
    let base = mu_numeric(preset, states, config, window, opts)?.value;
    let m = states.len();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut count = 0;
    loop {
        let s: Vec<GradedVector> = perm.iter().map(|&i| states[i].clone()).collect();
        let p = PointConfiguration::new(perm.iter().map(|&i| config.points()[i].clone()).collect())?;
        let v = mu_numeric(preset, &s, &p, window, opts)?.value;
        rep.record(product_error(&v, &base), || json!({"permutation": perm.clone()}));
        if m <= 2 {
            let c = mu_closed_form(preset, &s, &p, window)?;
            rep.record(product_error(&c, &base), || json!({"closed_form_order": perm.clone()}));
        }
        count += 1;
        if !next_permutation(&mut perm) || count >= 24 {
            break;
        }
    }
    rep.set_truncation("permutations", count);
    rep.set_truncation("window", window);
    Ok(rep.finish(tol))
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Skew symmetry as an identity of closed forms:
/// `Y(a,z)b = e^{zT}Y(b,−z)a`, degree by degree (exact).
pub fn check_skew_symmetry(preset: &Preset, a: &GradedVector, b: &GradedVector, window: DegreeWindow) -> Result<CheckReport> {
    let mut rep = CheckReport::new("skew_symmetry");
    let da = a.degree().ok_or(Error::NotHomogeneous)?;
    let db = b.degree().ok_or(Error::NotHomogeneous)?;
    let direct = mu_two_point_exact(preset, a, b, window)?;
    for k in window.degrees() {
        let (v, e) = &direct[&k];
        let mut lhs = ExactComponent::default();
        lhs.add_vector(v, &FactorSum::shift_power(0, Scalar::zero(), *e));
        let mut rhs = ExactComponent::default();
        for j in 0..=k {
            let n = da + db - (k - j) - 1;
            let u = preset.state_mode(b, n, a)?;
            if u.is_zero() {
                continue;
            }
            let u = preset.translate_power(&u, j as u32);
            // z^j (−z)^{−n−1}
            let sign = if (n + 1).rem_euclid(2) == 1 { -1 } else { 1 };
            rhs.add_vector(&u, &FactorSum::shift_power(0, Scalar::zero(), j - n - 1).scale(&Scalar::from_int(sign)));
        }
        if lhs != rhs {
            rep.fail(json!({"a": a.to_string(), "b": b.to_string(), "k": k}));
            rep.max_err = rep.max_err.max(1.0);
        }
    }
    rep.set_truncation("window", window);
    Ok(rep.finish(0.0))
}

/// One point of an associativity convergence curve.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CurvePoint {
    /// Number of inner degrees summed (`k = 0..terms`).
    pub terms: i64,
    pub err: f64,
}

/// Associativity on the domain `max|wⱼ| < min|zᵢ − c|`:
/// `μ(a, z, b, w + c) = Σ_k μ(a, z, p_k μ(b, w), c)`.
pub fn check_associativity(
    preset: &Preset,
    outer: &[(GradedVector, Scalar)],
    center: &Scalar,
    inner: &[(GradedVector, Scalar)],
    window: DegreeWindow,
    tol: f64,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new("associativity");
    let max_w = inner.iter().map(|(_, w)| w.abs()).fold(0.0, f64::max);
    let min_gap = outer.iter().map(|(_, z)| (z - center).abs()).fold(f64::INFINITY, f64::min);
    let inside = {
        // exact comparison where possible
        let wmax2 = inner.iter().map(|(_, w)| w.norm_sqr()).max_by(|a, b| a.cmp_real(b));
        let gmin2 = outer.iter().map(|(_, z)| (z - center).norm_sqr()).min_by(|a, b| a.cmp_real(b));
        match (wmax2, gmin2) {
            (Some(w), Some(g)) => w.cmp_real(&g).is_lt(),
            _ => true,
        }
    };
    if !inside {
        return Err(Error::DomainViolation { max_w, min_gap });
    }
    let ratio = if outer.is_empty() { 0.0 } else { max_w / min_gap };
    let inner_tol = (tol * 1e-4).max(1e-14);

    let mut all_states: Vec<GradedVector> = outer.iter().map(|(s, _)| s.clone()).collect();
    let mut all_points: Vec<Scalar> = outer.iter().map(|(_, z)| z.clone()).collect();
    for (s, w) in inner {
        all_states.push(s.clone());
        all_points.push(w + center);
    }
    let lhs_cfg = PointConfiguration::new(all_points)?;
    let lhs = mu_evaluate(preset, &all_states, &lhs_cfg, window, MuOptions::for_config(inner_tol, &lhs_cfg, window))?.to_approx();

    let inner_states: Vec<GradedVector> = inner.iter().map(|(s, _)| s.clone()).collect();
    let inner_cfg = PointConfiguration::new(inner.iter().map(|(_, w)| w.clone()).collect())?;
    let mut outer_states: Vec<GradedVector> = outer.iter().map(|(s, _)| s.clone()).collect();
    let mut outer_points: Vec<Scalar> = outer.iter().map(|(_, z)| z.clone()).collect();
    outer_points.push(center.clone());
    let outer_cfg = PointConfiguration::new(outer_points)?;
    outer_states.push(GradedVector::zero());

    let k_max = 4 * (window.hi().max(0) + 1) + 16 + (if ratio > 0.0 { (30.0 / -ratio.ln()).ceil() as i64 } else { 0 });
    let inner_window = DegreeWindow::new(0, k_max)?;
    let inner_mu =
        mu_evaluate(preset, &inner_states, &inner_cfg, inner_window, MuOptions::for_config(inner_tol, &inner_cfg, inner_window))?;
    let opts = MuOptions::for_config(inner_tol, &outer_cfg, window);

    // Component k of the inner product is O(|w|^(k - Σ deg b_j)), so the
    // geometric tail starts once k reaches the total inner degree.
    let tail_start: i64 = inner.iter().map(|(s, _)| s.max_degree().unwrap_or(0).max(0)).sum();
    let noise = 1e-11;
    let mut partial = ProductVector::zero(window);
    let mut curve: Vec<CurvePoint> = Vec::new();
    let mut err = lhs.max_rel_error(&partial);
    let mut terms = 0;
    let mut converged = false;
    let mut quiet = 0;
    for k in 0..=k_max {
        let pk = inner_mu.component(k);
        terms = k + 1;
        if pk.is_zero() {
            quiet += 1;
        } else {
            *outer_states.last_mut().unwrap() = pk;
            let term = mu_evaluate(preset, &outer_states, &outer_cfg, window, opts)?;
            partial.add_scaled(&term.to_approx(), &Scalar::one());
            err = lhs.max_rel_error(&partial);
            if term.norm() > 0.0 {
                quiet = 0;
                if err > noise && k >= tail_start {
                    curve.push(CurvePoint { terms, err });
                }
            } else {
                quiet += 1;
            }
        }
        if err <= inner_tol.max(tol * 1e-3) && quiet >= 3 {
            converged = true;
            break;
        }
        if err <= tol * 1e-3 && k > window.hi() {
            converged = true;
            break;
        }
    }
    let decreasing = curve.windows(2).all(|w| w[1].err < w[0].err);
    let fitted = if curve.len() >= 3 {
        let n = curve.len();
        let (a, b) = (&curve[n - 3], &curve[n - 1]);
        Some((b.err / a.err).powf(1.0 / (b.terms - a.terms) as f64))
    } else {
        None
    };
    rep.record(err, || {
        json!({
            "outer": outer.iter().map(|(s, z)| json!([s.to_string(), z.to_string()])).collect::<Vec<_>>(),
            "center": center.to_string(),
            "inner": inner.iter().map(|(s, w)| json!([s.to_string(), w.to_string()])).collect::<Vec<_>>(),
        })
    });
    rep.set_truncation("terms", terms);
    rep.set_truncation("converged", converged);
    rep.set_truncation("tail_start", tail_start);
    rep.set_truncation("ratio_bound", ratio);
    rep.set_truncation("fitted_ratio", fitted);
    rep.set_truncation("curve", &curve);
    rep.set_truncation("window", window);
    if !decreasing {
        rep.fail(json!({"reason": "convergence curve is not strictly decreasing"}));
    }
    if let Some(f) = fitted {
        if f > ratio + 0.1 {
            rep.fail(json!({"reason": "fitted ratio exceeds bound", "fitted": f, "bound": ratio}));
        }
    }
    Ok(rep.finish(tol))
}

/// For basis pairs with degrees in the window: the pole bound is at most
/// `deg a + deg b + 1` and every component of `μ(a,z,b,0)` is a single
/// Laurent monomial in `z`.
pub fn check_meromorphicity(preset: &Preset, window: DegreeWindow) -> Result<CheckReport> {
    let mut rep = CheckReport::new("meromorphicity");
    let basis = preset.basis_up_to(window.lo().max(0), window.hi());
    let mut worst = 0i64;
    let mut pairs = 0usize;
    for am in &basis {
        let a = GradedVector::basis(am.clone());
        for bm in &basis {
            let b = GradedVector::basis(bm.clone());
            let n = preset.pole_bound(&a, &b)?;
            let limit = am.degree() + bm.degree() + 1;
            worst = worst.max(n);
            pairs += 1;
            if n > limit {
                rep.fail(json!({"a": am.to_string(), "b": bm.to_string(), "pole_bound": n}));
            }
        }
    }
    // Monomial components along w = 0, from the closed form, on pairs of
    // generators and the vacuum.
    let mut probes = vec![GradedVector::vacuum()];
    probes.extend(preset.generators().iter().map(|g| preset.generator_state(*g)));
    for a in &probes {
        for b in &probes {
            for k in window.degrees() {
                let c = mu_exact_component(preset, &[a.clone(), b.clone()], k)?;
                let c = c.map(|f| crate::residue::apply_jet(f, 1, &Scalar::zero(), 0))?;
                if c.max_terms() > 1 {
                    rep.fail(json!({"a": a.to_string(), "b": b.to_string(), "k": k}));
                }
            }
        }
    }
    rep.set_truncation("pairs", pairs);
    rep.set_truncation("max_pole_bound", worst);
    rep.set_truncation("window", window);
    Ok(rep.finish(0.0))
}

/// Holomorphy proxy: moving point `moving` along a circle of radius `eps`
/// with `n` samples, the FFT of each sampled component reconstructs the
/// values at the intermediate angles.
pub fn check_holomorphy(
    preset: &Preset,
    states: &[GradedVector],
    config: &PointConfiguration,
    moving: usize,
    eps: f64,
    n: usize,
    window: DegreeWindow,
    tol: f64,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new("holomorphy");
    let opts = MuOptions::for_config(tol * 1e-3, config, window);
    let sample = |theta: f64| -> Result<ProductVector> {
        let mut pts: Vec<Scalar> = config.points().iter().map(Scalar::to_approx).collect();
        pts[moving] = Scalar::from_c64(pts[moving].to_c64() + Complex64::from_polar(eps, theta));
        mu_evaluate(preset, states, &PointConfiguration::new(pts)?, window, opts)
    };
    let step = std::f64::consts::TAU / n as f64;
    let nodes = (0..n).map(|j| sample(j as f64 * step)).collect::<Result<Vec<_>>>()?;
    let mids = (0..n).map(|j| sample((j as f64 + 0.5) * step)).collect::<Result<Vec<_>>>()?;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut keys: Vec<(i64, Monomial)> = Vec::new();
    for v in &nodes {
        for (k, c) in v.components() {
            for (m, _) in c.terms() {
                keys.push((k, m.clone()));
            }
        }
    }
    keys.sort();
    keys.dedup();
    for (k, m) in &keys {
        let mut buf: Vec<Complex64> = nodes.iter().map(|v| v.component(*k).coeff(m).to_c64()).collect();
        fft.process(&mut buf);
        let scale = buf.iter().map(|c| c.norm()).fold(0.0, f64::max) / n as f64;
        for (j, mid) in mids.iter().enumerate() {
            let theta = (j as f64 + 0.5) * step;
            let mut val = Complex64::new(0.0, 0.0);
            for (f, c) in buf.iter().enumerate() {
                let freq = if f < n / 2 { f as f64 } else { f as f64 - n as f64 };
                val += c * Complex64::from_polar(1.0, freq * theta);
            }
            val /= n as f64;
            let want = mid.component(*k).coeff(m).to_c64();
            let err = (val - want).norm() / scale.max(1.0);
            rep.record(err, || json!({"k": k, "monomial": m.to_string(), "node": j}));
        }
    }
    rep.set_truncation("samples", n);
    rep.set_truncation("radius", eps);
    rep.set_truncation("window", window);
    Ok(rep.finish(tol))
}
