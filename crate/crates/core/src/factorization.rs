//! The quotient `F(U) = E(U)/R(U)` seen through evaluation: relation
//! kernels, weight projections by contour quadrature, and the structural
//! checks on multiplicativity, concentric discs and Weiss covers.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::correlator::{mu_evaluate, MuOptions, PointConfiguration};
use crate::error::{Error, Result};
use crate::expression::{EvalOptions, Expression, Slot};
use crate::functional::{Factor, Functional};
use crate::geometry::OpenSet;
use crate::grading::{DegreeWindow, GradedVector, Monomial, ProductVector};
use crate::report::CheckReport;
use crate::residue::Support;
use crate::scalar::{Real, Scalar};
use crate::vertex::Preset;

/// Exact null space of a matrix given by columns, over the Gaussian
/// rationals: a basis of coefficient vectors `c` with `Σ cⱼ colⱼ = 0`.
pub fn null_space(columns: &[Vec<Scalar>]) -> Result<Vec<Vec<Scalar>>> {
    let ncols = columns.len();
    let nrows = columns.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Scalar>> = (0..nrows).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..nrows).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip()?;
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..nrows {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in col..ncols {
                    let d = &f * &m[row][j];
                    m[i][j] -= &d;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == nrows {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Scalar::zero(); ncols];
        v[free] = Scalar::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -&m[r][free];
        }
        basis.push(v);
    }
    Ok(basis)
}

/// Rows indexed by `(degree, monomial)`, one column per value.
fn coordinate_columns(values: &[ProductVector]) -> Vec<Vec<Scalar>> {
    let mut index: BTreeMap<(i64, Monomial), usize> = BTreeMap::new();
    for v in values {
        for (k, g) in v.components() {
            for (m, _) in g.terms() {
                let n = index.len();
                index.entry((k, m.clone())).or_insert(n);
            }
        }
    }
    values
        .iter()
        .map(|v| {
            let mut col = vec![Scalar::zero(); index.len()];
            for (k, g) in v.components() {
                for (m, c) in g.terms() {
                    col[index[&(k, m.clone())]] = c.clone();
                }
            }
            col
        })
        .collect()
}

/// Basis of `{c : ev(Σ cⱼ xⱼ) = 0}` in the window; all evaluations must be exact.
pub fn relation_kernel(preset: &Preset, exprs: &[Expression], window: DegreeWindow) -> Result<Vec<Vec<Scalar>>> {
    let values = exprs
        .iter()
        .map(|e| {
            let v = e.evaluate(preset, window, EvalOptions::default())?;
            if !v.is_exact() {
                return Err(Error::ExactPathUnavailable(format!("evaluation of {e} is not exact")));
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    null_space(&coordinate_columns(&values))
}

/// Result of the contour projection onto one degree.
#[derive(Clone, Debug)]
pub struct WeightProjection {
    pub k: i64,
    pub value: GradedVector,
    /// Size of the other degrees in the quadrature sum, relative.
    pub leak: f64,
    /// Relative distance to the degree-`k` part of the evaluation.
    pub err: f64,
}

/// Radius of the dilation circle, `(1 + r/R)/2`.
pub fn projection_radius(r2: &Real, big_r2: &Real) -> f64 {
    (1.0 + (r2.to_f64() / big_r2.to_f64()).sqrt()) / 2.0
}

fn centered_disc_radius(expr: &Expression) -> Result<Real> {
    match expr.carrier().as_disc() {
        Some((c, r2)) if c.is_zero() => Ok(r2.clone()),
        _ => Err(Error::Config(format!("weight projection needs a disc about 0, got {}", expr.carrier()))),
    }
}

/// `l_k(x) = (1/N) Σⱼ qⱼ^{−k} ev(σ_{(qⱼ,0)} x)` on `|q| = t` for every `k` in
/// the window, from one set of `N` samples. Each result must be
/// concentrated in degree `k` and agree with the degree-`k` part of
/// `ev(x)` within `tol`.
pub fn weight_projections(
    preset: &Preset,
    expr: &Expression,
    big_r: &Scalar,
    quad_n: usize,
    window: DegreeWindow,
    tol: f64,
) -> Result<Vec<WeightProjection>> {
    let r2 = centered_disc_radius(expr)?;
    let big_r2 = big_r.norm_sqr();
    if r2.cmp_real(&big_r2) != std::cmp::Ordering::Less {
        return Err(Error::Config("weight projection needs r < R".into()));
    }
    let t = projection_radius(&r2, &big_r2);
    let opts = EvalOptions::default();
    let mut samples = Vec::with_capacity(quad_n);
    for j in 0..quad_n {
        let q = Complex64::from_polar(t, TAU * j as f64 / quad_n as f64);
        let v = expr.affine_act(&Scalar::Approx(q), &Scalar::zero())?.evaluate(preset, window, opts)?;
        samples.push((q, v));
    }
    let exact = expr.evaluate(preset, window, opts)?;
    let mut out = Vec::new();
    for k in window.degrees() {
        let mut acc = ProductVector::zero(window);
        for (q, v) in &samples {
            acc.add_scaled(v, &Scalar::Approx(q.powi(-(k as i32)) / quad_n as f64));
        }
        let value = acc.component(k);
        let scale = value.norm().max(1.0);
        let leak = acc.components().filter(|(d, _)| *d != k).map(|(_, g)| g.norm()).fold(0.0, f64::max) / scale;
        if leak > tol {
            return Err(Error::NotConcentrated { leak, tol });
        }
        let expected = exact.component(k);
        let err = value.distance(&expected) / expected.norm().max(value.norm()).max(1.0);
        if err > tol {
            return Err(Error::NonConvergentQuadrature { diff: err, tol });
        }
        out.push(WeightProjection { k, value, leak, err });
    }
    Ok(out)
}

/// [`weight_projections`] for a single degree `k`.
pub fn weight_project(
    preset: &Preset,
    expr: &Expression,
    k: i64,
    big_r: &Scalar,
    quad_n: usize,
    window: DegreeWindow,
    tol: f64,
) -> Result<WeightProjection> {
    let all = weight_projections(preset, expr, big_r, quad_n, window, tol)?;
    all.into_iter()
        .find(|p| p.k == k)
        .ok_or_else(|| Error::Config(format!("degree {k} is outside the window {window}")))
}

/// The annulus moment times the delta at the origin: `x` evaluates to zero on
/// the annulus while `x·y` evaluates to `a₍ₘ₎a` on the big disc. The state is
/// the first generator with `a₍ₘ₎a ≠ 0`, if any.
pub fn run_counterexample(preset: &Preset, m: i64) -> Result<CheckReport> {
    let mut a = preset.generator_state(preset.generators()[0]);
    for &g in preset.generators() {
        let s = preset.generator_state(g);
        if !preset.state_mode(&s, m, &s)?.is_zero() {
            a = s;
            break;
        }
    }
    let deg = a.degree().unwrap_or(0);
    let window = DegreeWindow::new(0, (2 * deg - m - 1).max(0))?;
    let two = Scalar::from_int(2);
    let u1 = OpenSet::annulus(Scalar::zero(), &Scalar::one(), &two)?;
    let u2 = OpenSet::disc(Scalar::zero(), &Scalar::one())?;
    let w = OpenSet::disc(Scalar::zero(), &two)?;
    let moment = Functional::atom(Scalar::one(), vec![Factor::moment(Scalar::zero(), &Scalar::from_ratio(3, 2), m)?]);
    let x = Expression::term(u1, &moment, std::slice::from_ref(&a))?;
    let y = Expression::deltas(u2, &[Scalar::zero()], std::slice::from_ref(&a))?;
    let opts = EvalOptions::default();
    let ev_x = x.evaluate(preset, window, opts)?;
    let xy = x.multiply(&y, &w)?;
    let ev_xy = xy.evaluate(preset, window, opts)?;
    let kernel = relation_kernel(preset, std::slice::from_ref(&x), window)?;
    let expected = preset.state_mode(&a, m, &a)?;

    let mut rep = CheckReport::new("counterexample");
    rep.set_truncation("window", window);
    rep.set_truncation("m", m);
    rep.witness = json!({
        "state": a.to_string(),
        "annulus": ev_x.to_graded().to_string(),
        "disc": ev_xy.to_graded().to_string(),
        "mode_product": expected.to_string(),
        "x_in_relations": kernel.len() == 1,
    });
    if !ev_x.is_zero() {
        rep.fail(rep.witness.clone());
        rep.note("the annulus expression does not evaluate to zero");
    }
    if ev_xy.to_graded() != expected {
        rep.fail(rep.witness.clone());
        rep.note("the product does not evaluate to the mode product");
    }
    if ev_xy.is_zero() {
        rep.fail(rep.witness.clone());
        rep.note(format!("a({m})a = 0, so this m gives no witness"));
    }
    Ok(rep.finish(0.0))
}

/// Splits every term of an expression on `U ⊔ V` by which of `U`, `V` holds
/// each coordinate's support.
pub fn split_by_support(
    expr: &Expression,
    u: &OpenSet,
    v: &OpenSet,
) -> Result<BTreeMap<(Vec<Slot>, Vec<Slot>), Scalar>> {
    let mut out = BTreeMap::new();
    for (key, c) in expr.terms() {
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for slot in key {
            let s = slot.0.support();
            match (u.contains_support(&s), v.contains_support(&s)) {
                (true, false) => left.push(slot.clone()),
                (false, true) => right.push(slot.clone()),
                _ => return Err(Error::InvalidSupport(format!("{} is not in exactly one part", slot.0))),
            }
        }
        out.insert((left, right), c.clone());
    }
    Ok(out)
}

fn single_term(carrier: &OpenSet, key: &[Slot]) -> Result<Expression> {
    let (factors, monos): (Vec<Factor>, Vec<Monomial>) = key.iter().cloned().unzip();
    let states: Vec<GradedVector> = monos.into_iter().map(GradedVector::basis).collect();
    Expression::term(carrier.clone(), &Functional::atom(Scalar::one(), factors), &states)
}

/// `E(U) ⊗ E(V) → E(U ⊔ V)` is injective on the span of the families and
/// every expression on `U ⊔ V` factors through the support partition.
pub fn multiplicativity_check(
    u: &OpenSet,
    v: &OpenSet,
    family_u: &[Expression],
    family_v: &[Expression],
    mixed: &[Expression],
) -> Result<CheckReport> {
    if !u.is_disjoint(v) {
        return Err(Error::NotDisjoint);
    }
    let w = OpenSet::union(vec![u.clone(), v.clone()])?;
    let mut rep = CheckReport::new("multiplicativity");

    // basis keys map to basis keys injectively
    let keys_u: Vec<Vec<Slot>> = family_u.iter().flat_map(|e| e.terms().map(|(k, _)| k.clone())).collect();
    let keys_v: Vec<Vec<Slot>> = family_v.iter().flat_map(|e| e.terms().map(|(k, _)| k.clone())).collect();
    let mut image: BTreeMap<Vec<Slot>, (Vec<Slot>, Vec<Slot>)> = BTreeMap::new();
    for ku in keys_u.iter().collect::<std::collections::BTreeSet<_>>() {
        let eu = single_term(u, ku)?;
        for kv in keys_v.iter().collect::<std::collections::BTreeSet<_>>() {
            let p = eu.multiply(&single_term(v, kv)?, &w)?;
            let mut terms = p.terms();
            let (kw, c) = terms.next().expect("product of basis terms is nonzero");
            if terms.next().is_some() || !c.is_one() {
                rep.fail(json!({"u": eu.to_string(), "v": kv.len(), "reason": "product is not a basis term"}));
            }
            if let Some(prev) = image.insert(kw.clone(), (ku.clone(), kv.clone())) {
                if prev != (ku.clone(), kv.clone()) {
                    rep.fail(json!({"collision": p.to_string()}));
                }
            }
        }
    }

    // products split back into their factors
    let mut products = 0;
    for x in family_u {
        for y in family_v {
            let p = x.multiply(y, &w)?;
            products += 1;
            let mut expected: BTreeMap<(Vec<Slot>, Vec<Slot>), Scalar> = BTreeMap::new();
            for (ka, ca) in x.terms() {
                for (kb, cb) in y.terms() {
                    expected.insert((ka.clone(), kb.clone()), ca * cb);
                }
            }
            if split_by_support(&p, u, v)? != expected {
                rep.fail(json!({"x": x.to_string(), "y": y.to_string()}));
            }
        }
    }

    // arbitrary expressions on U ⊔ V are sums of products
    for z in mixed {
        let z = z.extend(&w)?;
        let mut back = Expression::zero(w.clone());
        for ((ka, kb), c) in split_by_support(&z, u, v)? {
            back = back.add(&single_term(u, &ka)?.multiply(&single_term(v, &kb)?, &w)?.scale(&c))?;
        }
        if back != z {
            rep.fail(json!({"mixed": z.to_string()}));
        }
    }
    rep.set_truncation("basis_pairs", image.len());
    rep.set_truncation("products", products);
    rep.set_truncation("mixed", mixed.len());
    Ok(rep.finish(0.0))
}

fn zero_error(v: &ProductVector) -> f64 {
    if v.is_exact() {
        if v.is_zero() {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        v.norm()
    }
}

/// A relation `x′` on a smaller disc `B_{r′}(z₀)` stays a relation along the
/// scaling orbit `z ↦ z₀ + q(z − z₀)` inside `d = B_r(z₀)`.
#[allow(clippy::too_many_arguments)]
pub fn concentric_density_check(
    preset: &Preset,
    center: &Scalar,
    r: &Scalar,
    delta: &Scalar,
    relation: &Expression,
    qs: &[Scalar],
    window: DegreeWindow,
    tol: f64,
) -> Result<CheckReport> {
    let d = OpenSet::disc(center.clone(), r)?;
    let small = OpenSet::disc(center.clone(), delta)?;
    if !small.is_subset(&d) {
        return Err(Error::NotASubset);
    }
    let rp2 = match relation.carrier().as_disc() {
        Some((c, r2)) if c == center && relation.carrier().is_subset(&d) && relation.carrier() != &d => r2.clone(),
        _ => return Err(Error::Config(format!("{} is not a smaller disc concentric with {d}", relation.carrier()))),
    };
    let opts = EvalOptions::default();
    let mut rep = CheckReport::new("concentric_density");
    let base = relation.evaluate(preset, window, opts)?;
    rep.record(zero_error(&base), || json!({"q": "none", "relation": relation.to_string()}));
    let mut inside_small = 0;
    for q in qs {
        if q.is_zero() {
            continue;
        }
        let w = center - &(q * center);
        let y = relation.affine_act(q, &w)?;
        if y.carrier().is_subset(&small) {
            inside_small += 1;
        }
        let y = y.extend(&d)?;
        let v = y.evaluate(preset, window, opts)?;
        rep.record(zero_error(&v), || json!({"q": q.to_string()}));
    }
    rep.set_truncation("window", window);
    rep.set_truncation("samples", qs.len());
    rep.set_truncation("samples_in_small_disc", inside_small);
    rep.set_truncation("relation_radius_sq", rp2.to_string());
    Ok(rep.finish(tol))
}

/// A cover of an open set.
#[derive(Clone, Debug)]
pub enum Cover {
    Finite(Vec<OpenSet>),
    /// All discs `B_s(center)` with `s < r`, radius given squared.
    ConcentricDiscs { center: Scalar, r2: Real },
}

impl Cover {
    pub fn concentric(center: Scalar, r: &Scalar) -> Result<Cover> {
        let r2 = match OpenSet::disc(center.clone(), r)? {
            OpenSet::Disc { r2, .. } => r2,
            _ => unreachable!(),
        };
        Ok(Cover::ConcentricDiscs { center, r2 })
    }

    /// Up to two members containing all the supports.
    pub fn lifts(&self, supports: &[Support]) -> Vec<OpenSet> {
        match self {
            Cover::Finite(v) => v.iter().filter(|m| supports.iter().all(|s| m.contains_support(s))).take(2).cloned().collect(),
            Cover::ConcentricDiscs { center, r2 } => {
                let whole = OpenSet::Disc { center: center.clone(), r2: r2.clone() };
                if !supports.iter().all(|s| whole.contains_support(s)) {
                    return vec![];
                }
                // shrink s² = r²(1 − 2^{-j}) until it still contains everything
                let mut found = Vec::new();
                for j in (1..=64).rev() {
                    let f = Real::Exact(num_rational::BigRational::new(
                        (num_bigint::BigInt::from(1) << j) - 1,
                        num_bigint::BigInt::from(1) << j,
                    ));
                    let m = OpenSet::Disc { center: center.clone(), r2: r2.mul(&f) };
                    if supports.iter().all(|s| m.contains_support(s)) {
                        found.push(m);
                    }
                    if found.len() == 2 {
                        break;
                    }
                }
                found.reverse();
                found
            }
        }
    }

    pub fn describe(&self) -> Value {
        match self {
            Cover::Finite(v) => json!({"finite": v.iter().map(OpenSet::to_json).collect::<Vec<_>>()}),
            Cover::ConcentricDiscs { center, r2 } => json!({"concentric": {"center": center.to_string(), "r2": r2.to_string()}}),
        }
    }
}

/// Weiss property on the finite supports of the expressions, exactness of
/// extension along lifts, and agreement of different lifts.
pub fn weiss_cover_check(
    preset: &Preset,
    x: &OpenSet,
    cover: &Cover,
    exprs: &[Expression],
    window: DegreeWindow,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new("weiss_cover");
    if let Cover::Finite(v) = cover {
        for m in v {
            if !m.is_subset(x) {
                return Err(Error::NotASubset);
            }
        }
    }
    let opts = EvalOptions::default();
    let mut lifted = 0;
    for e in exprs {
        let e = e.extend(x)?;
        let lifts = cover.lifts(&e.supports());
        if lifts.is_empty() {
            let pts: Vec<String> = e.supports().iter().map(|s| format!("{s:?}")).collect();
            rep.fail(json!({"expression": e.to_string(), "supports": pts}));
            rep.note("no cover member contains the supports of an expression");
            continue;
        }
        let ev = e.evaluate(preset, window, opts)?;
        let mut images = Vec::new();
        for l in &lifts {
            let on_l = e.with_carrier(l.clone())?;
            let back = on_l.extend(x)?;
            let ev_l = on_l.evaluate(preset, window, opts)?;
            let ev_back = back.evaluate(preset, window, opts)?;
            if back != e || ev_l != ev || ev_back != ev {
                rep.fail(json!({"expression": e.to_string(), "lift": l.to_json()}));
            }
            images.push(back);
            lifted += 1;
        }
        if let [a, b] = &images[..] {
            let diff = a.sub(b)?;
            if !diff.evaluate(preset, window, opts)?.is_zero() {
                rep.fail(json!({"expression": e.to_string(), "reason": "lifts disagree"}));
            }
        }
    }
    rep.set_truncation("window", window);
    rep.set_truncation("expressions", exprs.len());
    rep.set_truncation("lifts", lifted);
    rep.set_truncation("cover", cover.describe());
    Ok(rep.finish(0.0))
}

/// One sample of the two-point square: states at points, degree `k`.
#[derive(Clone, Debug)]
pub struct RoundtripSample {
    pub states: Vec<GradedVector>,
    pub points: Vec<Scalar>,
    pub k: i64,
}

/// `ev([δ₀ ⊗ a]) = a` for every basis state of the window, and the contour
/// projection of `[δ_z ⊗ a]` against `p_k μ(a, z)` on the samples.
pub fn roundtrip_check(
    preset: &Preset,
    window: DegreeWindow,
    samples: &[RoundtripSample],
    tol: f64,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new("roundtrip");
    let b1 = OpenSet::disc(Scalar::zero(), &Scalar::one())?;
    let opts = EvalOptions::default();
    let basis = preset.basis_up_to(window.lo().max(0), window.hi());
    for m in &basis {
        let a = GradedVector::basis(m.clone());
        let ev = Expression::deltas(b1.clone(), &[Scalar::zero()], std::slice::from_ref(&a))?.evaluate(preset, window, opts)?;
        if ev != ProductVector::from_graded(&a, window) {
            rep.fail(json!({"state": a.to_string(), "value": ev.to_graded().to_string()}));
        }
    }
    for s in samples {
        let rmax = s.points.iter().map(Scalar::abs).fold(0.0, f64::max);
        let r = Scalar::from_int(rmax.ceil() as i64 + 1);
        let big_r = &r * &Scalar::from_int(2);
        let carrier = OpenSet::disc(Scalar::zero(), &r)?;
        let e = Expression::deltas(carrier, &s.points, &s.states)?;
        let config = PointConfiguration::new(s.points.clone())?;
        let mu = mu_evaluate(preset, &s.states, &config, window, MuOptions::for_config(1e-13, &config, window))?;
        let n = crate::functional::default_quadrature_n(window);
        let proj = weight_project(preset, &e, s.k, &big_r, n, window, 1e-6)?;
        let expected = mu.component(s.k);
        let err = proj.value.distance(&expected) / expected.norm().max(1.0);
        rep.record(err, || {
            json!({
                "states": s.states.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "points": s.points.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "k": s.k,
            })
        });
    }
    rep.set_truncation("window", window);
    rep.set_truncation("basis_states", basis.len());
    rep.set_truncation("samples", samples.len());
    Ok(rep.finish(tol))
}
