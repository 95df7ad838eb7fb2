//! The full check suite: one labelled entry per structural result, run
//! deterministically from a seed.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use voxfact::correlator::{
    check_associativity, check_equivariance, check_holomorphy, check_insertion_at_zero, check_meromorphicity,
    check_permutation_invariance, mu_closed_form, mu_numeric, translate_product, MuOptions, PointConfiguration,
};
use voxfact::expression::{EvalOptions, Expression};
use voxfact::factorization::{
    concentric_density_check, multiplicativity_check, relation_kernel, roundtrip_check, run_counterexample,
    weight_projections, weiss_cover_check, Cover, RoundtripSample,
};
use voxfact::functional::{default_quadrature_n, Factor, Functional};
use voxfact::{CheckReport, DegreeWindow, Error, GradedVector, OpenSet, Preset, PresetSpec, ProductVector, Result, Scalar};

use crate::inputs::Sampler;

/// Labels of the suite entries with the check each one runs.
pub const IN_SCOPE: &[(&str, &str)] = &[
    ("n-point multiplication", "n_point"),
    ("dilation action and weight spaces", "dilation_equivariance"),
    ("weight space isomorphism", "weight_space_isomorphism"),
    ("weight projection by contour integral", "weight_projection"),
    ("decomposition into weight projections", "weight_decomposition"),
    ("multiplication maps from a prefactorization algebra", "mu_from_expressions"),
    ("insertion at zero", "insertion_at_zero"),
    ("equivariance under dilation", "equivariance"),
    ("associativity", "associativity"),
    ("meromorphic operator product expansion", "meromorphicity"),
    ("precosheaf of expressions", "precosheaf"),
    ("external product of analytic functionals", "external_product"),
    ("affine action on expressions", "affine_action"),
    ("evaluation map", "evaluation_equivariance"),
    ("relations", "relations"),
    ("relations generated on discs", "relations_generated_on_discs"),
    ("quotient by relations", "quotient"),
    ("annulus counterexample", "counterexample"),
    ("holomorphy of the dilation maps", "holomorphy"),
    ("relations on a disc", "relations_on_disc"),
    ("comparison isomorphism", "comparison_isomorphism"),
    ("contour identity for weight projections", "contour_identity"),
    ("multiplicativity", "multiplicativity"),
    ("Weiss covers", "weiss_covers"),
    ("relations on smaller concentric discs", "concentric_density"),
    ("Weiss cosheaf", "weiss_cosheaf"),
];

fn default_preset() -> String {
    "heisenberg".into()
}

fn default_window() -> String {
    "0:5".into()
}

fn default_tol() -> f64 {
    1e-8
}

/// Suite configuration; every field can be overridden from the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_preset")]
    pub preset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
    #[serde(default = "default_window")]
    pub window: String,
    /// Tolerance for numeric checks; exact checks use zero.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_n: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Restricts the run to these check ids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub only: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tables: Option<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            preset: default_preset(),
            c: None,
            level: None,
            window: default_window(),
            tol: default_tol(),
            quad_n: None,
            seed: 0,
            only: None,
            out: None,
            tables: None,
        }
    }
}

impl SuiteConfig {
    pub fn from_json_str(text: &str) -> Result<SuiteConfig> {
        serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("config line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn preset_spec(&self) -> PresetSpec {
        PresetSpec { preset: self.preset.clone(), c: self.c.clone(), level: self.level.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub label: String,
    pub check: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<CheckReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub preset: PresetSpec,
    pub window: DegreeWindow,
    pub seed: u64,
    pub tol: f64,
    pub pass: bool,
    pub entries: Vec<SuiteEntry>,
}

enum Outcome {
    Report(CheckReport),
    Skipped(String),
}

struct Ctx {
    preset: Preset,
    window: DegreeWindow,
    tol: f64,
    quad_n: usize,
    seed: u64,
}

impl Ctx {
    fn sampler(&self, id: &str) -> Sampler {
        let h = id.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3));
        Sampler::new(self.seed ^ h)
    }

    /// Highest degree for sampled nonvacuum states.
    fn state_hi(&self) -> Option<i64> {
        let hi = self.window.hi().min(2);
        (hi >= 1).then_some(hi)
    }

    fn generator(&self) -> GradedVector {
        self.preset.generator_state(self.preset.generators()[0])
    }
}

fn disc(c: Scalar, r: Scalar) -> Result<OpenSet> {
    OpenSet::disc(c, &r)
}

fn ratio(n: i64, d: i64) -> Scalar {
    Scalar::from_ratio(n, d)
}

/// Combines several reports of one check: the worst error, the first
/// failure witness, and all notes.
pub fn merge_reports(axiom: &str, reports: Vec<CheckReport>) -> CheckReport {
    let mut out = CheckReport::new(axiom);
    let mut worst: Option<&CheckReport> = None;
    for r in &reports {
        if worst.is_none_or(|w| r.max_err > w.max_err) {
            worst = Some(r);
        }
    }
    if let Some(w) = worst {
        out.max_err = w.max_err;
        out.witness = w.witness.clone();
        out.truncation = w.truncation.clone();
    }
    if let Some(f) = reports.iter().find(|r| !r.pass) {
        out.fail(f.witness.clone());
        out.truncation = f.truncation.clone();
    }
    for r in &reports {
        for n in &r.notes {
            if !out.notes.contains(n) {
                out.notes.push(n.clone());
            }
        }
    }
    out.set_truncation("runs", reports.len());
    out
}

fn exact_err(a: &ProductVector, b: &ProductVector) -> f64 {
    if a == b {
        0.0
    } else if a.is_exact() && b.is_exact() {
        a.max_rel_error(b).max(f64::MIN_POSITIVE)
    } else {
        a.max_rel_error(b)
    }
}

/// Distinct exact points in a band, pairwise at least `gap` apart.
fn distinct_points(s: &mut Sampler, n: usize, lo: f64, hi: f64, gap: f64) -> Vec<Scalar> {
    let mut pts: Vec<Scalar> = Vec::new();
    while pts.len() < n {
        let z = s.point_in_band(lo, hi, 8);
        if pts.iter().all(|p| (p - &z).abs() >= gap) {
            pts.push(z);
        }
    }
    pts
}

/// Distinct exact points within `r` of `c` whose successive moduli are in
/// ratio at most `ratio`, so the radially ordered series converges quickly.
/// The disc must leave room for such a configuration.
fn radial_points(s: &mut Sampler, n: usize, c: &Scalar, r: f64, ratio: f64) -> Vec<Scalar> {
    loop {
        let mut pts: Vec<Scalar> = (0..n).map(|_| s.point_near(c, r, 8)).collect();
        pts.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        let separated = pts.windows(2).all(|w| w[1].abs() <= ratio * w[0].abs() && (&w[0] - &w[1]).abs() >= 0.1);
        if separated {
            return pts;
        }
    }
}

/// Random delta expressions of arity 1 or 2 on `B_r(0)`.
fn delta_exprs(ctx: &Ctx, s: &mut Sampler, count: usize, r: Scalar, spread: f64) -> Result<Vec<Expression>> {
    let hi = ctx.state_hi().unwrap_or(0);
    let lo = if hi == 0 { 0 } else { 1 };
    let carrier = disc(Scalar::zero(), r)?;
    let mut out = Vec::new();
    for i in 0..count {
        let arity = 1 + i % 2;
        let pts = distinct_points(s, arity, 0.0, spread, 0.1);
        let states: Vec<GradedVector> =
            (0..arity).map(|_| s.basis_state(&ctx.preset, lo, hi).unwrap_or_else(GradedVector::vacuum)).collect();
        out.push(Expression::deltas(carrier.clone(), &pts, &states)?);
    }
    Ok(out)
}

fn structural(rep: &mut CheckReport, ok: bool, witness: impl FnOnce() -> Value) {
    if !ok {
        rep.fail(witness());
    }
}

fn run_check(ctx: &Ctx, id: &str) -> Result<Outcome> {
    let p = &ctx.preset;
    let w = ctx.window;
    let opts = EvalOptions::default();
    let mut s = ctx.sampler(id);
    let needs_states = |ctx: &Ctx| ctx.state_hi().ok_or(());
    let skip_no_states = || Ok(Outcome::Skipped("the window holds no nonvacuum states".into()));
    let report = match id {
        "n_point" => {
            let Ok(hi) = needs_states(ctx) else { return skip_no_states() };
            let states: Vec<GradedVector> = (0..3).map(|_| s.basis_state(p, 1, hi).unwrap()).collect();
            let pts = vec![s.point_in_band(1.75, 2.0, 8), s.point_in_band(0.9, 1.1, 8), s.point_in_band(0.3, 0.45, 8)];
            check_permutation_invariance(p, &states, &PointConfiguration::new(pts)?, w, ctx.tol)?
        }
        "dilation_equivariance" => {
            let mut rep = CheckReport::new(id);
            for x in delta_exprs(ctx, &mut s, 6, Scalar::one(), 0.9)? {
                let q = s.nonzero(4);
                let lhs = x.affine_act(&q, &Scalar::zero())?.evaluate(p, w, opts)?;
                let rhs = x.evaluate(p, w, opts)?.grading_act(&q)?;
                rep.record(exact_err(&lhs, &rhs), || json!({"expr": x.to_string(), "q": q.to_string()}));
            }
            rep.set_truncation("window", w);
            rep.finish(0.0)
        }
        "weight_space_isomorphism" => {
            let mut rep = CheckReport::new(id);
            let b1 = disc(Scalar::zero(), Scalar::one())?;
            let basis = p.basis_up_to(w.lo().max(0), w.hi().min(4));
            for m in &basis {
                let a = GradedVector::basis(m.clone());
                let x = Expression::deltas(b1.clone(), &[Scalar::zero()], std::slice::from_ref(&a))?;
                for proj in weight_projections(p, &x, &Scalar::from_int(2), ctx.quad_n, w, f64::INFINITY)? {
                    let want = if proj.k == m.degree() { a.to_approx() } else { GradedVector::zero() };
                    let err = proj.value.distance(&want) / want.norm().max(1.0);
                    rep.record(err.max(proj.leak), || json!({"state": m.to_string(), "k": proj.k}));
                }
            }
            rep.set_truncation("states", basis.len());
            rep.set_truncation("quad_n", ctx.quad_n);
            rep.finish(1e-9)
        }
        "weight_projection" | "weight_decomposition" => {
            let mut rep = CheckReport::new(id);
            for x in delta_exprs(ctx, &mut s, 6, Scalar::one(), 0.9)? {
                let projs = weight_projections(p, &x, &Scalar::from_int(2), ctx.quad_n, w, f64::INFINITY)?;
                if id == "weight_projection" {
                    for proj in &projs {
                        rep.record(proj.err.max(proj.leak), || json!({"expr": x.to_string(), "k": proj.k}));
                    }
                } else {
                    let mut sum = ProductVector::zero(w);
                    for proj in &projs {
                        sum.add_component(proj.k, &proj.value, &Scalar::one());
                    }
                    let ev = x.evaluate(p, w, opts)?;
                    rep.record(sum.max_rel_error(&ev), || json!({"expr": x.to_string()}));
                }
            }
            rep.set_truncation("quad_n", ctx.quad_n);
            rep.set_truncation("window", w);
            rep.finish(1e-9)
        }
        "mu_from_expressions" => {
            let mut rep = CheckReport::new(id);
            let b = disc(Scalar::zero(), Scalar::from_int(3))?;
            let hi = ctx.state_hi().unwrap_or(0);
            for arity in [1usize, 2, 2, 3] {
                let pts = match arity {
                    3 => vec![s.point_in_band(1.75, 2.0, 8), s.point_in_band(0.9, 1.1, 8), s.point_in_band(0.3, 0.45, 8)],
                    _ => distinct_points(&mut s, arity, 0.0, 2.0, 0.25),
                };
                let states: Vec<GradedVector> =
                    (0..arity).map(|_| s.basis_state(p, hi.min(1), if arity == 3 { hi.min(1) } else { hi }).unwrap_or_else(GradedVector::vacuum)).collect();
                let x = Expression::deltas(b.clone(), &pts, &states)?;
                let ev = x.evaluate(p, w, opts)?;
                let config = PointConfiguration::new(pts.clone())?;
                let direct = if arity <= 2 {
                    mu_closed_form(p, &states, &config, w)?
                } else {
                    mu_numeric(p, &states, &config, w, MuOptions::for_config(1e-13, &config, w))?.value
                };
                rep.record(exact_err(&ev, &direct), || {
                    json!({"points": pts.iter().map(|z| z.to_string()).collect::<Vec<_>>()})
                });
            }
            rep.set_truncation("window", w);
            rep.finish(ctx.tol)
        }
        "insertion_at_zero" => check_insertion_at_zero(p, w)?,
        "equivariance" => {
            let Ok(hi) = needs_states(ctx) else { return skip_no_states() };
            let mut reps = Vec::new();
            for _ in 0..8 {
                let states = vec![s.basis_state(p, 1, hi).unwrap(), s.basis_state(p, 1, hi).unwrap()];
                let pts = vec![s.point_in_band(1.0, 2.0, 8), s.point_in_band(0.0, 0.5, 8)];
                let q = s.nonzero(4);
                reps.push(check_equivariance(p, &q, &states, &PointConfiguration::new(pts)?, w, ctx.tol)?);
            }
            merge_reports(id, reps)
        }
        "associativity" => {
            let g = ctx.generator();
            check_associativity(
                p,
                &[(g.clone(), Scalar::from_int(2))],
                &Scalar::zero(),
                &[(g.clone(), ratio(1, 2)), (g, Scalar::zero())],
                w,
                ctx.tol,
            )?
        }
        "meromorphicity" => check_meromorphicity(p, DegreeWindow::new(w.lo(), w.hi().min(4))?)?,
        "precosheaf" => {
            let mut rep = CheckReport::new(id);
            let (b_half, b1, b2) = (disc(Scalar::zero(), ratio(1, 2))?, disc(Scalar::zero(), Scalar::one())?, disc(Scalar::zero(), Scalar::from_int(2))?);
            let ann = OpenSet::annulus(Scalar::zero(), &Scalar::one(), &Scalar::from_int(2))?;
            for x in delta_exprs(ctx, &mut s, 5, ratio(1, 2), 0.45)? {
                let chain = x.extend(&b1)?.extend(&b2)?;
                structural(&mut rep, chain == x.extend(&b2)?, || json!({"expr": x.to_string(), "reason": "composition"}));
                structural(&mut rep, x.extend(&b_half)? == x, || json!({"expr": x.to_string(), "reason": "identity"}));
                structural(&mut rep, matches!(x.extend(&ann), Err(Error::NotASubset)), || json!({"reason": "non-inclusion accepted"}));
            }
            rep.finish(0.0)
        }
        "external_product" => {
            let mut rep = CheckReport::new(id);
            let us = [disc(Scalar::from_int(-3), Scalar::one())?, disc(Scalar::zero(), Scalar::one())?, disc(Scalar::from_int(3), Scalar::one())?];
            let big = disc(Scalar::zero(), Scalar::from_int(5))?;
            for _ in 0..4 {
                let xs = us
                    .iter()
                    .map(|u| {
                        let c = match u.as_disc() {
                            Some((c, _)) => c.clone(),
                            None => Scalar::zero(),
                        };
                        let n = 1 + s.index(2);
                        let pts = distinct_points(&mut s, n, 0.0, 0.9, 0.1);
                        let pts: Vec<Scalar> = pts.iter().map(|z| z + &c).collect();
                        let states: Vec<GradedVector> =
                            pts.iter().map(|_| s.basis_state(p, 0, ctx.window.hi().min(2)).unwrap()).collect();
                        Expression::deltas(u.clone(), &pts, &states)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let xy = xs[0].multiply(&xs[1], &OpenSet::union(vec![us[0].clone(), us[1].clone()])?)?;
                let yz = xs[1].multiply(&xs[2], &OpenSet::union(vec![us[1].clone(), us[2].clone()])?)?;
                let left = xy.multiply(&xs[2], &big)?;
                let right = xs[0].multiply(&yz, &big)?;
                structural(&mut rep, left == right, || json!({"reason": "associativity", "x": xs[0].to_string()}));
                let unit = Expression::unit(us[1].clone());
                structural(&mut rep, xs[0].multiply(&unit, &big)? == xs[0].extend(&big)?, || json!({"reason": "unit"}));
                structural(&mut rep, xs[0].multiply(&xs[2], &big)? == xs[2].multiply(&xs[0], &big)?, || json!({"reason": "symmetry"}));
            }
            rep.finish(0.0)
        }
        "affine_action" => {
            let mut rep = CheckReport::new(id);
            for x in delta_exprs(ctx, &mut s, 5, Scalar::one(), 0.9)? {
                let (l1, w1, l2, w2) = (s.nonzero(4), s.point_in_band(0.0, 2.0, 4), s.nonzero(4), s.point_in_band(0.0, 2.0, 4));
                let lhs = x.affine_act(&l2, &w2)?.affine_act(&l1, &w1)?;
                let rhs = x.affine_act(&(&l1 * &l2), &(&(&l1 * &w2) + &w1))?;
                structural(&mut rep, lhs == rhs, || json!({"expr": x.to_string(), "reason": "composition"}));
                structural(&mut rep, x.affine_act(&Scalar::one(), &Scalar::zero())? == x, || json!({"reason": "identity"}));
            }
            rep.finish(0.0)
        }
        "evaluation_equivariance" => {
            let mut rep = CheckReport::new(id);
            for x in delta_exprs(ctx, &mut s, 6, Scalar::one(), 0.9)? {
                let (l, t) = (s.nonzero(4), s.point_in_band(0.0, 2.0, 4));
                let lhs = x.affine_act(&l, &t)?.evaluate(p, w, opts)?;
                let rhs = translate_product(p, &x.evaluate(p, w, opts)?.grading_act(&l)?, &t)?;
                rep.record(exact_err(&lhs, &rhs), || json!({"expr": x.to_string(), "lambda": l.to_string(), "w": t.to_string()}));
            }
            rep.set_truncation("window", w);
            rep.finish(ctx.tol)
        }
        "relations" | "quotient" => {
            let Ok(hi) = needs_states(ctx) else { return skip_no_states() };
            let b1 = disc(Scalar::zero(), Scalar::one())?;
            let a = s.basis_state(p, 1, hi).unwrap();
            let n = (w.hi() + 2) as usize;
            let mut family: Vec<Expression> = distinct_points(&mut s, n, 0.0, 0.9, 0.1)
                .into_iter()
                .map(|z| Expression::deltas(b1.clone(), &[z], std::slice::from_ref(&a)))
                .collect::<Result<_>>()?;
            family.push(family[0].scale(&Scalar::from_int(3)));
            let kernel = relation_kernel(p, &family, w)?;
            let mut rep = CheckReport::new(id);
            if id == "relations" {
                for c in &kernel {
                    let rel = Expression::linear_combination(&family, c)?;
                    let ev = rel.evaluate(p, w, opts)?;
                    structural(&mut rep, ev.is_zero(), || json!({"kernel_vector": c.iter().map(|x| x.to_string()).collect::<Vec<_>>()}));
                }
            } else {
                let values = family.iter().map(|x| x.evaluate(p, w, opts)).collect::<Result<Vec<_>>>()?;
                let rank = image_rank(&values)?;
                structural(&mut rep, rank + kernel.len() == family.len(), || json!({"rank": rank, "nullity": kernel.len()}));
                let diff = family.last().unwrap().sub(&family[0].scale(&Scalar::from_int(3)))?;
                structural(&mut rep, diff.is_zero(), || json!({"reason": "scaled copy differs"}));
                rep.set_truncation("image_rank", rank);
            }
            rep.set_truncation("family", family.len());
            rep.set_truncation("kernel_dim", kernel.len());
            rep.set_truncation("window", w);
            rep.finish(0.0)
        }
        "relations_generated_on_discs" => {
            let Ok(hi) = needs_states(ctx) else { return skip_no_states() };
            let mut rep = CheckReport::new(id);
            let d = disc(Scalar::zero(), ratio(1, 2))?;
            let d2 = disc(Scalar::from_int(2), ratio(1, 2))?;
            let big = disc(Scalar::zero(), Scalar::from_int(3))?;
            for _ in 0..4 {
                let a = s.basis_state(p, 1, hi).unwrap();
                let z = s.point_in_band(0.0, 0.2, 8);
                let rels = exact_relations(p, &d, &a, &z)?;
                let y = Expression::deltas(d2.clone(), &[s.point_near(&Scalar::from_int(2), 0.4, 8)], &[s.basis_state(p, 1, hi).unwrap()])?;
                for x in rels {
                    let ev_x = x.evaluate(p, w, opts)?;
                    let ev_xy = x.multiply(&y, &big)?.evaluate(p, w, opts)?;
                    rep.record(exact_err(&ev_x, &ProductVector::zero(w)).max(exact_err(&ev_xy, &ProductVector::zero(w))), || {
                        json!({"relation": x.to_string(), "other": y.to_string()})
                    });
                }
            }
            rep.set_truncation("window", w);
            rep.finish(0.0)
        }
        "counterexample" => {
            let Some((m, _)) = counterexample_mode(p)? else {
                return Ok(Outcome::Skipped("no generator has a nonzero nonnegative self mode".into()));
            };
            let mut rep = run_counterexample(p, m)?;
            rep.axiom = id.into();
            rep
        }
        "holomorphy" => {
            let g = ctx.generator();
            check_holomorphy(p, &[g.clone(), g], &PointConfiguration::parse("2,0")?, 1, 0.25, 32, w, ctx.tol)?
        }
        "relations_on_disc" => {
            let Ok(hi) = needs_states(ctx) else { return skip_no_states() };
            let b1 = disc(Scalar::zero(), Scalar::one())?;
            let b_half = disc(Scalar::zero(), ratio(1, 2))?;
            let a = s.basis_state(p, 1, hi).unwrap();
            let n = (w.hi() + 2) as usize;
            let small: Vec<Expression> = distinct_points(&mut s, n, 0.0, 0.45, 0.05)
                .into_iter()
                .map(|z| Expression::deltas(b_half.clone(), &[z], std::slice::from_ref(&a)))
                .collect::<Result<_>>()?;
            let big: Vec<Expression> = small.iter().map(|x| x.extend(&b1)).collect::<Result<_>>()?;
            let k_small = relation_kernel(p, &small, w)?;
            let k_big = relation_kernel(p, &big, w)?;
            let mut rep = CheckReport::new(id);
            structural(&mut rep, k_small == k_big, || json!({"small": k_small.len(), "big": k_big.len()}));
            rep.set_truncation("kernel_dim", k_big.len());
            rep.finish(0.0)
        }
        "comparison_isomorphism" => {
            let mut rep = roundtrip_check(p, w, &[], 0.0)?;
            rep.axiom = id.into();
            rep
        }
        "contour_identity" => {
            let Ok(hi) = needs_states(ctx) else { return skip_no_states() };
            let mut samples = Vec::new();
            for i in 0..6 {
                let k = w.lo() + s.index((w.hi() - w.lo() + 1) as usize) as i64;
                if i % 2 == 0 {
                    samples.push(RoundtripSample { states: vec![s.basis_state(p, 1, hi).unwrap()], points: vec![s.point_in_band(0.0, 1.5, 4)], k });
                } else {
                    let states = vec![s.basis_state(p, 1, hi).unwrap(), s.basis_state(p, 1, hi).unwrap()];
                    samples.push(RoundtripSample { states, points: vec![s.point_in_band(0.5, 1.5, 4), Scalar::zero()], k });
                }
            }
            let mut rep = roundtrip_check(p, w, &samples, 1e-9)?;
            rep.axiom = id.into();
            rep
        }
        "multiplicativity" => {
            let (u, v) = (disc(Scalar::from_int(-2), Scalar::one())?, disc(Scalar::from_int(2), Scalar::one())?);
            let hi = (0..=w.hi().min(3)).rev().find(|&h| p.basis_up_to(0, h).len() <= 8).unwrap_or(0);
            let fu = point_families(p, &u, &[Scalar::from_int(-2), ratio(-3, 2)], hi)?;
            let fv = point_families(p, &v, &[Scalar::from_int(2), ratio(5, 2)], hi)?;
            let uv = OpenSet::union(vec![u.clone(), v.clone()])?;
            let mut mixed = Vec::new();
            for _ in 0..4 {
                let pts = vec![s.point_near(&Scalar::from_int(-2), 0.5, 8), s.point_near(&Scalar::from_int(2), 0.5, 8)];
                let states: Vec<GradedVector> = pts.iter().map(|_| s.basis_state(p, 0, hi).unwrap()).collect();
                mixed.push(Expression::deltas(uv.clone(), &pts, &states)?);
            }
            multiplicativity_check(&u, &v, &fu, &fv, &mixed)?
        }
        "weiss_covers" => {
            let b1 = disc(Scalar::zero(), Scalar::one())?;
            let conc = Cover::concentric(Scalar::zero(), &Scalar::one())?;
            let mut exprs = Vec::new();
            for i in 0..6 {
                let pts = match 1 + i % 3 {
                    3 => radial_points(&mut s, 3, &Scalar::zero(), 0.95, 0.5),
                    n => distinct_points(&mut s, n, 0.0, 0.95, 0.1),
                };
                let top = if pts.len() == 3 { 1 } else { 2 };
                let states: Vec<GradedVector> = pts.iter().map(|_| s.basis_state(p, 0, w.hi().min(top)).unwrap()).collect();
                exprs.push(Expression::deltas(b1.clone(), &pts, &states)?);
            }
            let good = weiss_cover_check(p, &b1, &conc, &exprs, DegreeWindow::new(w.lo(), w.hi().min(4))?)?;
            let (x, cover, straddle) = non_weiss_cover(p)?;
            let bad = weiss_cover_check(p, &x, &cover, &[straddle], w)?;
            let mut rep = CheckReport::new(id);
            structural(&mut rep, good.pass, || json!({"concentric": good.witness.clone()}));
            structural(&mut rep, !bad.pass, || json!({"reason": "non-Weiss cover accepted"}));
            rep.set_truncation("concentric", good.truncation.clone());
            rep.set_truncation("non_weiss_rejected", !bad.pass);
            rep.finish(0.0)
        }
        "concentric_density" => {
            let Ok(hi) = needs_states(ctx) else { return skip_no_states() };
            let d = disc(Scalar::zero(), ratio(1, 2))?;
            let a = s.basis_state(p, 1, hi).unwrap();
            let n = (w.hi() + 2) as usize;
            let family: Vec<Expression> = distinct_points(&mut s, n, 0.0, 0.45, 0.05)
                .into_iter()
                .map(|z| Expression::deltas(d.clone(), &[z], std::slice::from_ref(&a)))
                .collect::<Result<_>>()?;
            let mut relations: Vec<Expression> = relation_kernel(p, &family, w)?
                .iter()
                .map(|c| Expression::linear_combination(&family, c))
                .collect::<Result<_>>()?;
            relations.extend(exact_relations(p, &d, &a, &ratio(1, 8))?);
            let qs = [ratio(1, 4), ratio(1, 2), Scalar::one(), "1/3+1/3i".parse()?];
            let reps = relations
                .iter()
                .map(|x| concentric_density_check(p, &Scalar::zero(), &Scalar::one(), &ratio(1, 4), x, &qs, w, 0.0))
                .collect::<Result<Vec<_>>>()?;
            merge_reports(id, reps)
        }
        "weiss_cosheaf" => {
            let x = disc(Scalar::zero(), Scalar::from_int(2))?;
            let centers: Vec<Scalar> = [-1i64, 0, 1]
                .iter()
                .flat_map(|&i| [-1i64, 0, 1].map(|j| Scalar::gaussian(ratio(i, 2).as_exact().unwrap().re.clone(), ratio(j, 2).as_exact().unwrap().re.clone())))
                .collect();
            let cover = Cover::Finite(centers.iter().map(|c| disc(c.clone(), ratio(9, 10))).collect::<Result<_>>()?);
            let mut exprs = Vec::new();
            for _ in 0..6 {
                let c = centers[s.index(centers.len())].clone();
                let pts = radial_points(&mut s, 3, &c, 0.4, 0.65);
                let states: Vec<GradedVector> = pts.iter().map(|_| s.basis_state(p, 0, w.hi().min(1)).unwrap()).collect();
                exprs.push(Expression::deltas(x.clone(), &pts, &states)?);
            }
            weiss_cover_check(p, &x, &cover, &exprs, DegreeWindow::new(w.lo(), w.hi().min(2))?)?
        }
        other => return Err(Error::Config(format!("unknown check `{other}`"))),
    };
    Ok(Outcome::Report(report))
}

/// Rank of a family of exact product vectors.
fn image_rank(values: &[ProductVector]) -> Result<usize> {
    let zero_family: Vec<ProductVector> = values.to_vec();
    let kernel = voxfact::factorization::null_space(&columns(&zero_family))?;
    Ok(values.len() - kernel.len())
}

fn columns(values: &[ProductVector]) -> Vec<Vec<Scalar>> {
    let mut keys = Vec::new();
    for v in values {
        for (k, g) in v.components() {
            for (m, _) in g.terms() {
                if !keys.contains(&(k, m.clone())) {
                    keys.push((k, m.clone()));
                }
            }
        }
    }
    values.iter().map(|v| keys.iter().map(|(k, m)| v.component(*k).coeff(m)).collect()).collect()
}

/// Relations valid in every degree: the derivative relation
/// `[δ′_z ⊗ a] − [δ_z ⊗ Ta]` and a nonnegative moment on a circle about `z`.
pub fn exact_relations(p: &Preset, d: &OpenSet, a: &GradedVector, z: &Scalar) -> Result<Vec<Expression>> {
    let jet = Expression::term(d.clone(), &Functional::atom(Scalar::one(), vec![Factor::jet(z.clone(), 1)]), std::slice::from_ref(a))?;
    let ta = p.translate(a)?;
    let jet_rel = jet.sub(&Expression::deltas(d.clone(), std::slice::from_ref(z), &[ta])?)?;
    let moment = Functional::atom(Scalar::one(), vec![Factor::moment(z.clone(), &Scalar::from_ratio(1, 8), 1)?]);
    let moment_rel = Expression::term(d.clone(), &moment, std::slice::from_ref(a))?;
    Ok(vec![jet_rel, moment_rel])
}

/// The mode `m ≥ 0` used for the counterexample: the largest one with
/// `g₍ₘ₎g ≠ 0` for some generator `g`.
pub fn counterexample_mode(p: &Preset) -> Result<Option<(i64, GradedVector)>> {
    let mut best: Option<(i64, GradedVector)> = None;
    for &g in p.generators() {
        let a = p.generator_state(g);
        let m = p.pole_bound(&a, &a)? - 1;
        if m >= 0 && best.as_ref().is_none_or(|(bm, _)| m > *bm) {
            best = Some((m, a));
        }
    }
    Ok(best)
}

/// A genuine cover of `B₂(0)` by `B₁(0)` and the annulus `1/2 < |z| < 2`
/// that fails the Weiss property on `{0, 3/2}`, with a straddling expression.
pub fn non_weiss_cover(p: &Preset) -> Result<(OpenSet, Cover, Expression)> {
    let x = disc(Scalar::zero(), Scalar::from_int(2))?;
    let cover = Cover::Finite(vec![
        disc(Scalar::zero(), Scalar::one())?,
        OpenSet::annulus(Scalar::zero(), &ratio(1, 2), &Scalar::from_int(2))?,
    ]);
    let g = p.generator_state(p.generators()[0]);
    let e = Expression::deltas(x.clone(), &[Scalar::zero(), ratio(3, 2)], &[g.clone(), g])?;
    Ok((x, cover, e))
}

/// The unit, one-point deltas and two-point deltas at the given points with
/// every basis state of degree `≤ hi`.
pub fn point_families(p: &Preset, u: &OpenSet, pts: &[Scalar], hi: i64) -> Result<Vec<Expression>> {
    let basis: Vec<GradedVector> = p.basis_up_to(0, hi).into_iter().map(GradedVector::basis).collect();
    let mut out = vec![Expression::unit(u.clone())];
    for z in pts {
        for a in &basis {
            out.push(Expression::deltas(u.clone(), std::slice::from_ref(z), std::slice::from_ref(a))?);
        }
    }
    if let [z0, z1, ..] = pts {
        for a in &basis {
            for b in &basis {
                out.push(Expression::deltas(u.clone(), &[z0.clone(), z1.clone()], &[a.clone(), b.clone()])?);
            }
        }
    }
    Ok(out)
}

/// Runs every selected check in label order.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let spec = config.preset_spec();
    let preset = Preset::from_spec(&spec)?;
    let window: DegreeWindow = config.window.parse()?;
    if !(config.tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {}", config.tol)));
    }
    if let Some(only) = &config.only {
        for id in only {
            if !IN_SCOPE.iter().any(|(_, c)| c == id) {
                return Err(Error::Config(format!("unknown check `{id}`")));
            }
        }
    }
    let ctx = Ctx {
        preset,
        window,
        tol: config.tol,
        quad_n: config.quad_n.unwrap_or_else(|| default_quadrature_n(window)),
        seed: config.seed,
    };
    let mut entries = Vec::new();
    for (label, id) in IN_SCOPE {
        if config.only.as_ref().is_some_and(|o| !o.iter().any(|x| x == id)) {
            continue;
        }
        let entry = match run_check(&ctx, id) {
            Ok(Outcome::Report(r)) => SuiteEntry {
                label: label.to_string(),
                check: id.to_string(),
                status: if r.pass { Status::Pass } else { Status::Fail },
                report: Some(r),
                reason: None,
            },
            Ok(Outcome::Skipped(why)) => {
                SuiteEntry { label: label.to_string(), check: id.to_string(), status: Status::Skipped, report: None, reason: Some(why) }
            }
            Err(e) => SuiteEntry {
                label: label.to_string(),
                check: id.to_string(),
                status: Status::Error,
                report: None,
                reason: Some(e.to_string()),
            },
        };
        entries.push(entry);
    }
    let pass = entries.iter().all(|e| matches!(e.status, Status::Pass | Status::Skipped));
    Ok(SuiteReport { preset: spec, window, seed: config.seed, tol: config.tol, pass, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_overrides() {
        let c = SuiteConfig::from_json_str(r#"{"preset": "virasoro", "c": "1/2", "seed": 4}"#).unwrap();
        assert_eq!(c.preset, "virasoro");
        assert_eq!(c.window, "0:5");
        assert_eq!(c.seed, 4);
        assert_eq!(c.preset_spec().c.as_deref(), Some("1/2"));
        assert_eq!(SuiteConfig::from_json_str("{}").unwrap(), SuiteConfig::default());
        let err = SuiteConfig::from_json_str("{\"tol\": \"x\"}").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn merged_report_keeps_worst_error_and_first_failure() {
        let mut a = CheckReport::new("x");
        a.record(1e-12, || serde_json::json!("a"));
        let mut b = CheckReport::new("x");
        b.record(1e-3, || serde_json::json!("b"));
        b.fail(serde_json::json!("b failed"));
        let merged = merge_reports("x", vec![a.clone(), b]);
        assert!(!merged.pass);
        assert_eq!(merged.max_err, 1e-3);
        assert_eq!(merged.witness, serde_json::json!("b failed"));
        assert_eq!(merged.truncation["runs"], 2);
        let ok = merge_reports("x", vec![a]);
        assert!(ok.pass);
        assert_eq!(ok.witness, serde_json::json!("a"));
    }
}
