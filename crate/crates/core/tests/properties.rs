use proptest::prelude::*;
use voxfact::residue::FactorSum;
use voxfact::{DegreeWindow, EvalOptions, Expression, Factor, Functional, GradedVector, OpenSet, Preset, Scalar};

fn presets() -> Vec<Preset> {
    vec![
        Preset::heisenberg(),
        Preset::virasoro(Scalar::from_ratio(1, 2)).unwrap(),
        Preset::affine_sl2(Scalar::one()).unwrap(),
    ]
}

fn gauss(re: (i64, i64), im: (i64, i64)) -> Scalar {
    &Scalar::from_ratio(re.0, re.1) + &(&Scalar::from_ratio(im.0, im.1) * &Scalar::i())
}

fn arb_scalar() -> impl Strategy<Value = Scalar> {
    ((-6i64..=6, 1i64..=4), (-6i64..=6, 1i64..=4)).prop_map(|(re, im)| gauss(re, im))
}

fn arb_nonzero() -> impl Strategy<Value = Scalar> {
    arb_scalar().prop_filter("nonzero", |s| !s.is_zero())
}

fn arb_factor() -> impl Strategy<Value = Factor> {
    prop_oneof![
        (arb_scalar(), 0u32..3).prop_map(|(p, d)| Factor::jet(p, d)),
        (arb_scalar(), 1i64..4, -3i64..=3).prop_map(|(c, r, n)| Factor::moment(c, &Scalar::from_int(r), n).unwrap()),
    ]
}

fn win(lo: i64, hi: i64) -> DegreeWindow {
    DegreeWindow::new(lo, hi).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mode_products_have_the_expected_degree(which in 0usize..3, i in 0usize..40, j in 0usize..40, n in -3i64..4) {
        let p = &presets()[which];
        let basis = p.basis_up_to(0, 3);
        let (a, b) = (&basis[i % basis.len()], &basis[j % basis.len()]);
        let r = p.state_mode(&GradedVector::basis(a.clone()), n, &GradedVector::basis(b.clone())).unwrap();
        if !r.is_zero() {
            prop_assert_eq!(r.degree(), Some(a.degree() + b.degree() - n - 1));
        }
    }

    #[test]
    fn translation_is_a_derivation(which in 0usize..3, i in 0usize..40, j in 0usize..40, n in -3i64..4) {
        let p = &presets()[which];
        let basis = p.basis_up_to(0, 3);
        let a = GradedVector::basis(basis[i % basis.len()].clone());
        let b = GradedVector::basis(basis[j % basis.len()].clone());
        let ta = p.translate(&a).unwrap();
        let lhs = p.translate(&p.state_mode(&a, n, &b).unwrap()).unwrap();
        let rhs = p.state_mode(&ta, n, &b).unwrap().add(&p.state_mode(&a, n, &p.translate(&b).unwrap()).unwrap());
        prop_assert_eq!(lhs, rhs);
        let shifted = p.state_mode(&a, n - 1, &b).unwrap().scale(&Scalar::from_int(-n));
        prop_assert_eq!(p.state_mode(&ta, n, &b).unwrap(), shifted);
    }

    #[test]
    fn pushforward_is_functorial(
        f in arb_factor(),
        lg in arb_nonzero(), wg in arb_scalar(),
        lh in arb_nonzero(), wh in arb_scalar(),
        e in -4i64..=4,
    ) {
        let a = Functional::atom(Scalar::one(), vec![f]);
        let composed = a.pushforward_affine(&(&lg * &lh), &(&(&lg * &wh) + &wg)).unwrap();
        let stepwise = a.pushforward_affine(&lh, &wh).unwrap().pushforward_affine(&lg, &wg).unwrap();
        let test = FactorSum::shift_power(0, Scalar::zero(), e);
        prop_assert_eq!(composed.apply_exact(&test).unwrap(), stepwise.apply_exact(&test).unwrap());
        prop_assert_eq!(a.pushforward_affine(&Scalar::one(), &Scalar::zero()).unwrap(), a);
    }

    #[test]
    fn multiplication_of_expressions_is_associative(xs in proptest::collection::vec(-4i64..=4, 3)) {
        let p = Preset::heisenberg();
        let alpha = p.generator_state(p.generators()[0]);
        let centers = [-10i64, 0, 10];
        let exprs: Vec<Expression> = centers
            .iter()
            .zip(&xs)
            .map(|(&c, &x)| {
                let carrier = OpenSet::disc(Scalar::from_int(c), &Scalar::from_int(5)).unwrap();
                let pt = &Scalar::from_int(c) + &Scalar::from_ratio(x, 2);
                Expression::deltas(carrier, &[pt], &[alpha.clone()]).unwrap()
            })
            .collect();
        let w = OpenSet::disc(Scalar::zero(), &Scalar::from_int(40)).unwrap();
        let pair = |i: usize, j: usize| {
            let u = OpenSet::union(vec![exprs[i].carrier().clone(), exprs[j].carrier().clone()]).unwrap();
            exprs[i].multiply(&exprs[j], &u).unwrap()
        };
        let left = pair(0, 1).multiply(&exprs[2], &w).unwrap();
        let right = exprs[0].multiply(&pair(1, 2), &w).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn evaluation_is_dilation_equivariant(
        x in (-4i64..=4, -4i64..=4), y in (-4i64..=4, -4i64..=4), lam in arb_nonzero(),
    ) {
        let (z1, z2) = (gauss((x.0, 4), (x.1, 4)), gauss((y.0, 4), (y.1, 4)));
        prop_assume!(z1 != z2);
        let p = Preset::heisenberg();
        let alpha = p.generator_state(p.generators()[0]);
        let e = Expression::deltas(OpenSet::disc(Scalar::zero(), &Scalar::from_int(2)).unwrap(), &[z1, z2], &[alpha.clone(), alpha]).unwrap();
        let window = win(0, 3);
        let ev = e.evaluate(&p, window, EvalOptions::default()).unwrap();
        let ev_g = e.affine_act(&lam, &Scalar::zero()).unwrap().evaluate(&p, window, EvalOptions::default()).unwrap();
        prop_assert_eq!(ev_g, ev.grading_act(&lam).unwrap());
    }
}
