use hidsym::algebra::{bracket, AlgebraElement, Coeff, Generator, JkqTable, KacMoodyTable};
use hidsym::catalog::{sphere2, taub_nut};
use hidsym::exprkit::{differentiate, evaluate, parse, simplify, Expr, ParamEnv, Point};
use hidsym::geodesic::{integrate, monitor_invariant, GeodesicState, IntegratorConfig, Invariant};
use hidsym::killing::{killing_vector_residual, CheckOptions};
use hidsym::manifold::TensorField;
use proptest::prelude::*;

/// Polynomial-trigonometric expressions in `x` and `y` with bounded depth.
fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::coord("x")),
        Just(Expr::coord("y")),
        (-4i64..=4).prop_map(Expr::int),
        (1i64..=5, 2i64..=4).prop_map(|(n, d)| Expr::frac(n, d)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            (inner.clone(), 2i64..=3).prop_map(|(a, n)| Expr::powi(a, n)),
            // denominators bounded away from zero
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (Expr::int(2) + Expr::cos(b))),
            inner.prop_map(|a| Expr::exp(Expr::sin(a))),
        ]
    })
}

fn at(e: &Expr, x: f64, y: f64) -> f64 {
    evaluate(e, &Point::from_pairs(&[("x", x), ("y", y)]), &ParamEnv::default()).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn derivative_matches_central_differences(e in expr(), x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let h = 1e-5;
        let d = differentiate(&e, "x");
        let fd = (at(&e, x + h, y) - at(&e, x - h, y)) / (2.0 * h);
        let exact = at(&d, x, y);
        // FD error scales with the third derivative; compare against the size of the values involved
        let scale = at(&e, x + h, y).abs().max(at(&e, x - h, y).abs()).max(1.0);
        prop_assert!((exact - fd).abs() <= 1e-6 * scale.max(exact.abs()), "{e}: {exact} vs {fd}");
    }

    #[test]
    fn simplify_preserves_values(e in expr(), seed in 0u64..1000) {
        let s = simplify(&e);
        let mut state = seed;
        for _ in 0..100 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = ((state >> 11) as f64 / (1u64 << 53) as f64) * 3.0 - 1.5;
            let y = ((state >> 20) as f64 / (1u64 << 44) as f64) * 3.0 - 1.5;
            let (a, b) = (at(&e, x, y), at(&s, x, y));
            prop_assert!(close(a, b, 1e-12), "{e} -> {s}: {a} vs {b}");
        }
    }

    #[test]
    fn printed_form_reparses_to_canonical_form(e in expr()) {
        let canonical = simplify(&e);
        let back = parse(&canonical.to_string()).unwrap();
        prop_assert_eq!(simplify(&back), canonical.clone());
        prop_assert_eq!(back, canonical);
    }
}

fn generator() -> impl Strategy<Value = Generator> {
    prop_oneof![
        (1u8..=3).prop_map(Generator::J),
        (1u8..=3).prop_map(Generator::K),
        (1u8..=3).prop_map(Generator::Q),
    ]
}

fn graded_generator() -> impl Strategy<Value = Generator> {
    prop_oneof![
        (1u8..=3, 0u32..=6).prop_map(|(i, n)| Generator::A(i, n)),
        (1u8..=3, 0u32..=6).prop_map(|(i, n)| Generator::Bg(i, n)),
    ]
}

fn b_power(k: u32) -> Coeff {
    Coeff::monomial(num_complex::Complex::new(hidsym::exprkit::rat(1), hidsym::exprkit::rat(0)), k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn brackets_are_antisymmetric(a in generator(), b in generator(), c in graded_generator(), d in graded_generator()) {
        let g = AlgebraElement::gen;
        let ab = bracket(&g(a), &g(b), &JkqTable).unwrap();
        prop_assert_eq!(ab.neg(), bracket(&g(b), &g(a), &JkqTable).unwrap());
        let cd = bracket(&g(c), &g(d), &KacMoodyTable).unwrap();
        prop_assert_eq!(cd.neg(), bracket(&g(d), &g(c), &KacMoodyTable).unwrap());
    }

    #[test]
    fn central_element_factors_out(a in generator(), b in generator(), k in 0u32..6) {
        let g = AlgebraElement::gen;
        let bk = b_power(k);
        let lhs = bracket(&g(a), &g(b).scale(&bk), &JkqTable).unwrap();
        let rhs = bracket(&g(a), &g(b), &JkqTable).unwrap().scale(&bk);
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn combinations_of_killing_vectors_are_killing(c in proptest::collection::vec(-3i64..=3, 4)) {
        let tn = taub_nut(1.0).unwrap();
        let names = ["R1", "R2", "R3", "K4"];
        let comps = (0..4)
            .map(|i| {
                simplify(&names.iter().zip(&c).fold(Expr::zero(), |acc, (n, k)| {
                    acc + Expr::int(*k) * tn.vector(n).unwrap().get(&[i]).clone()
                }))
            })
            .collect();
        let opts = CheckOptions { points: 5, seed: 1, tol: 1e-9 };
        let r = killing_vector_residual(&TensorField::vector(comps), &tn.manifold, &opts).unwrap();
        prop_assert!(r.pass, "{c:?}: {}", r.max_relative_residual);
    }

    #[test]
    fn energy_is_conserved_on_the_sphere(u in (0.3f64..0.7, 0.3f64..0.7), v in (-0.3f64..0.3, -0.3f64..0.3)) {
        let s = sphere2().unwrap();
        let dom = s.manifold.chart().domain();
        let x = vec![dom[0].0 + u.0 * (dom[0].1 - dom[0].0), dom[1].0 + u.1 * (dom[1].1 - dom[1].0)];
        let traj = integrate(&s.manifold, &GeodesicState::new(x, vec![v.0, v.1]), &IntegratorConfig::rk4(1e-3, 3.0)).unwrap();
        prop_assume!(!traj.exited);
        let r = monitor_invariant(&traj, &Invariant::energy(&s.manifold).unwrap(), 1e-8).unwrap();
        prop_assert!(r.pass, "{r:?}");
        let lz = Invariant::new("Lz", s.vector("Lz").unwrap(), &s.manifold).unwrap();
        prop_assert!(monitor_invariant(&traj, &lz, 1e-8).unwrap().pass);
    }
}
