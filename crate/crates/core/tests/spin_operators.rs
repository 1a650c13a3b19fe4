use hidsym::catalog::{flat, pseudo_sphere_fixture, sphere2, taub_nut, CatalogEntry};
use hidsym::exprkit::{evaluate, parse, simplify, Expr};
use hidsym::killing::CheckOptions;
use hidsym::manifold::{christoffel, sample_points, Manifold, TensorField};
use hidsym::spin::*;
use num_complex::Complex64;

fn opts(points: usize) -> CheckOptions {
    CheckOptions { points, seed: 0, tol: 1e-8 }
}

fn context(e: &CatalogEntry) -> SpinContext<'_> {
    let frame = orthonormal_frame(&e.manifold, e.frame.as_deref()).unwrap();
    SpinContext::new(&e.manifold, frame)
}

fn bank(ctx: &SpinContext) -> Vec<SpinorField> {
    spinor_bank(ctx.manifold.chart(), ctx.spinor_size(), 5, 7)
}

fn eval_at(e: &Expr, m: &Manifold, x: &[f64]) -> f64 {
    evaluate(e, &m.chart().point(x), m.params()).unwrap()
}

#[test]
fn frames_are_orthonormal() {
    let tn = taub_nut(1.0).unwrap();
    let f = orthonormal_frame(&tn.manifold, tn.frame.as_deref()).unwrap();
    assert_eq!(f.eta, vec![1, 1, 1, 1]);
    assert!(frame_residual(&f, &tn.manifold, 20, 0).unwrap() < 1e-10);

    let s = sphere2().unwrap();
    let f = orthonormal_frame(&s.manifold, None).unwrap();
    assert_eq!(f.coframe[0][0], Expr::one());
    assert_eq!(f.coframe[1][1], simplify(&parse("sqrt(sin(theta)^2)").unwrap()));

    let mink = flat(4, &[-1, 1, 1, 1]).unwrap();
    let f = orthonormal_frame(&mink.manifold, None).unwrap();
    assert_eq!(f.eta, vec![-1, 1, 1, 1]);
    for a in 0..4 {
        for mu in 0..4 {
            assert_eq!(f.coframe[a][mu], if a == mu { Expr::one() } else { Expr::zero() });
        }
    }

    let ps = pseudo_sphere_fixture().unwrap();
    let f = orthonormal_frame(&ps.manifold, None).unwrap();
    assert_eq!(f.eta, vec![-1, 1, -1]);
    assert!(frame_residual(&f, &ps.manifold, 10, 0).unwrap() < 1e-10);
}

// upper Cholesky factor: g = Uᵀ U
fn cholesky_upper(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut u = vec![vec![0.0; n]; n];
    for i in 0..n {
        let d = g[i][i] - (0..i).map(|k| u[k][i] * u[k][i]).sum::<f64>();
        u[i][i] = d.sqrt();
        for j in i + 1..n {
            u[i][j] = (g[i][j] - (0..i).map(|k| u[k][i] * u[k][j]).sum::<f64>()) / u[i][i];
        }
    }
    u
}

#[test]
fn gram_schmidt_fallback_matches_numeric_cholesky() {
    let tn = taub_nut(1.0).unwrap();
    let m = &tn.manifold;
    let f = orthonormal_frame(m, None).unwrap();
    assert_eq!(f.eta, vec![1, 1, 1, 1]);
    assert!(frame_residual(&f, m, 20, 0).unwrap() < 1e-10);
    for x in sample_points(m.chart(), 5, 3) {
        let u = cholesky_upper(&m.metric_at(&x).unwrap());
        for a in 0..4 {
            for mu in 0..4 {
                assert!((eval_at(&f.coframe[a][mu], m, &x) - u[a][mu]).abs() < 1e-10);
            }
        }
    }
    let bad = vec![vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::zero()]; 4];
    assert!(matches!(Frame::from_coframe(m, bad), Err(SpinError::Frame(_))));
}

#[test]
fn spin_connection_examples() {
    let e = flat(3, &[1, 1, 1]).unwrap();
    let f = orthonormal_frame(&e.manifold, None).unwrap();
    let w = spin_connection(&f, &e.manifold).unwrap();
    for mu in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                assert!(w.get(mu, a, b).is_zero());
            }
        }
    }
    // unit sphere, frame (dθ, sin θ dφ): ω_φ^{12} = −cos θ
    let s = sphere2().unwrap();
    let f = Frame::from_coframe(&s.manifold, s.frame.clone().unwrap()).unwrap();
    let w = spin_connection(&f, &s.manifold).unwrap();
    for x in sample_points(s.manifold.chart(), 10, 0) {
        assert!((eval_at(w.get(1, 0, 1), &s.manifold, &x) + x[0].cos()).abs() < 1e-12);
        assert!(eval_at(w.get(0, 0, 1), &s.manifold, &x).abs() < 1e-12);
    }
}

#[test]
fn spin_connection_satisfies_tetrad_postulate() {
    for e in [taub_nut(1.0).unwrap(), pseudo_sphere_fixture().unwrap()] {
        let m = &e.manifold;
        let n = m.dim();
        let f = orthonormal_frame(m, e.frame.as_deref()).unwrap();
        let w = spin_connection(&f, m).unwrap();
        let gam = christoffel(m).unwrap();
        let coords = m.chart().coords();
        for x in sample_points(m.chart(), 20, 0) {
            let ev = |ex: &Expr| eval_at(ex, m, &x);
            let mut scale = 0.0f64;
            let mut worst = 0.0f64;
            for mu in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let (p, q) = (ev(w.get(mu, a, b)), ev(w.get(mu, b, a)));
                        assert!((p + q).abs() <= 1e-10 * (1.0 + p.abs()), "{} antisymmetry", m.name());
                    }
                    for nu in 0..n {
                        let d = ev(&hidsym::exprkit::differentiate(&f.coframe[a][nu], &coords[mu]));
                        let g: f64 = (0..n).map(|l| ev(gam.get(&[l, mu, nu])) * ev(&f.coframe[a][l])).sum();
                        // ω_μ^a_b = ω_μ^{ab} η_bb
                        let o: f64 = (0..n)
                            .map(|b| ev(w.get(mu, a, b)) * f.eta[b] as f64 * ev(&f.coframe[b][nu]))
                            .sum();
                        scale = scale.max(d.abs()).max(g.abs()).max(o.abs());
                        worst = worst.max((d - g + o).abs());
                    }
                }
            }
            assert!(worst <= 1e-10 * scale.max(1.0), "{} tetrad postulate {worst:e}", m.name());
        }
    }
}

#[test]
fn dirac_annihilates_constant_spinors_in_flat_space() {
    let e = flat(4, &[1, 1, 1, 1]).unwrap();
    let ctx = context(&e);
    let psi = SpinorField::constant(&[
        Complex64::new(1.0, 0.5),
        Complex64::new(-2.0, 0.0),
        Complex64::new(0.0, 3.0),
        Complex64::new(0.25, -1.0),
    ]);
    for x in sample_points(e.manifold.chart(), 5, 0) {
        let v = apply_operator(&ctx, &OperatorSpec::StandardDirac, &psi, &x).unwrap();
        assert!(v.iter().all(|z| z.norm() == 0.0));
    }
    let short = SpinorField::constant(&[Complex64::new(1.0, 0.0)]);
    assert!(matches!(
        apply_operator(&ctx, &OperatorSpec::StandardDirac, &short, &[0.0; 4]),
        Err(SpinError::SpinorSize { expected: 4, found: 1 })
    ));
}

#[test]
fn killing_operators_match_lie_derivative_oracle() {
    // the Taub-NUT frame does not depend on φ or χ, so X ψ = −i ∂ψ along those directions
    let tn = taub_nut(1.0).unwrap();
    let m = &tn.manifold;
    let ctx = context(&tn);
    let psi = &bank(&ctx)[0];
    for (name, axis) in [("R3", 2), ("K4", 3)] {
        let spec = OperatorSpec::KillingOp(tn.vector(name).unwrap().clone());
        for x in sample_points(m.chart(), 5, 1) {
            let got = apply_operator(&ctx, &spec, psi, &x).unwrap();
            let h = 1e-5;
            let at = |dx: f64| {
                let mut y = x.clone();
                y[axis] += dx;
                psi.components
                    .iter()
                    .map(|(re, im)| Complex64::new(eval_at(re, m, &y), eval_at(im, m, &y)))
                    .collect::<Vec<_>>()
            };
            let (p, q) = (at(h), at(-h));
            for k in 0..4 {
                let fd = -Complex64::i() * (p[k] - q[k]) / (2.0 * h);
                assert!((got[k] - fd).norm() <= 1e-6 * (1.0 + fd.norm()), "{name} {k}");
            }
        }
    }
}

#[test]
fn taub_nut_operator_identities() {
    let tn = taub_nut(1.0).unwrap();
    let ctx = context(&tn);
    let b = bank(&ctx);
    let ds = OperatorSpec::StandardDirac;
    for f in ["f1", "f2", "f3", "fY"] {
        let d = OperatorSpec::DiracType(tn.form(f).unwrap().clone());
        d.validate(&tn.manifold, &CheckOptions::default()).unwrap();
        assert!(anticommutator_residual(&ctx, &ds, &d, &b, &opts(4)).unwrap().pass, "{f}");
        let sq = square_compare(&ctx, &d, &b, &opts(4)).unwrap();
        if f == "fY" {
            assert!(sq.max_relative_residual > 1e-3, "{sq:?}");
        } else {
            assert!(sq.pass, "{f} {sq:?}");
        }
    }
    for k in ["R1", "R2", "R3", "K4"] {
        let x = OperatorSpec::KillingOp(tn.vector(k).unwrap().clone());
        x.validate(&tn.manifold, &CheckOptions::default()).unwrap();
        assert!(commutator_residual(&ctx, &ds, &x, &b, &opts(4)).unwrap().pass, "{k}");
        let same = commutator_residual(&ctx, &x, &x, &b, &opts(2)).unwrap();
        assert_eq!(same.max_residual, 0.0);
    }
    let self_comm = commutator_residual(&ctx, &ds, &ds, &b, &opts(2)).unwrap();
    assert_eq!(self_comm.max_residual, 0.0);
}

#[test]
fn perturbed_payloads_fail() {
    let tn = taub_nut(1.0).unwrap();
    let m = &tn.manifold;
    let ctx = context(&tn);
    let b = bank(&ctx);
    let ds = OperatorSpec::StandardDirac;
    let bumped = tn.form("f1").unwrap().map(|c| simplify(&(c.clone() * parse("1 + r/10").unwrap())));
    let d = OperatorSpec::DiracType(bumped);
    assert!(matches!(d.validate(m, &CheckOptions::default()), Err(SpinError::Payload(_))));
    assert!(!anticommutator_residual(&ctx, &ds, &d, &b, &opts(4)).unwrap().pass);
    let radial = OperatorSpec::KillingOp(TensorField::vector(vec![
        parse("r").unwrap(),
        Expr::zero(),
        Expr::zero(),
        Expr::zero(),
    ]));
    assert!(matches!(radial.validate(m, &CheckOptions::default()), Err(SpinError::Payload(_))));
    assert!(!commutator_residual(&ctx, &ds, &radial, &b, &opts(4)).unwrap().pass);
}

#[test]
fn flat_complex_structure_squares_to_dirac_squared() {
    let e = flat(4, &[1, 1, 1, 1]).unwrap();
    let ctx = context(&e);
    let b = bank(&ctx);
    for j in ["J1", "J2", "J3"] {
        let d = OperatorSpec::DiracType(e.form(j).unwrap().clone());
        assert!(square_compare(&ctx, &d, &b, &opts(4)).unwrap().pass, "{j}");
        assert!(anticommutator_residual(&ctx, &OperatorSpec::StandardDirac, &d, &b, &opts(4)).unwrap().pass);
    }
    let vol = OperatorSpec::DiracType(e.form("volume12").unwrap().clone());
    assert!(!square_compare(&ctx, &vol, &b, &opts(4)).unwrap().pass);
}

#[test]
fn reports_do_not_depend_on_the_gamma_representation() {
    let tn = taub_nut(1.0).unwrap();
    let ctx = context(&tn);
    let conj = context(&tn).with_gammas(ctx.gammas.conjugated());
    assert_ne!(conj.gammas, ctx.gammas);
    let b = bank(&ctx);
    let u = ctx.gammas.conjugator();
    let bc: Vec<SpinorField> = b.iter().map(|p| p.transformed(&u)).collect();
    let ds = OperatorSpec::StandardDirac;
    let fy = OperatorSpec::DiracType(tn.form("fY").unwrap().clone());
    let f1 = OperatorSpec::DiracType(tn.form("f1").unwrap().clone());
    let r1 = OperatorSpec::KillingOp(tn.vector("R1").unwrap().clone());
    let pairs = [
        (square_compare(&ctx, &fy, &b, &opts(3)).unwrap(), square_compare(&conj, &fy, &bc, &opts(3)).unwrap()),
        (
            anticommutator_residual(&ctx, &ds, &f1, &b, &opts(3)).unwrap(),
            anticommutator_residual(&conj, &ds, &f1, &bc, &opts(3)).unwrap(),
        ),
        (
            commutator_residual(&ctx, &ds, &r1, &b, &opts(3)).unwrap(),
            commutator_residual(&conj, &ds, &r1, &bc, &opts(3)).unwrap(),
        ),
    ];
    for (p, q) in pairs {
        assert_eq!(p.pass, q.pass);
        assert!((p.max_relative_residual - q.max_relative_residual).abs() < 1e-10, "{p:?} {q:?}");
    }
}

#[test]
fn operators_are_linear() {
    let tn = taub_nut(1.0).unwrap();
    let ctx = context(&tn);
    let b = bank(&ctx);
    let sum = b[0].add(&b[1]);
    let specs = [
        OperatorSpec::StandardDirac,
        OperatorSpec::KillingOp(tn.vector("R2").unwrap().clone()),
        OperatorSpec::DiracType(tn.form("fY").unwrap().clone()),
    ];
    for x in sample_points(tn.manifold.chart(), 3, 0) {
        for s in &specs {
            let whole = apply_operator(&ctx, s, &sum, &x).unwrap();
            let p = apply_operator(&ctx, s, &b[0], &x).unwrap();
            let q = apply_operator(&ctx, s, &b[1], &x).unwrap();
            for k in 0..4 {
                let scale = 1.0 + p[k].norm() + q[k].norm();
                assert!((whole[k] - p[k] - q[k]).norm() <= 1e-13 * scale, "{}", s.kind());
            }
        }
    }
}
