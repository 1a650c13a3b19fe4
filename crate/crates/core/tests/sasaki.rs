use hidsym::catalog::pseudo_sphere_fixture;
use hidsym::exprkit::{Expr, ParamEnv, Rational};
use hidsym::killing::{cky_residual, CheckOptions, ResidualReport};
use hidsym::manifold::{evaluate_tensor, exterior_derivative, sample_points, Chart, Manifold, TensorField};
use hidsym::sasaki::*;

fn opts() -> CheckOptions {
    CheckOptions {
        points: 8,
        seed: 11,
        tol: 1e-9,
    }
}

fn fixture() -> MixedThreeStructure {
    pseudo_sphere_fixture().unwrap().structure.unwrap()
}

fn part(r: &ResidualReport, name: &str) -> ResidualReport {
    subcheck(r, name).unwrap_or_else(|| panic!("missing sub-result {name}: {:?}", subcheck_names(r)))
}

fn num(v: f64) -> Expr {
    Expr::constant(Rational::from_float(v).unwrap())
}

/// The structure frozen at one point of the fixture, placed on flat space with
/// the constant metric of that point: algebraically identical, but flat.
fn flat_copy(s: &MixedThreeStructure, x: &[f64]) -> MixedThreeStructure {
    let g = s.manifold.metric_at(x).unwrap();
    let chart = Chart::new(&["u", "v", "w"], &[(-1.0, 1.0); 3]).unwrap();
    let metric = g.iter().map(|row| row.iter().map(|v| num(*v)).collect()).collect();
    let m = Manifold::new("flat-copy", chart, metric, ParamEnv::default(), vec![1, -1, -1]).unwrap();
    let at = |t: &TensorField| evaluate_tensor(t, &s.manifold, x).unwrap();
    let phi = [0, 1, 2].map(|a| {
        let v = at(&s.phi[a]);
        endomorphism((0..3).map(|i| (0..3).map(|j| num(v[i * 3 + j])).collect()).collect())
    });
    let xi = [0, 1, 2].map(|a| TensorField::vector(at(&s.xi[a]).into_iter().map(num).collect()));
    let eta = [0, 1, 2].map(|a| one_form(at(&s.eta[a]).into_iter().map(num).collect()));
    MixedThreeStructure::new(m, phi, xi, eta).unwrap()
}

fn ambient_j() -> [[[f64; 4]; 4]; 3] {
    let j1 = [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]];
    let j2 = [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, -1.0], [1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0]];
    let mut j3 = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            j3[i][k] = (0..4).map(|l| j2[i][l] * j1[l][k]).sum();
        }
    }
    [j1, j2, j3]
}

fn embedding(q: &[f64]) -> [f64; 4] {
    let (ch, sh) = (q[0].cosh(), q[0].sinh());
    [ch * q[1].cos(), ch * q[1].sin(), sh * q[2].cos(), sh * q[2].sin()]
}

#[test]
fn fixture_matches_the_embedding() {
    // ξ_α pushed forward into R^{2,2} equals J_α x
    let s = fixture();
    let h = 1e-6;
    for x in sample_points(s.manifold.chart(), 6, 3) {
        let p = embedding(&x);
        for (a, j) in ambient_j().iter().enumerate() {
            let xi = evaluate_tensor(&s.xi[a], &s.manifold, &x).unwrap();
            for k in 0..4 {
                let mut push = 0.0;
                for mu in 0..3 {
                    let (mut xp, mut xm) = (x.clone(), x.clone());
                    xp[mu] += h;
                    xm[mu] -= h;
                    push += xi[mu] * (embedding(&xp)[k] - embedding(&xm)[k]) / (2.0 * h);
                }
                let jx: f64 = (0..4).map(|l| j[k][l] * p[l]).sum();
                assert!((push - jx).abs() < 1e-7, "alpha {a} component {k}: {push} vs {jx}");
            }
        }
    }
}

#[test]
fn fixture_phi_is_nabla_xi_by_finite_differences() {
    let s = fixture();
    let m = &s.manifold;
    let h = 1e-5;
    let shift = |x: &[f64], i: usize, d: f64| {
        let mut y = x.to_vec();
        y[i] += d;
        y
    };
    for x in sample_points(m.chart(), 4, 5) {
        let g = m.metric_at(&x).unwrap();
        let dg: Vec<Vec<Vec<f64>>> = (0..3)
            .map(|l| {
                let (p, q) = (m.metric_at(&shift(&x, l, h)).unwrap(), m.metric_at(&shift(&x, l, -h)).unwrap());
                (0..3).map(|i| (0..3).map(|j| (p[i][j] - q[i][j]) / (2.0 * h)).collect()).collect()
            })
            .collect();
        let ginv: Vec<f64> = (0..3).map(|i| 1.0 / g[i][i]).collect();
        let gamma = |r: usize, mu: usize, nu: usize| 0.5 * ginv[r] * (dg[mu][r][nu] + dg[nu][r][mu] - dg[r][mu][nu]);
        for a in 0..3 {
            let xi = evaluate_tensor(&s.xi[a], m, &x).unwrap();
            let phi = evaluate_tensor(&s.phi[a], m, &x).unwrap();
            for nu in 0..3 {
                let (p, q) = (
                    evaluate_tensor(&s.xi[a], m, &shift(&x, nu, h)).unwrap(),
                    evaluate_tensor(&s.xi[a], m, &shift(&x, nu, -h)).unwrap(),
                );
                for mu in 0..3 {
                    let d = (p[mu] - q[mu]) / (2.0 * h) + (0..3).map(|l| gamma(mu, nu, l) * xi[l]).sum::<f64>();
                    assert!((d - phi[mu * 3 + nu]).abs() < 1e-6 * (1.0 + d.abs()), "alpha {a} [{mu},{nu}]");
                }
            }
        }
    }
}

#[test]
fn structure_identities_hold_on_fixture() {
    let r = structure_identity_suite(&fixture(), &opts()).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(part(&r, "eta_xi").max_residual < 1e-14);
    for name in ["phi_squared", "eta_xi_cross", "phi_xi", "eta_phi", "phi_phi", "compat_metric", "compat_eta"] {
        assert!(part(&r, name).pass, "{name}");
    }
}

#[test]
fn sign_flipped_phi2_breaks_cross_relations() {
    let r = structure_identity_suite(&fixture().with_phi_scaled(1, -1), &opts()).unwrap();
    assert!(!r.pass);
    assert!(!part(&r, "phi_phi").pass);
    assert!(part(&r, "phi_squared").pass);
}

#[test]
fn structure_rejects_wrong_dimension_and_signature() {
    let s = fixture();
    let chart = Chart::new(&["u", "v"], &[(-1.0, 1.0); 2]).unwrap();
    let flat2 = Manifold::new("f2", chart, vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), Expr::one()]], ParamEnv::default(), vec![1, 1]).unwrap();
    assert!(matches!(
        MixedThreeStructure::new(flat2, s.phi.clone(), s.xi.clone(), s.eta.clone()),
        Err(SasakiError::Dimension(2))
    ));
    let chart = Chart::new(&["u", "v", "w"], &[(-1.0, 1.0); 3]).unwrap();
    let id = |i: usize, j: usize| if i == j { Expr::one() } else { Expr::zero() };
    let eucl = Manifold::new("f3", chart, (0..3).map(|i| (0..3).map(|j| id(i, j)).collect()).collect(), ParamEnv::default(), vec![1, 1, 1]).unwrap();
    assert!(matches!(
        MixedThreeStructure::new(eucl, s.phi.clone(), s.xi.clone(), s.eta.clone()),
        Err(SasakiError::Signature { positive: 3, .. })
    ));
}

#[test]
fn lp_sasakian_equations_hold_and_sasakian_sign_conflicts() {
    let s = fixture();
    let r = sasakian_residuals(&s, &opts()).unwrap();
    for name in ["eq2", "eq3", "xi_case2", "xi_case3"] {
        assert!(part(&r, name).pass, "{name}");
    }
    // with φ_1 = ∇ξ_1 (cone convention) the α = 1 equation holds with the opposite sign
    let eq1 = part(&r, "eq1");
    assert!(!eq1.pass);
    assert!((eq1.max_relative_residual - 2.0).abs() < 1e-9);
    let flipped = s.with_phi_scaled(0, -1);
    assert!(part(&sasakian_residuals(&flipped, &opts()).unwrap(), "eq1").pass);
    // ...but then the cross relations of the mixed 3-structure fail
    let suite = structure_identity_suite(&flipped, &opts()).unwrap();
    assert!(!part(&suite, "phi_xi").pass && !part(&suite, "phi_phi").pass);
}

#[test]
fn constant_structure_on_flat_space_fails_sasakian_and_curvature_checks() {
    let s = fixture();
    let flat = flat_copy(&s, &[0.8, 1.0, 2.0]);
    assert!(structure_identity_suite(&flat, &opts()).unwrap().pass);
    let r = sasakian_residuals(&flat, &opts()).unwrap();
    assert!(!part(&r, "eq1").pass && !part(&r, "eq2").pass);
    assert!(!curvature_characterization(&flat, &opts()).unwrap().pass);
    let sec = sectional_curvature_check(&flat, &opts()).unwrap();
    assert!(!sec.pass);
    assert!(sec.extra["max_curvature"].as_f64().unwrap().abs() < 1e-12);
    assert!(!einstein_check(&flat, &opts()).unwrap().pass);
    assert!(matches!(phi_not_killing_witness(&flat, &opts()), Err(SasakiError::NoWitness(1))));
}

#[test]
fn killing_triple_on_fixture() {
    let s = fixture();
    let r = killing_triple_check(&s, &opts()).unwrap();
    for name in [
        "killing_xi1", "killing_xi2", "killing_xi3", "orthogonal", "causal", "bracket", "phi_from_xi2", "phi_from_xi3",
        "xi_geodesic",
    ] {
        assert!(part(&r, name).pass, "{name}");
    }
    // φ_1 = −ε_1 ∇ξ_1 is the opposite of the cone convention used by the fixture
    assert!((part(&r, "phi_from_xi1").max_relative_residual - 2.0).abs() < 1e-9);
    let scaled = killing_triple_check(&s.with_xi_scaled(0, 2), &opts()).unwrap();
    assert!(!part(&scaled, "causal").pass);
}

#[test]
fn curvature_characterization_and_sectional_curvature() {
    let s = fixture();
    let r = curvature_characterization(&s, &opts()).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(part(&r, "x_is_xi").pass);
    let k = sectional_curvature_check(&s, &opts()).unwrap();
    assert!(k.pass);
    assert!((k.extra["min_curvature"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((k.extra["max_curvature"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(k.extra["skipped_planes"].as_u64(), Some(0));
}

#[test]
fn einstein_constant_is_two_and_cone_is_ricci_flat() {
    let s = fixture();
    let r = einstein_check(&s, &opts()).unwrap();
    assert!(r.pass);
    assert_eq!(r.extra["lambda"].as_f64(), Some(2.0));
    assert!(!einstein_residual(&s.manifold, 1.0, &opts()).unwrap().pass);
    let cone = build_cone(&s).unwrap();
    assert!(einstein_residual(&cone.manifold, 0.0, &opts()).unwrap().pass);
}

#[test]
fn cone_shape() {
    let s = fixture();
    let c = build_cone(&s).unwrap();
    assert_eq!(c.manifold.dim(), 4);
    let pos = c.manifold.signature().iter().filter(|v| **v > 0).count();
    assert_eq!(pos, 2);
    c.manifold.validate(5, 1).unwrap();
    let x = [0.9, 1.3, 4.0];
    let base = s.manifold.metric_at(&x).unwrap();
    let cone = c.manifold.metric_at(&[0.9, 1.3, 4.0, 1.0]).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((base[i][j] - cone[i][j]).abs() < 1e-14);
        }
    }
    let e = evaluate_tensor(&c.euler, &c.manifold, &[0.9, 1.3, 4.0, 1.7]).unwrap();
    assert_eq!(e, vec![0.0, 0.0, 0.0, 1.7]);
}

#[test]
fn cone_is_para_hyperkahler() {
    let c = build_cone(&fixture()).unwrap();
    let r = para_hyperkahler_check(&c, &opts()).unwrap();
    assert!(r.pass, "{r:?}");
    for name in ["product", "hermitian1", "hermitian2", "hermitian3", "parallel1", "parallel2", "parallel3", "j_euler"] {
        assert!(part(&r, name).pass, "{name}");
    }
    let mut swapped = c.clone();
    swapped.j.swap(1, 2);
    assert!(!part(&para_hyperkahler_check(&swapped, &opts()).unwrap(), "product").pass);
}

#[test]
fn constant_split_quaternions_on_flat_r22() {
    let chart = Chart::new(&["x1", "x2", "x3", "x4"], &[(-1.0, 1.0); 4]).unwrap();
    let sig = [1i64, 1, -1, -1];
    let metric = (0..4).map(|i| (0..4).map(|j| if i == j { Expr::int(sig[i]) } else { Expr::zero() }).collect()).collect();
    let m = Manifold::new("r22", chart, metric, ParamEnv::default(), vec![1, 1, -1, -1]).unwrap();
    let j = ambient_j().map(|mat| endomorphism(mat.iter().map(|row| row.iter().map(|v| Expr::int(*v as i64)).collect()).collect()));
    let r = para_hyperkahler_residual(&m, &j, &opts()).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn reverse_cone_round_trip() {
    let s = fixture();
    let r = round_trip_check(&s, &opts()).unwrap();
    for name in ["xi1", "xi2", "xi3", "eta1", "eta2", "eta3", "phi2", "phi3", "cone_j2", "cone_j3"] {
        assert!(part(&r, name).pass, "{name}");
    }
    // φ_1 = −ε_1 ∇ξ_1 recovers −φ_1
    assert!((part(&r, "phi1").max_relative_residual - 2.0).abs() < 1e-9);
    assert!(!part(&r, "cone_j1").pass);
    let back = reverse_cone(&build_cone(&s).unwrap(), &opts()).unwrap();
    assert!(part(&killing_triple_check(&back, &opts()).unwrap(), "causal").pass);
    assert!(part(&sasakian_residuals(&back, &opts()).unwrap(), "eq1").pass);
}

#[test]
fn reverse_cone_requires_a_parallel_structure() {
    let mut c = build_cone(&fixture()).unwrap();
    c.j.swap(1, 2);
    assert!(matches!(reverse_cone(&c, &opts()), Err(SasakiError::ConeCheck(_))));
}

#[test]
fn phi_is_not_killing() {
    let w = phi_not_killing_witness(&fixture(), &opts()).unwrap();
    assert_eq!(w.witnesses.len(), 3);
    assert!(w.witnesses.iter().all(|x| x.magnitude > 1e-6));
    // LP-Sasakian prediction g(φX, φX) ξ matches; the α = 1 prediction has the opposite sign here
    assert!(w.witnesses[1].prediction_residual < 1e-9 && w.witnesses[2].prediction_residual < 1e-9);
    assert!((w.witnesses[0].prediction_residual - 2.0).abs() < 1e-9);
}

#[test]
fn conformal_killing_vectors_are_killing() {
    let entry = pseudo_sphere_fixture().unwrap();
    let s = entry.structure.clone().unwrap();
    for a in 0..3 {
        let r = conformal_to_killing_check(&s, &s.xi[a], &opts()).unwrap();
        assert_eq!(r.outcome, ConformalOutcome::Killing);
        assert!(r.max_abs_factor < 1e-9);
    }
    let sum = TensorField::vector(
        (0..3).map(|i| s.xi[0].get(&[i]).clone() + s.xi[1].get(&[i]).clone()).collect(),
    );
    assert_eq!(conformal_to_killing_check(&s, &sum, &opts()).unwrap().outcome, ConformalOutcome::Killing);
    let d = conformal_to_killing_check(&s, entry.vector("d_rho").unwrap(), &opts()).unwrap();
    assert_eq!(d.outcome, ConformalOutcome::NotConformal);
}

#[test]
fn eta_and_d_eta_are_conformal_killing_yano() {
    let s = fixture();
    for a in 0..3 {
        let eta = TensorField::form(3, 1, &(0..3).map(|i| (vec![i], s.eta[a].get(&[i]).clone())).collect::<Vec<_>>());
        assert!(cky_residual(&eta, &s.manifold, &opts()).unwrap().pass);
        let d = exterior_derivative(&eta, &s.manifold).unwrap();
        assert!(cky_residual(&d, &s.manifold, &opts()).unwrap().pass, "d eta{}", a + 1);
    }
}

#[test]
fn odd_rank_killing_yano_forms() {
    let s = fixture();
    for a in 0..3 {
        for k in 0..=1 {
            let r = ky_odd_rank_check(&s, a, k, &opts()).unwrap();
            assert!(r.pass, "alpha {a} k {k}: {r:?}");
        }
    }
    // η ∧ dη is a constant multiple of the volume form
    let f = ky_odd_rank_form(&s, 0, 1).unwrap();
    let vals: Vec<f64> = sample_points(s.manifold.chart(), 4, 2)
        .iter()
        .map(|x| {
            let g = s.manifold.metric_at(x).unwrap();
            let vol = (g[0][0] * g[1][1] * g[2][2]).abs().sqrt();
            evaluate_tensor(&f, &s.manifold, x).unwrap()[5] / vol
        })
        .collect();
    assert!(vals.iter().all(|v| (v - vals[0]).abs() < 1e-12 && v.abs() > 0.1), "{vals:?}");
    assert!(matches!(ky_odd_rank_form(&s, 0, 2), Err(SasakiError::Degenerate(_))));
    let mut zero = s.clone();
    zero.eta[0] = one_form(vec![Expr::zero(); 3]);
    assert!(matches!(ky_odd_rank_form(&zero, 0, 0), Err(SasakiError::Degenerate(_))));
}

#[test]
fn wedge_of_coordinate_forms() {
    let dx = |i: usize| TensorField::form(3, 1, &[(vec![i], Expr::one())]);
    let w = wedge(&wedge(&dx(0), &dx(1)), &dx(2));
    assert_eq!(w.get(&[0, 1, 2]), &Expr::one());
    assert_eq!(w.get(&[1, 0, 2]), &-Expr::one());
    assert!(wedge(&dx(1), &dx(1)).is_zero());
}
