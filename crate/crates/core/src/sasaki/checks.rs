use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sample::{basis, compare, exact, local_all, max_norm, samples, values, Acc, Parts, Sample};
use super::{MixedThreeStructure, SasakiError, EPSILON, EVEN};
use crate::exprkit::{ratio, simplify, Expr};
use crate::killing::{conformal_killing_factor, ky_residual, permutations, CheckOptions, ResidualReport};
use crate::manifold::{exterior_derivative, permutation_sign, Manifold, TensorField};

fn contract(w: &[f64], v: &[f64]) -> Acc {
    let mut acc = Acc::default();
    for (a, b) in w.iter().zip(v) {
        acc.push(a * b);
    }
    acc
}

fn zeros(k: usize) -> Vec<Acc> {
    vec![Acc::default(); k]
}

/// `G_{μν} = g(φ∂_μ, φ∂_ν)` with term magnitudes.
fn phi_gram(sm: &Sample, phi: &[f64]) -> Vec<Acc> {
    let n = sm.n;
    (0..n * n)
        .map(|k| {
            let (mu, nu) = (k / n, k % n);
            let mut acc = Acc::default();
            for l in 0..n {
                for c in 0..n {
                    acc.push(phi[l * n + mu] * sm.g[l * n + c] * phi[c * n + nu]);
                }
            }
            acc
        })
        .collect()
}

/// `ξ ⊗ η` as an endomorphism: `X ↦ η(X) ξ`.
fn xi_eta(sm: &Sample, xi: &[f64], eta: &[f64]) -> Vec<Acc> {
    let n = sm.n;
    (0..n * n).map(|k| Acc::of(xi[k / n] * eta[k % n])).collect()
}

fn lowered(sm: &Sample, v: &[f64]) -> Vec<Acc> {
    let n = sm.n;
    (0..n)
        .map(|mu| {
            let mut acc = Acc::default();
            for nu in 0..n {
                acc.push(sm.g[mu * n + nu] * v[nu]);
            }
            acc
        })
        .collect()
}

/// Every algebraic identity of a metric mixed 3-structure at sample points:
/// `φ² = −ε Id + η⊗ξ`, `η(ξ) = ε`, the cross relations for even permutations
/// and metric compatibility.
pub fn structure_identity_suite(s: &MixedThreeStructure, opts: &CheckOptions) -> Result<ResidualReport, SasakiError> {
    let samples = samples(s, opts)?;
    let mut parts = Parts::new(opts);
    for sm in &samples {
        let (n, x) = (sm.n, sm.x.as_slice());
        for a in 0..3 {
            let e = EPSILON[a];
            let lhs = sm.compose(&sm.phi[a], &sm.phi[a]);
            let rhs: Vec<Acc> = xi_eta(sm, &sm.xi[a], &sm.eta[a])
                .into_iter()
                .enumerate()
                .map(|(k, t)| t.plus(Acc::of(if k / n == k % n { -e } else { 0.0 })))
                .collect();
            parts.record("phi_squared", x, compare(&lhs, &rhs));
            parts.record("eta_xi", x, compare(&[contract(&sm.eta[a], &sm.xi[a])], &[Acc::of(e)]));
            let g: Vec<Acc> = (0..n * n)
                .map(|k| Acc::of(e * sm.g[k]).plus(Acc::of(-sm.eta[a][k / n] * sm.eta[a][k % n])))
                .collect();
            parts.record("compat_metric", x, compare(&phi_gram(sm, &sm.phi[a]), &g));
            parts.record("compat_eta", x, compare(&lowered(sm, &sm.xi[a]), &exact(&sm.eta[a])));
            for b in (0..3).filter(|b| *b != a) {
                parts.record("eta_xi_cross", x, compare(&[contract(&sm.eta[a], &sm.xi[b])], &[Acc::default()]));
            }
        }
        for (a, b, c) in EVEN {
            let ec = EPSILON[c];
            let target: Vec<Acc> = sm.xi[c].iter().map(|v| Acc::of(ec * v)).collect();
            let neg: Vec<Acc> = target.iter().map(|t| t.times(-1.0)).collect();
            parts.record("phi_xi", x, compare(&sm.apply(&sm.phi[a], &sm.xi[b]), &target));
            parts.record("phi_xi", x, compare(&sm.apply(&sm.phi[b], &sm.xi[a]), &neg));
            let target: Vec<Acc> = sm.eta[c].iter().map(|v| Acc::of(ec * v)).collect();
            let neg: Vec<Acc> = target.iter().map(|t| t.times(-1.0)).collect();
            parts.record("eta_phi", x, compare(&sm.pull(&sm.eta[a], &sm.phi[b]), &target));
            parts.record("eta_phi", x, compare(&sm.pull(&sm.eta[b], &sm.phi[a]), &neg));
            let target: Vec<Acc> = sm.phi[c].iter().map(|v| Acc::of(ec * v)).collect();
            let first: Vec<Acc> = sm
                .compose(&sm.phi[a], &sm.phi[b])
                .into_iter()
                .zip(xi_eta(sm, &sm.xi[a], &sm.eta[b]))
                .map(|(p, t)| p.plus(t.times(-1.0)))
                .collect();
            let second: Vec<Acc> = sm
                .compose(&sm.phi[b], &sm.phi[a])
                .into_iter()
                .zip(xi_eta(sm, &sm.xi[b], &sm.eta[a]))
                .map(|(p, t)| p.times(-1.0).plus(t))
                .collect();
            parts.record("phi_phi", x, compare(&first, &target));
            parts.record("phi_phi", x, compare(&second, &target));
        }
    }
    Ok(parts.finish("structure-identity", s.manifold.name(), samples.len()))
}

/// The Sasakian condition for α = 1 and the LP-Sasakian conditions for α = 2, 3,
/// with `X, Y` over the coordinate basis. The sub-results `xi_case2`/`xi_case3`
/// check the substitution `Y = ξ_α`, where the right side reduces to `ε_α φ_α² X`.
pub fn sasakian_residuals(s: &MixedThreeStructure, opts: &CheckOptions) -> Result<ResidualReport, SasakiError> {
    let samples = samples(s, opts)?;
    let mut parts = Parts::new(opts);
    for sm in &samples {
        let (n, x) = (sm.n, sm.x.as_slice());
        for a in 0..3 {
            let nphi = &sm.nphi[a];
            let lhs: Vec<Acc> = (0..n * n * n).map(|k| Acc::of(nphi[k])).collect();
            let (sq, gram) = (sm.compose(&sm.phi[a], &sm.phi[a]), phi_gram(sm, &sm.phi[a]));
            // lhs index (μ, ρ, ν) = (∇_{∂μ} φ) ∂ν, component ρ
            let rhs: Vec<Acc> = (0..n * n * n)
                .map(|k| {
                    let (mu, rho, nu) = (k / (n * n), (k / n) % n, k % n);
                    if a == 0 {
                        let delta = if rho == mu { 1.0 } else { 0.0 };
                        Acc::of(sm.g[mu * n + nu] * sm.xi[a][rho]).plus(Acc::of(-sm.eta[a][nu] * delta))
                    } else {
                        gram[mu * n + nu].times(sm.xi[a][rho]).plus(sq[rho * n + mu].times(sm.eta[a][nu]))
                    }
                })
                .collect();
            parts.record(&format!("eq{}", a + 1), x, compare(&lhs, &rhs));
            if a > 0 {
                let l: Vec<Acc> = (0..n * n)
                    .map(|k| {
                        let (mu, rho) = (k / n, k % n);
                        let mut acc = Acc::default();
                        for nu in 0..n {
                            acc.push(nphi[(mu * n + rho) * n + nu] * sm.xi[a][nu]);
                        }
                        acc
                    })
                    .collect();
                let r: Vec<Acc> = (0..n * n).map(|k| sq[(k % n) * n + k / n].times(EPSILON[a])).collect();
                parts.record(&format!("xi_case{}", a + 1), x, compare(&l, &r));
            }
        }
    }
    Ok(parts.finish("sasakian", s.manifold.name(), samples.len()))
}

/// ξ_α Killing, mutually orthogonal, `g(ξ_α, ξ_α) = ε_α`, `[ξ_α, ξ_β] = −2ε_γ ξ_γ`,
/// `φ_α X = −ε_α ∇_X ξ_α`, and the geodesic property `∇_{ξ_α} ξ_α = 0`.
pub fn killing_triple_check(s: &MixedThreeStructure, opts: &CheckOptions) -> Result<ResidualReport, SasakiError> {
    let samples = samples(s, opts)?;
    let mut parts = Parts::new(opts);
    for sm in &samples {
        let (n, x) = (sm.n, sm.x.as_slice());
        for a in 0..3 {
            let nxi = &sm.nxi[a];
            let lie: Vec<Acc> = (0..n * n)
                .map(|k| {
                    let (mu, nu) = (k / n, k % n);
                    let mut acc = Acc::default();
                    for c in 0..n {
                        acc.push(sm.g[nu * n + c] * nxi[mu * n + c]);
                        acc.push(sm.g[mu * n + c] * nxi[nu * n + c]);
                    }
                    acc
                })
                .collect();
            parts.record(&format!("killing_xi{}", a + 1), x, compare(&lie, &zeros(n * n)));
            parts.record("causal", x, compare(&[sm.dot(&sm.xi[a], &sm.xi[a])], &[Acc::of(EPSILON[a])]));
            for b in a + 1..3 {
                parts.record("orthogonal", x, compare(&[sm.dot(&sm.xi[a], &sm.xi[b])], &[Acc::default()]));
            }
            let from_xi: Vec<Acc> = (0..n * n).map(|k| Acc::of(-EPSILON[a] * nxi[(k % n) * n + k / n])).collect();
            parts.record(&format!("phi_from_xi{}", a + 1), x, compare(&exact(&sm.phi[a]), &from_xi));
            let along: Vec<Acc> = (0..n)
                .map(|mu| {
                    let mut acc = Acc::default();
                    for l in 0..n {
                        acc.push(sm.xi[a][l] * nxi[l * n + mu]);
                    }
                    acc.m = acc.m.max(max_norm(nxi) * max_norm(&sm.xi[a]));
                    acc
                })
                .collect();
            parts.record("xi_geodesic", x, compare(&along, &zeros(n)));
        }
        for (a, b, c) in EVEN {
            let bracket: Vec<Acc> = (0..n)
                .map(|mu| {
                    let mut acc = Acc::default();
                    for nu in 0..n {
                        acc.push(sm.xi[a][nu] * sm.dxi[b][nu * n + mu]);
                        acc.push(-sm.xi[b][nu] * sm.dxi[a][nu * n + mu]);
                    }
                    acc
                })
                .collect();
            let target: Vec<Acc> = sm.xi[c].iter().map(|v| Acc::of(-2.0 * EPSILON[c] * v)).collect();
            parts.record("bracket", x, compare(&bracket, &target));
        }
    }
    Ok(parts.finish("killing-triple", s.manifold.name(), samples.len()))
}

/// `R(X, ξ_α) Y = g(ξ_α, Y) X − g(X, Y) ξ_α` over coordinate `X, Y`; the
/// sub-result `x_is_xi` checks `R(ξ_α, ξ_α) Y = 0`.
pub fn curvature_characterization(s: &MixedThreeStructure, opts: &CheckOptions) -> Result<ResidualReport, SasakiError> {
    let samples = samples(s, opts)?;
    let mut parts = Parts::new(opts);
    for sm in &samples {
        let (n, x) = (sm.n, sm.x.as_slice());
        for a in 0..3 {
            let xi = &sm.xi[a];
            let xi_low = lowered(sm, xi);
            let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
            for mu in 0..n {
                for sigma in 0..n {
                    let (ex, ey) = (basis(n, mu), basis(n, sigma));
                    lhs.extend(sm.curvature(&ex, xi, &ey));
                    for rho in 0..n {
                        let d = if rho == mu { 1.0 } else { 0.0 };
                        rhs.push(xi_low[sigma].times(d).plus(Acc::of(-sm.g[mu * n + sigma] * xi[rho])));
                    }
                }
            }
            parts.record(&format!("curvature_xi{}", a + 1), x, compare(&lhs, &rhs));
            let mut same = Vec::new();
            for sigma in 0..n {
                same.extend(sm.curvature(xi, xi, &basis(n, sigma)));
            }
            parts.record("x_is_xi", x, compare(&same, &zeros(same.len())));
        }
    }
    Ok(parts.finish("curvature-characterization", s.manifold.name(), samples.len()))
}

/// Sectional curvature of planes `span{ξ_α, X}` for coordinate and random `X`;
/// planes with `|g(ξ,ξ)g(X,X) − g(ξ,X)²| ≤ 1e-6` are skipped and counted.
pub fn sectional_curvature_check(s: &MixedThreeStructure, opts: &CheckOptions) -> Result<ResidualReport, SasakiError> {
    let samples = samples(s, opts)?;
    let mut parts = Parts::new(opts);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5ec7);
    let (mut skipped, mut lo, mut hi) = (0usize, f64::INFINITY, f64::NEG_INFINITY);
    for sm in &samples {
        let n = sm.n;
        let mut dirs: Vec<Vec<f64>> = (0..n).map(|i| basis(n, i)).collect();
        for _ in 0..2 {
            dirs.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
        for a in 0..3 {
            let xi = &sm.xi[a];
            for d in &dirs {
                let den = sm.dot(xi, xi).v * sm.dot(d, d).v - sm.dot(xi, d).v.powi(2);
                if den.abs() <= 1e-6 {
                    skipped += 1;
                    continue;
                }
                let r = values(&sm.curvature(xi, d, d));
                let k = sm.dot(&r, xi).v / den;
                lo = lo.min(k);
                hi = hi.max(k);
                parts.record(&format!("sectional_xi{}", a + 1), &sm.x, ((k - 1.0).abs(), 1.0));
            }
        }
    }
    let mut report = parts.finish("sectional-curvature", s.manifold.name(), samples.len());
    report.set_extra("skipped_planes", skipped);
    if lo.is_finite() {
        report.set_extra("min_curvature", lo);
        report.set_extra("max_curvature", hi);
    }
    Ok(report)
}

/// `Ric − λ g` at sample points, relative to the size of the curvature terms.
pub fn einstein_residual(m: &Manifold, lambda: f64, opts: &CheckOptions) -> Result<ResidualReport, SasakiError> {
    let mut report = ResidualReport::new("einstein", m.name(), opts);
    for (x, lg) in local_all(m, opts, 1)? {
        let ric = lg.ricci().values();
        let g = lg.metric().values();
        let res = ric.iter().zip(&g).fold(0.0f64, |acc, (r, g)| acc.max((r - lambda * g).abs()));
        let scale = max_norm(&ric).max(lambda.abs() * max_norm(&g)).max(super::sample::curvature_scale(&lg));
        report.record(&x, res, scale);
    }
    Ok(report.with_extra("lambda", lambda))
}

/// Einstein condition with constant `4n + 2`.
pub fn einstein_check(s: &MixedThreeStructure, opts: &CheckOptions) -> Result<ResidualReport, SasakiError> {
    einstein_residual(&s.manifold, (4 * s.n() + 2) as f64, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    /// 1-based structure index.
    pub alpha: usize,
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    /// Components of `(∇_X φ_α) X`.
    pub value: Vec<f64>,
    pub magnitude: f64,
    /// `g(X,X) ξ_1` for α = 1, `g(φ_α X, φ_α X) ξ_α` otherwise.
    pub predicted: Vec<f64>,
    /// `max |value − predicted| / max |predicted|`.
    pub prediction_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub witnesses: Vec<Witness>,
    pub candidates: usize,
    pub lightlike_excluded: usize,
    pub pass: bool,
}

/// For each α, a non-lightlike `X ⟂ ξ_α` with `(∇_X φ_α) X ≠ 0`, showing `φ_α`
/// is not a Killing tensor. The largest such value over the sample is kept.
pub fn phi_not_killing_witness(s: &MixedThreeStructure, opts: &CheckOptions) -> Result<WitnessReport, SasakiError> {
    let samples = samples(s, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x3171);
    let mut best: [Option<Witness>; 3] = Default::default();
    let (mut candidates, mut excluded) = (0, 0);
    for sm in &samples {
        let n = sm.n;
        let mut dirs: Vec<Vec<f64>> = (0..n).map(|i| basis(n, i)).collect();
        for _ in 0..3 {
            dirs.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
        for a in 0..3 {
            let xi = &sm.xi[a];
            for d in &dirs {
                candidates += 1;
                let c = sm.dot(d, xi).v / sm.dot(xi, xi).v;
                let v: Vec<f64> = d.iter().zip(xi).map(|(p, q)| p - c * q).collect();
                if sm.dot(&v, &v).v.abs() <= 1e-6 * max_norm(&v).powi(2).max(1e-300) {
                    excluded += 1;
                    continue;
                }
                let value: Vec<f64> = (0..n)
                    .map(|mu| {
                        let mut acc = 0.0;
                        for l in 0..n {
                            for nu in 0..n {
                                acc += v[l] * v[nu] * sm.nphi[a][(l * n + mu) * n + nu];
                            }
                        }
                        acc
                    })
                    .collect();
                let magnitude = max_norm(&value);
                let coeff = if a == 0 {
                    sm.dot(&v, &v).v
                } else {
                    let pv = values(&sm.apply(&sm.phi[a], &v));
                    sm.dot(&pv, &pv).v
                };
                let predicted: Vec<f64> = xi.iter().map(|q| coeff * q).collect();
                let diff: Vec<f64> = value.iter().zip(&predicted).map(|(p, q)| p - q).collect();
                let w = Witness {
                    alpha: a + 1,
                    point: sm.x.clone(),
                    direction: v,
                    magnitude,
                    prediction_residual: max_norm(&diff) / max_norm(&predicted).max(f64::MIN_POSITIVE),
                    value,
                    predicted,
                };
                if magnitude > 1e-6 && best[a].as_ref().map_or(true, |b| magnitude > b.magnitude) {
                    best[a] = Some(w);
                }
            }
        }
    }
    let mut witnesses = Vec::new();
    for (a, w) in best.into_iter().enumerate() {
        witnesses.push(w.ok_or(SasakiError::NoWitness(a + 1))?);
    }
    Ok(WitnessReport {
        witnesses,
        candidates,
        lightlike_excluded: excluded,
        pass: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConformalOutcome {
    NotConformal,
    Killing,
    ConformalNotKilling,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformalReport {
    pub outcome: ConformalOutcome,
    pub max_abs_factor: f64,
    pub conformal: ResidualReport,
    pub pass: bool,
}

/// Classifies `X` as not conformal Killing, Killing (factor zero), or conformal
/// but not Killing, which a mixed 3-Sasakian structure rules out.
pub fn conformal_to_killing_check(
    s: &MixedThreeStructure,
    x: &TensorField,
    opts: &CheckOptions,
) -> Result<ConformalReport, SasakiError> {
    let (factors, conformal) = conformal_killing_factor(x, &s.manifold, opts)?;
    let max_abs_factor = max_norm(&factors);
    let outcome = if !conformal.pass {
        ConformalOutcome::NotConformal
    } else if max_abs_factor < opts.tol {
        ConformalOutcome::Killing
    } else {
        ConformalOutcome::ConformalNotKilling
    };
    Ok(ConformalReport {
        outcome,
        max_abs_factor,
        pass: outcome == ConformalOutcome::Killing,
        conformal,
    })
}

/// Strictly increasing index tuples of length `k` below `n`.
fn increasing(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for t in increasing(n, k - 1) {
        let start = t.last().map_or(0, |l| l + 1);
        for i in start..n {
            let mut u = t.clone();
            u.push(i);
            out.push(u);
        }
    }
    out
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// Exterior product of a p-form and a q-form in the unit-weight convention
/// (`dx^0 ∧ dx^1` has component `+1` at `[0,1]`).
pub fn wedge(a: &TensorField, b: &TensorField) -> TensorField {
    let (p, q, n) = (a.rank(), b.rank(), a.dim());
    let perms = permutations(p + q);
    let norm = ratio(1, factorial(p) * factorial(q));
    let entries: Vec<(Vec<usize>, Expr)> = increasing(n, p + q)
        .into_iter()
        .map(|idx| {
            let terms = perms
                .iter()
                .map(|s| {
                    let moved: Vec<usize> = s.iter().map(|&i| idx[i]).collect();
                    let sign = permutation_sign(s) as i64;
                    Expr::int(sign) * a.get(&moved[..p]).clone() * b.get(&moved[p..]).clone()
                })
                .collect();
            (idx, simplify(&Expr::scale(norm.clone(), Expr::sum(terms))))
        })
        .collect();
    TensorField::form(n, p + q, &entries)
}

/// The candidate Killing-Yano form `η_α ∧ (dη_α)^k` of rank `2k + 1`.
pub fn ky_odd_rank_form(s: &MixedThreeStructure, alpha: usize, k: usize) -> Result<TensorField, SasakiError> {
    if alpha >= 3 || k > 2 * s.n() + 1 {
        return Err(SasakiError::Degenerate(format!("alpha index {alpha}, k = {k} out of range")));
    }
    let eta = &s.eta[alpha];
    let eta_form = TensorField::form(eta.dim(), 1, &(0..eta.dim()).map(|i| (vec![i], eta.get(&[i]).clone())).collect::<Vec<_>>());
    let d = exterior_derivative(&eta_form, &s.manifold)?;
    let mut out = eta_form;
    for _ in 0..k {
        out = wedge(&out, &d);
    }
    let points = crate::manifold::sample_points(s.manifold.chart(), 3, 7);
    let vanishes = points.iter().all(|x| {
        crate::manifold::evaluate_tensor(&out, &s.manifold, x).map_or(false, |v| max_norm(&v) < 1e-12)
    });
    if out.is_zero() || vanishes {
        return Err(SasakiError::Degenerate(format!("eta{} ∧ (d eta{})^{k} vanishes", alpha + 1, alpha + 1)));
    }
    Ok(out)
}

/// Runs the Killing-Yano residual on `η_α ∧ (dη_α)^k`.
pub fn ky_odd_rank_check(
    s: &MixedThreeStructure,
    alpha: usize,
    k: usize,
    opts: &CheckOptions,
) -> Result<ResidualReport, SasakiError> {
    let f = ky_odd_rank_form(s, alpha, k)?;
    let mut r = ky_residual(&f, &s.manifold, opts)?;
    r.target = format!("eta{} ∧ (d eta{})^{k}", alpha + 1, alpha + 1);
    Ok(r)
}
