use super::sample::{compare, exact, local_all, samples, Acc, Parts};
use super::{MixedThreeStructure, SasakiError, EPSILON};
use crate::exprkit::{simplify, Expr};
use crate::killing::{covariant_constancy_residual, CheckOptions, ResidualReport};
use crate::manifold::{covariant_derivative, lower_index, Chart, Manifold, Symmetry, TensorField, Variance};

/// The metric cone `(M × R₊, dr² + r² g)` with `J_α X = φ_α X − η_α(X) Φ`,
/// `J_α Φ = ξ_α` and Euler field `Φ = r ∂_r`. The radial coordinate is last.
#[derive(Clone, Debug)]
pub struct ConeManifold {
    pub base: MixedThreeStructure,
    pub manifold: Manifold,
    pub radial: String,
    pub j: [TensorField; 3],
    pub euler: TensorField,
}

/// Radial range of the cone chart.
pub const RADIAL_DOMAIN: (f64, f64) = (0.5, 2.0);

pub fn build_cone(s: &MixedThreeStructure) -> Result<ConeManifold, SasakiError> {
    let base = &s.manifold;
    let n = base.dim();
    let radial = if base.chart().index_of("r").is_some() { "r_cone" } else { "r" }.to_string();
    let r = Expr::coord(&radial);
    let mut coords = base.chart().coords().to_vec();
    coords.push(radial.clone());
    let mut domain = base.chart().domain().to_vec();
    domain.push(RADIAL_DOMAIN);
    let chart = Chart::from_owned(coords, domain)?;
    let metric: Vec<Vec<Expr>> = (0..=n)
        .map(|i| {
            (0..=n)
                .map(|j| match (i == n, j == n) {
                    (true, true) => Expr::one(),
                    (false, false) => simplify(&(r.clone() * r.clone() * base.metric()[i][j].clone())),
                    _ => Expr::zero(),
                })
                .collect()
        })
        .collect();
    let mut signature = base.signature().to_vec();
    signature.push(1);
    let manifold = Manifold::new(&format!("cone({})", base.name()), chart, metric, base.params().clone(), signature)?;
    let j = [0, 1, 2].map(|a| {
        TensorField::from_fn(n + 1, vec![Variance::Up, Variance::Down], Symmetry::None, |idx| {
            let (mu, nu) = (idx[0], idx[1]);
            match (mu == n, nu == n) {
                (false, false) => s.phi[a].get(&[mu, nu]).clone(),
                (true, false) => simplify(&(-(r.clone() * s.eta[a].get(&[nu]).clone()))),
                (false, true) => simplify(&(s.xi[a].get(&[mu]).clone() / r.clone())),
                (true, true) => Expr::zero(),
            }
        })
    });
    let mut e = vec![Expr::zero(); n + 1];
    e[n] = r;
    Ok(ConeManifold {
        base: s.clone(),
        manifold,
        radial,
        j,
        euler: TensorField::vector(e),
    })
}

/// `J₁J₂J₃ = −Id`, `ḡ(J_α X, J_α Y) = ε_α ḡ(X, Y)`, `J_α Φ = ξ_α` and `∇J_α = 0`.
pub fn para_hyperkahler_check(c: &ConeManifold, opts: &CheckOptions) -> Result<ResidualReport, SasakiError> {
    let mut parts = Parts::new(opts);
    let points = algebraic_parts(&c.manifold, &c.j, &mut parts, opts)?;
    let n = c.manifold.dim();
    for (x, lg) in local_all(&c.manifold, opts, 0)? {
        let phi = lg.tensor(&c.euler)?.values();
        for a in 0..3 {
            let j = lg.tensor(&c.j[a])?.values();
            let jphi: Vec<Acc> = (0..n)
                .map(|mu| {
                    let mut acc = Acc::default();
                    for nu in 0..n {
                        acc.push(j[mu * n + nu] * phi[nu]);
                    }
                    acc
                })
                .collect();
            let xi = lg.tensor(&lift(&c.base.xi[a]))?.values();
            parts.record("j_euler", &x, compare(&jphi, &exact(&xi)));
        }
    }
    parallel_parts(&c.manifold, &c.j, &mut parts, opts)?;
    Ok(parts.finish("para-hyperkahler", c.manifold.name(), points))
}

/// The para-hyper-Kähler conditions for any triple of `(1,1)` tensors on `m`.
pub fn para_hyperkahler_residual(
    m: &Manifold,
    j: &[TensorField; 3],
    opts: &CheckOptions,
) -> Result<ResidualReport, SasakiError> {
    let mut parts = Parts::new(opts);
    let points = algebraic_parts(m, j, &mut parts, opts)?;
    parallel_parts(m, j, &mut parts, opts)?;
    Ok(parts.finish("para-hyperkahler", m.name(), points))
}

fn parallel_parts(m: &Manifold, j: &[TensorField; 3], parts: &mut Parts, opts: &CheckOptions) -> Result<(), SasakiError> {
    for (a, t) in j.iter().enumerate() {
        parts.absorb(&format!("parallel{}", a + 1), covariant_constancy_residual(t, m, opts)?);
    }
    Ok(())
}

fn algebraic_parts(m: &Manifold, jt: &[TensorField; 3], parts: &mut Parts, opts: &CheckOptions) -> Result<usize, SasakiError> {
    let n = m.dim();
    let locals = local_all(m, opts, 0)?;
    for (x, lg) in &locals {
        let j: Vec<Vec<f64>> = jt.iter().map(|t| lg.tensor(t).map(|v| v.values())).collect::<Result<_, _>>()?;
        let g = lg.metric().values();
        let mm = |a: &[Acc], b: &[f64]| -> Vec<Acc> {
            (0..n * n)
                .map(|k| {
                    let (i, jj) = (k / n, k % n);
                    let mut acc = Acc::default();
                    for l in 0..n {
                        acc = acc.plus(a[i * n + l].times(b[l * n + jj]));
                    }
                    acc
                })
                .collect()
        };
        let prod = mm(&mm(&exact(&j[0]), &j[1]), &j[2]);
        let minus_id: Vec<Acc> = (0..n * n).map(|k| Acc::of(if k / n == k % n { -1.0 } else { 0.0 })).collect();
        parts.record("product", x, compare(&prod, &minus_id));
        for a in 0..3 {
            let herm: Vec<Acc> = (0..n * n)
                .map(|k| {
                    let (mu, nu) = (k / n, k % n);
                    let mut acc = Acc::default();
                    for l in 0..n {
                        for q in 0..n {
                            acc.push(j[a][l * n + mu] * g[l * n + q] * j[a][q * n + nu]);
                        }
                    }
                    acc
                })
                .collect();
            let target: Vec<Acc> = g.iter().map(|v| Acc::of(EPSILON[a] * v)).collect();
            parts.record(&format!("hermitian{}", a + 1), x, compare(&herm, &target));
        }
    }
    Ok(locals.len())
}

/// A base vector field viewed on the cone (no radial component).
fn lift(v: &TensorField) -> TensorField {
    let mut comps = v.components().to_vec();
    comps.push(Expr::zero());
    TensorField::vector(comps)
}

/// Recovers `ξ_α = J_α(∂_r)`, `φ_α X = −ε_α ∇_X ξ_α`, `η_α = g(ξ_α, ·)` on
/// `M × {1}`. Requires the cone to pass [`para_hyperkahler_check`].
pub fn reverse_cone(c: &ConeManifold, opts: &CheckOptions) -> Result<MixedThreeStructure, SasakiError> {
    let check = para_hyperkahler_check(c, opts)?;
    if !check.pass {
        return Err(SasakiError::ConeCheck(check.max_relative_residual));
    }
    let base = c.base.manifold.clone();
    let n = base.dim();
    let one = Expr::one();
    let mut phi = Vec::new();
    let mut xi = Vec::new();
    let mut eta = Vec::new();
    for a in 0..3 {
        let v = TensorField::vector(
            (0..n)
                .map(|mu| simplify(&c.j[a].get(&[mu, n]).substitute(&c.radial, &one)))
                .collect(),
        );
        let nabla = covariant_derivative(&v, &base)?;
        phi.push(TensorField::from_fn(n, vec![Variance::Up, Variance::Down], Symmetry::None, |idx| {
            simplify(&(Expr::int(-EPSILON[a] as i64) * nabla.get(&[idx[1], idx[0]]).clone()))
        }));
        eta.push(lower_index(&v, 0, &base)?.simplified());
        xi.push(v);
    }
    let arr = |v: Vec<TensorField>| -> [TensorField; 3] { v.try_into().expect("three entries") };
    MixedThreeStructure::new(base, arr(phi), arr(xi), arr(eta))
}

/// Builds the cone, recovers the structure and compares `ξ`, `η`, `φ` and the
/// rebuilt `J` against the originals.
pub fn round_trip_check(s: &MixedThreeStructure, opts: &CheckOptions) -> Result<ResidualReport, SasakiError> {
    let cone = build_cone(s)?;
    let back = reverse_cone(&cone, opts)?;
    let mut parts = Parts::new(opts);
    let (orig, rec) = (samples(s, opts)?, samples(&back, opts)?);
    for (o, r) in orig.iter().zip(&rec) {
        for a in 0..3 {
            parts.record(&format!("xi{}", a + 1), &o.x, compare(&exact(&r.xi[a]), &exact(&o.xi[a])));
            parts.record(&format!("eta{}", a + 1), &o.x, compare(&exact(&r.eta[a]), &exact(&o.eta[a])));
            parts.record(&format!("phi{}", a + 1), &o.x, compare(&exact(&r.phi[a]), &exact(&o.phi[a])));
        }
    }
    let again = build_cone(&back)?;
    for (x, lg) in local_all(&cone.manifold, opts, 0)? {
        for a in 0..3 {
            let j0 = lg.tensor(&cone.j[a])?.values();
            let j1 = lg.tensor(&again.j[a])?.values();
            parts.record(&format!("cone_j{}", a + 1), &x, compare(&exact(&j1), &exact(&j0)));
        }
    }
    Ok(parts.finish("cone-round-trip", s.manifold.name(), orig.len()))
}
