//! Residual checks for Killing vectors, Stäckel-Killing, Killing-Yano and
//! conformal Killing-Yano tensors, plus the associated symmetric tensor.
//!
//! Every check evaluates the defining identity at deterministic sample points
//! with the jet engine and reports the worst relative residual.

mod report;

use thiserror::Error;

use crate::exprkit::{simplify, Expr};
use crate::manifold::{
    inverse_metric, permutation_sign, unflatten, GeometryError, JetTensor, LocalGeometry, Manifold,
    Symmetry, TensorField, Variance,
};

pub use report::{max_abs, relative, CheckOptions, ResidualReport};
use report::pointwise;

#[derive(Debug, Error)]
pub enum KillingError {
    #[error("tensor is not symmetric")]
    NotSymmetric,
    #[error("tensor is not an antisymmetric form")]
    NotAntisymmetric,
    #[error("expected {expected}, got variance {found:?}")]
    WrongShape { expected: String, found: Vec<Variance> },
    #[error("form degree {0} out of range")]
    DegreeOutOfRange(usize),
    #[error("form is singular at {0:?}")]
    SingularForm(Vec<f64>),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn require_vector(x: &TensorField) -> Result<(), KillingError> {
    if x.variance() != [Variance::Up] {
        return Err(KillingError::WrongShape {
            expected: "a vector field".into(),
            found: x.variance().to_vec(),
        });
    }
    Ok(())
}

fn require_form(f: &TensorField) -> Result<(), KillingError> {
    if f.variance().iter().any(|v| *v != Variance::Down) || f.rank() == 0 {
        return Err(KillingError::WrongShape {
            expected: "a covariant form".into(),
            found: f.variance().to_vec(),
        });
    }
    if !f.is_structurally_antisymmetric() {
        return Err(KillingError::NotAntisymmetric);
    }
    Ok(())
}

fn is_structurally_symmetric(t: &TensorField) -> bool {
    let rank = t.rank();
    (0..t.components().len()).all(|k| {
        let idx = unflatten(k, t.dim(), rank);
        (0..rank).all(|a| {
            (a + 1..rank).all(|b| {
                let mut sw = idx.clone();
                sw.swap(a, b);
                let other = t.get(&sw);
                t.components()[k] == *other
                    || simplify(&(t.components()[k].clone() - other.clone())).is_zero()
            })
        })
    })
}

/// All permutations of `0..k`.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn permute(idx: &[usize], perm: &[usize]) -> Vec<usize> {
    perm.iter().map(|&p| idx[p]).collect()
}

/// `L_X g = ∇_μ X_ν + ∇_ν X_μ` at sample points.
pub fn killing_vector_residual(
    x: &TensorField,
    m: &Manifold,
    opts: &CheckOptions,
) -> Result<ResidualReport, KillingError> {
    require_vector(x)?;
    let n = m.dim();
    pointwise("killing-vector", "", m, opts, 1, |lg, _| {
        let (low, nx) = nabla_lowered(lg, x)?;
        let mut res = 0.0f64;
        for mu in 0..n {
            for nu in 0..n {
                res = res.max((nx[mu * n + nu] + nx[nu * n + mu]).abs());
            }
        }
        Ok((res, max_abs(&nx).max(max_abs(&low))))
    })
}

// X_ν and ∇_μ X_ν (flattened as [μ][ν]).
fn nabla_lowered(lg: &LocalGeometry, x: &TensorField) -> Result<(Vec<f64>, Vec<f64>), KillingError> {
    let xj = lg.tensor(x)?;
    let low = lg.lower(&xj, 0)?;
    Ok((low.values(), lg.covariant_derivative(&low).values()))
}

/// Least-squares conformal factor `f` with `L_X g ≈ f g` at each sample point.
/// The report carries the residual after removing `f g`.
pub fn conformal_killing_factor(
    x: &TensorField,
    m: &Manifold,
    opts: &CheckOptions,
) -> Result<(Vec<f64>, ResidualReport), KillingError> {
    require_vector(x)?;
    let n = m.dim();
    let mut factors = Vec::new();
    let report = pointwise("conformal-killing", "", m, opts, 1, |lg, _| {
        let (low, nx) = nabla_lowered(lg, x)?;
        let g = lg.metric().values();
        let lie: Vec<f64> = (0..n * n)
            .map(|k| nx[k] + nx[(k % n) * n + k / n])
            .collect();
        let f = lie.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()
            / g.iter().map(|b| b * b).sum::<f64>();
        factors.push(f);
        let res = lie
            .iter()
            .zip(&g)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - f * b).abs()));
        Ok((res, max_abs(&lie).max(max_abs(&nx)).max(max_abs(&low))))
    })?;
    let max_f = max_abs(&factors);
    let report = report.with_extra("max_abs_factor", max_f);
    Ok((factors, report))
}

/// Fully symmetrized covariant derivative `∇_(λ K_{μ1…μr)}`.
pub fn sk_residual(
    k: &TensorField,
    m: &Manifold,
    opts: &CheckOptions,
) -> Result<ResidualReport, KillingError> {
    if k.variance().iter().any(|v| *v != Variance::Down) {
        return Err(KillingError::WrongShape {
            expected: "a covariant symmetric tensor".into(),
            found: k.variance().to_vec(),
        });
    }
    if !is_structurally_symmetric(k) {
        return Err(KillingError::NotSymmetric);
    }
    let n = m.dim();
    let r = k.rank();
    let perms = permutations(r + 1);
    pointwise("sk", "", m, opts, 1, |lg, _| {
        let kj = lg.tensor(k)?;
        let nk = lg.covariant_derivative(&kj);
        let vals = nk.values();
        let mut res = 0.0f64;
        for f in 0..vals.len() {
            let idx = unflatten(f, n, r + 1);
            let s: f64 = perms.iter().map(|p| nk.get(&permute(&idx, p)).value()).sum();
            res = res.max(s.abs() / perms.len() as f64);
        }
        Ok((res, max_abs(&vals).max(max_abs(&kj.values()))))
    })
}

/// Symmetric part `∇_λ f_{μ…} + ∇_μ f_{λ…}` together with the deviation of `∇f`
/// from its full antisymmetrization; the larger of the two is reported.
pub fn ky_residual(
    f: &TensorField,
    m: &Manifold,
    opts: &CheckOptions,
) -> Result<ResidualReport, KillingError> {
    require_form(f)?;
    let n = m.dim();
    let p = f.rank();
    let perms = permutations(p + 1);
    let signs: Vec<f64> = perms.iter().map(|q| permutation_sign(q) as f64).collect();
    let mut sym_worst = 0.0f64;
    let mut anti_worst = 0.0f64;
    let mut report = pointwise("ky", "", m, opts, 1, |lg, _| {
        let fj = lg.tensor(f)?;
        let nf = lg.covariant_derivative(&fj);
        let vals = nf.values();
        let (mut sym, mut anti) = (0.0f64, 0.0f64);
        for k in 0..vals.len() {
            let idx = unflatten(k, n, p + 1);
            let mut sw = idx.clone();
            sw.swap(0, 1);
            sym = sym.max((vals[k] + nf.get(&sw).value()).abs());
            let a: f64 = perms
                .iter()
                .zip(&signs)
                .map(|(q, s)| s * nf.get(&permute(&idx, q)).value())
                .sum::<f64>()
                / perms.len() as f64;
            anti = anti.max((vals[k] - a).abs());
        }
        let scale = max_abs(&vals).max(max_abs(&fj.values()));
        sym_worst = sym_worst.max(relative(sym, scale));
        anti_worst = anti_worst.max(relative(anti, scale));
        Ok((sym.max(anti), scale))
    })?;
    report.set_extra("symmetric_part_relative", sym_worst);
    report.set_extra("antisymmetrization_deviation_relative", anti_worst);
    Ok(report)
}

/// `(α ∧ β)` for a 1-form `α` and a (p-1)-form `β`, unit-weight components.
fn wedge_one(alpha: &[f64], beta: &JetTensor, n: usize) -> Vec<f64> {
    let p = beta.rank() + 1;
    let len = n.pow(p as u32);
    (0..len)
        .map(|k| {
            let idx = unflatten(k, n, p);
            (0..p)
                .map(|j| {
                    let mut rest = idx.clone();
                    let mu = rest.remove(j);
                    let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                    s * alpha[mu] * beta.get(&rest).value()
                })
                .sum()
        })
        .collect()
}

/// Conformal Killing-Yano residual
/// `∇_X f − X ⌟ df/(p+1) + X* ∧ d*f/(n−p+1)` for `X` over the coordinate basis.
pub fn cky_residual(
    f: &TensorField,
    m: &Manifold,
    opts: &CheckOptions,
) -> Result<ResidualReport, KillingError> {
    require_form(f)?;
    let n = m.dim();
    let p = f.rank();
    if p == 0 || p >= n {
        return Err(KillingError::DegreeOutOfRange(p));
    }
    let c_d = 1.0 / (p as f64 + 1.0);
    let c_s = 1.0 / ((n - p) as f64 + 1.0);
    pointwise("cky", "", m, opts, 1, |lg, _| {
        let fj = lg.tensor(f)?;
        let nf = lg.covariant_derivative(&fj).values();
        let df = lg.exterior_derivative(&fj).values();
        let ds = lg.codifferential(&fj);
        let g = lg.metric().values();
        let block = n.pow(p as u32);
        let (mut res, mut scale) = (0.0f64, max_abs(&fj.values()));
        for lam in 0..n {
            // X = ∂_λ, X* = g_{λ·}
            let xstar: Vec<f64> = (0..n).map(|a| g[lam * n + a]).collect();
            let w = wedge_one(&xstar, &ds, n);
            for k in 0..block {
                let a = nf[lam * block + k];
                let b = c_d * df[lam * block + k];
                let c = c_s * w[k];
                res = res.max((a - b + c).abs());
                scale = scale.max(a.abs()).max(b.abs()).max(c.abs());
            }
        }
        Ok((res, scale))
    })
}

/// `max |∇T|` relative to the components of `T`. The extra field records the
/// worst component of `∇T` (new derivative slot first) and its value.
pub fn covariant_constancy_residual(
    t: &TensorField,
    m: &Manifold,
    opts: &CheckOptions,
) -> Result<ResidualReport, KillingError> {
    let n = m.dim();
    let mut worst: Option<(f64, Vec<usize>, f64)> = None;
    let mut report = pointwise("covconst", "", m, opts, 1, |lg, _| {
        let tj = lg.tensor(t)?;
        let nt = lg.covariant_derivative(&tj).values();
        let scale = max_abs(&tj.values()).max(max_abs(&nt));
        let (mut res, mut at) = (0.0f64, 0usize);
        for (k, v) in nt.iter().enumerate() {
            if v.abs() > res {
                res = v.abs();
                at = k;
            }
        }
        let rel = relative(res, scale);
        if worst.as_ref().map_or(true, |w| rel > w.0) {
            worst = Some((rel, unflatten(at, n, t.rank() + 1), nt[at]));
        }
        Ok((res, scale))
    })?;
    if let Some((_, idx, v)) = worst {
        report.set_extra("worst_component", idx);
        report.set_extra("worst_value", v);
    }
    Ok(report)
}

/// `K_{μν} = f_{μλ…} f_ν^{λ…}`, built symbolically and kept symmetric by construction.
pub fn associated_sk(f: &TensorField, m: &Manifold) -> Result<TensorField, KillingError> {
    require_form(f)?;
    let n = m.dim();
    let p = f.rank();
    let ginv = inverse_metric(m)?;
    let tails: Vec<Vec<usize>> = (0..n.pow((p - 1) as u32))
        .map(|k| unflatten(k, n, p - 1))
        .collect();
    let mut comps = vec![Expr::zero(); n * n];
    for mu in 0..n {
        for nu in mu..n {
            let mut terms = Vec::new();
            for lam in &tails {
                for al in &tails {
                    // Π g^{λ_i α_i}
                    let mut factors = Vec::new();
                    let mut zero = false;
                    for (l, a) in lam.iter().zip(al) {
                        let gi = ginv.get(&[*l, *a]);
                        if gi.is_zero() {
                            zero = true;
                            break;
                        }
                        factors.push(gi.clone());
                    }
                    if zero {
                        continue;
                    }
                    let mut left = vec![mu];
                    left.extend_from_slice(lam);
                    let mut right = vec![nu];
                    right.extend_from_slice(al);
                    let (a, b) = (f.get(&left), f.get(&right));
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    factors.push(a.clone());
                    factors.push(b.clone());
                    terms.push(Expr::product(factors));
                }
            }
            let k = simplify(&Expr::sum(terms));
            comps[mu * n + nu] = k.clone();
            comps[nu * n + mu] = k;
        }
    }
    Ok(TensorField::new(n, vec![Variance::Down; 2], Symmetry::Symmetric, comps)?)
}

// K_{αβ} = f^μ_α f_{μβ} at the base point, flattened.
fn contraction(lg: &LocalGeometry, f: &JetTensor) -> Vec<f64> {
    let n = lg.dim();
    let gi = lg.inverse_metric().values();
    let fv = f.values();
    let mut k = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let mut acc = 0.0;
            for mu in 0..n {
                for nu in 0..n {
                    acc += gi[mu * n + nu] * fv[nu * n + a] * fv[mu * n + b];
                }
            }
            k[a * n + b] = acc;
        }
    }
    k
}

/// Strict unit-root residual `f^μ_α f_{μβ} − g_{αβ}`; the fitted-scale residual
/// and the mean fitted scale are recorded in the extra field.
pub fn unit_root_check(
    f: &TensorField,
    m: &Manifold,
    opts: &CheckOptions,
) -> Result<(ResidualReport, f64), KillingError> {
    require_form(f)?;
    if f.rank() != 2 {
        return Err(KillingError::DegreeOutOfRange(f.rank()));
    }
    let n = m.dim();
    let mut scales = Vec::new();
    let mut fitted_worst = 0.0f64;
    let mut report = pointwise("unit-root", "", m, opts, 0, |lg, _| {
        let fj = lg.tensor(f)?;
        let fv: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| fj.get(&[i, j]).value()).collect())
            .collect();
        if crate::exprkit::invert_f64(&fv).is_none() {
            return Err(KillingError::SingularForm(lg.point().to_vec()));
        }
        let k = contraction(lg, &fj);
        let g = lg.metric().values();
        let c = k.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()
            / g.iter().map(|b| b * b).sum::<f64>();
        scales.push(c);
        let scale = max_abs(&k).max(max_abs(&g));
        let strict = k.iter().zip(&g).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        let fitted = k.iter().zip(&g).fold(0.0f64, |a, (x, y)| a.max((x - c * y).abs()));
        fitted_worst = fitted_worst.max(relative(fitted, scale));
        Ok((strict, scale))
    })?;
    let mean = scales.iter().sum::<f64>() / scales.len().max(1) as f64;
    let spread = scales.iter().fold(0.0f64, |a, c| a.max((c - mean).abs()));
    report.set_extra("fitted_scale", mean);
    report.set_extra("fitted_scale_spread", spread);
    report.set_extra("fitted_relative_residual", fitted_worst);
    report.set_extra("fitted_pass", fitted_worst < opts.tol && spread <= opts.tol * mean.abs().max(1.0));
    Ok((report, mean))
}

// Matrix of the endomorphism X ↦ (X ⌟ f)^♯, i.e. F[ν][μ] = f_μ^ν.
fn raised(lg: &LocalGeometry, f: &TensorField) -> Result<Vec<Vec<f64>>, KillingError> {
    let n = lg.dim();
    let up = lg.raise(&lg.tensor(f)?, 1)?;
    Ok((0..n)
        .map(|nu| (0..n).map(|mu| up.get(&[mu, nu]).value()).collect())
        .collect())
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// `F_i F_j + F_j F_i = −2δ_ij` and `F_i F_j − F_j F_i = −2ε_ijk F_k`, where
/// `F_i X = (X ⌟ f^i)^♯` is the endomorphism of vectors defined by each form. Per-relation worst residuals go to the extra field.
pub fn quaternion_relations_check(
    f: [&TensorField; 3],
    m: &Manifold,
    opts: &CheckOptions,
) -> Result<ResidualReport, KillingError> {
    for t in f {
        require_form(t)?;
        if t.rank() != 2 {
            return Err(KillingError::DegreeOutOfRange(t.rank()));
        }
    }
    let n = m.dim();
    let mut worst = [[0.0f64; 3]; 3];
    let mut comm_worst = [[0.0f64; 3]; 3];
    let mut report = pointwise("quaternion", "", m, opts, 0, |lg, _| {
        let fs: Vec<Vec<Vec<f64>>> = f.iter().map(|t| raised(lg, t)).collect::<Result<_, _>>()?;
        let (mut res, mut scale) = (0.0f64, 2.0f64);
        for i in 0..3 {
            for j in 0..3 {
                let ij = matmul(&fs[i], &fs[j]);
                let ji = matmul(&fs[j], &fs[i]);
                let (mut a_res, mut c_res) = (0.0f64, 0.0f64);
                for a in 0..n {
                    for b in 0..n {
                        let delta = if i == j && a == b { -2.0 } else { 0.0 };
                        let anti = ij[a][b] + ji[a][b] - delta;
                        let mut target = 0.0;
                        if i != j {
                            let k = 3 - i - j;
                            let eps = permutation_sign(&[i, j, k]) as f64;
                            target = -2.0 * eps * fs[k][a][b];
                        }
                        let comm = ij[a][b] - ji[a][b] - target;
                        a_res = a_res.max(anti.abs());
                        c_res = c_res.max(comm.abs());
                        scale = scale.max(ij[a][b].abs()).max(target.abs());
                    }
                }
                worst[i][j] = worst[i][j].max(a_res);
                comm_worst[i][j] = comm_worst[i][j].max(c_res);
                res = res.max(a_res).max(c_res);
            }
        }
        Ok((res, scale))
    })?;
    report.set_extra("anticommutator_residuals", serde_json::json!(worst));
    report.set_extra("commutator_residuals", serde_json::json!(comm_worst));
    Ok(report)
}
