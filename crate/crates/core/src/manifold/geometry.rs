use std::collections::HashMap;
use std::sync::OnceLock;

use super::chart::{sample_points, Chart};
use super::error::GeometryError;
use super::local::LocalGeometry;
use super::tensor::{component_count, unflatten, Symmetry, TensorField, Variance};
use crate::exprkit::{differentiate, simplify, Expr, ParamEnv};

/// A chart with a symbolic metric and bound parameters.
#[derive(Clone, Debug)]
pub struct Manifold {
    name: String,
    chart: Chart,
    metric: Vec<Vec<Expr>>,
    params: ParamEnv,
    signature: Vec<i8>,
    inverse: OnceLock<TensorField>,
    christoffel: OnceLock<TensorField>,
}

impl Manifold {
    /// Builds a manifold; the metric must be structurally symmetric.
    pub fn new(
        name: &str,
        chart: Chart,
        metric: Vec<Vec<Expr>>,
        params: ParamEnv,
        signature: Vec<i8>,
    ) -> Result<Manifold, GeometryError> {
        let n = chart.dim();
        if metric.len() != n || metric.iter().any(|row| row.len() != n) {
            return Err(GeometryError::Shape(format!("metric must be {n}x{n}")));
        }
        if signature.len() != n || signature.iter().any(|s| *s != 1 && *s != -1) {
            return Err(GeometryError::Shape("signature must list n entries of +1/-1".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if metric[i][j] != metric[j][i] {
                    return Err(GeometryError::AsymmetricMetric(i, j));
                }
            }
        }
        Ok(Manifold {
            name: name.to_string(),
            chart,
            metric,
            params,
            signature,
            inverse: OnceLock::new(),
            christoffel: OnceLock::new(),
        })
    }

    /// Checks det g != 0 and the declared signature at deterministic sample points.
    pub fn validate(&self, count: usize, seed: u64) -> Result<(), GeometryError> {
        for x in sample_points(&self.chart, count, seed) {
            let g = self.metric_at(&x)?;
            let found = inertia(&g).ok_or_else(|| GeometryError::Singular(format!("{x:?}")))?;
            let mut declared = self.signature.clone();
            declared.sort_unstable();
            if found != declared {
                return Err(GeometryError::Signature {
                    point: format!("{x:?}"),
                    declared: self.signature.clone(),
                    found,
                });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn metric(&self) -> &[Vec<Expr>] {
        &self.metric
    }

    pub fn params(&self) -> &ParamEnv {
        &self.params
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn metric_tensor(&self) -> TensorField {
        TensorField::from_fn(self.dim(), vec![Variance::Down; 2], Symmetry::Symmetric, |i| {
            self.metric[i[0]][i[1]].clone()
        })
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, GeometryError> {
        let p = self.chart.point(x);
        self.metric
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| crate::exprkit::evaluate(e, &p, &self.params).map_err(Into::into))
                    .collect()
            })
            .collect()
    }

    /// Pointwise jet geometry of the given order at `x`.
    pub fn local(&self, x: &[f64], order: usize) -> Result<LocalGeometry, GeometryError> {
        LocalGeometry::new(self, x, order)
    }
}

/// Sorted eigenvalue signs of a symmetric matrix, or `None` if singular.
pub fn inertia(g: &[Vec<f64>]) -> Option<Vec<i8>> {
    let ev = symmetric_eigenvalues(g);
    let scale = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 || ev.iter().any(|v| v.abs() <= 1e-12 * scale) {
        return None;
    }
    let mut s: Vec<i8> = ev.iter().map(|v| if *v > 0.0 { 1 } else { -1 }).collect();
    s.sort_unstable();
    Some(s)
}

/// Cyclic Jacobi eigenvalue iteration for small symmetric matrices.
pub fn symmetric_eigenvalues(g: &[Vec<f64>]) -> Vec<f64> {
    let n = g.len();
    let mut a: Vec<Vec<f64>> = g.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

// Determinant of the submatrix with the given row and column masks, by Laplace
// expansion along its first row, memoized on the masks.
fn minor(
    g: &[Vec<Expr>],
    rows: u32,
    cols: u32,
    memo: &mut HashMap<(u32, u32), Expr>,
) -> Expr {
    if rows == 0 {
        return Expr::one();
    }
    if let Some(e) = memo.get(&(rows, cols)) {
        return e.clone();
    }
    let r = rows.trailing_zeros() as usize;
    let mut terms = Vec::new();
    let mut pos = 0;
    for c in 0..g.len() {
        if cols & (1 << c) == 0 {
            continue;
        }
        if !g[r][c].is_zero() {
            let sub = minor(g, rows & !(1 << r), cols & !(1 << c), memo);
            if !sub.is_zero() {
                let t = g[r][c].clone() * sub;
                terms.push(if pos % 2 == 0 { t } else { -t });
            }
        }
        pos += 1;
    }
    let e = simplify(&Expr::sum(terms));
    memo.insert((rows, cols), e.clone());
    e
}

pub fn determinant(g: &[Vec<Expr>]) -> Expr {
    let n = g.len();
    let full = (1u32 << n) - 1;
    minor(g, full, full, &mut HashMap::new())
}

/// Symbolic inverse metric by cofactor expansion.
pub fn inverse_metric(m: &Manifold) -> Result<TensorField, GeometryError> {
    if let Some(t) = m.inverse.get() {
        return Ok(t.clone());
    }
    for x in sample_points(m.chart(), 8, 0x1e7) {
        let g = m.metric_at(&x)?;
        if crate::exprkit::invert_f64(&g).is_none() {
            return Err(GeometryError::Singular(format!("{x:?}")));
        }
    }
    let n = m.dim();
    let g = m.metric();
    let full = (1u32 << n) - 1;
    let mut memo = HashMap::new();
    let det = minor(g, full, full, &mut memo);
    let t = TensorField::from_fn(n, vec![Variance::Up; 2], Symmetry::Symmetric, |idx| {
        let (i, j) = (idx[0], idx[1]);
        // (g^-1)_{ij} = C_{ji} / det
        let c = minor(g, full & !(1 << j), full & !(1 << i), &mut memo);
        let c = if (i + j) % 2 == 0 { c } else { -c };
        simplify(&(c / det.clone()))
    });
    let _ = m.inverse.set(t.clone());
    Ok(t)
}

fn metric_derivatives(m: &Manifold) -> Vec<Expr> {
    let n = m.dim();
    let coords = m.chart().coords();
    // index [k][i][j] = d_k g_ij
    (0..n * n * n)
        .map(|f| {
            let idx = unflatten(f, n, 3);
            differentiate(&m.metric()[idx[1]][idx[2]], &coords[idx[0]])
        })
        .collect()
}

/// Christoffel symbols `Γ^ρ_{μν}` stored at index `[ρ, μ, ν]`.
pub fn christoffel(m: &Manifold) -> Result<TensorField, GeometryError> {
    if let Some(t) = m.christoffel.get() {
        return Ok(t.clone());
    }
    let n = m.dim();
    let ginv = inverse_metric(m)?;
    let dg = metric_derivatives(m);
    let d = |k: usize, i: usize, j: usize| dg[(k * n + i) * n + j].clone();
    let t = TensorField::from_fn(
        n,
        vec![Variance::Up, Variance::Down, Variance::Down],
        Symmetry::None,
        |idx| {
            let (rho, mu, nu) = (idx[0], idx[1], idx[2]);
            let terms = (0..n)
                .filter(|&l| !ginv.get(&[rho, l]).is_zero())
                .map(|l| {
                    ginv.get(&[rho, l]).clone() * (d(mu, l, nu) + d(nu, l, mu) - d(l, mu, nu))
                })
                .collect();
            simplify(&(Expr::frac(1, 2) * Expr::sum(terms)))
        },
    );
    let _ = m.christoffel.set(t.clone());
    Ok(t)
}

/// Riemann tensor `R^ρ_{σμν}` stored at index `[ρ, σ, μ, ν]`.
pub fn riemann(m: &Manifold) -> Result<TensorField, GeometryError> {
    let n = m.dim();
    let gam = christoffel(m)?;
    let coords = m.chart().coords();
    let g = |a: usize, b: usize, c: usize| gam.get(&[a, b, c]).clone();
    Ok(TensorField::from_fn(
        n,
        vec![Variance::Up, Variance::Down, Variance::Down, Variance::Down],
        Symmetry::None,
        |idx| {
            let (rho, sigma, mu, nu) = (idx[0], idx[1], idx[2], idx[3]);
            let mut terms = vec![
                differentiate(&g(rho, nu, sigma), &coords[mu]),
                -differentiate(&g(rho, mu, sigma), &coords[nu]),
            ];
            for l in 0..n {
                terms.push(g(rho, mu, l) * g(l, nu, sigma));
                terms.push(-(g(rho, nu, l) * g(l, mu, sigma)));
            }
            simplify(&Expr::sum(terms))
        },
    ))
}

/// Ricci tensor `R_{σν} = R^λ_{σλν}`.
pub fn ricci(m: &Manifold) -> Result<TensorField, GeometryError> {
    let n = m.dim();
    let r = riemann(m)?;
    Ok(TensorField::from_fn(
        n,
        vec![Variance::Down; 2],
        Symmetry::Symmetric,
        |idx| simplify(&Expr::sum((0..n).map(|l| r.get(&[l, idx[0], l, idx[1]]).clone()).collect())),
    ))
}

/// Levi-Civita covariant derivative with the new lower slot in front.
pub fn covariant_derivative(t: &TensorField, m: &Manifold) -> Result<TensorField, GeometryError> {
    let n = m.dim();
    if t.dim() != n {
        return Err(GeometryError::Shape("tensor and manifold dimensions differ".into()));
    }
    let gam = christoffel(m)?;
    let coords = m.chart().coords();
    let mut variance = vec![Variance::Down];
    variance.extend_from_slice(t.variance());
    Ok(TensorField::from_fn(n, variance, Symmetry::None, |idx| {
        let lam = idx[0];
        let rest = &idx[1..];
        let mut terms = vec![differentiate(t.get(rest), &coords[lam])];
        for (slot, v) in t.variance().iter().enumerate() {
            for c in 0..n {
                let mut sw = rest.to_vec();
                sw[slot] = c;
                let comp = t.get(&sw);
                if comp.is_zero() {
                    continue;
                }
                match v {
                    Variance::Up => {
                        let gm = gam.get(&[rest[slot], lam, c]);
                        if !gm.is_zero() {
                            terms.push(gm.clone() * comp.clone());
                        }
                    }
                    Variance::Down => {
                        let gm = gam.get(&[c, lam, rest[slot]]);
                        if !gm.is_zero() {
                            terms.push(-(gm.clone() * comp.clone()));
                        }
                    }
                }
            }
        }
        simplify(&Expr::sum(terms))
    }))
}

fn contract_slot(
    t: &TensorField,
    slot: usize,
    with: &TensorField,
    new: Variance,
) -> TensorField {
    let n = t.dim();
    let mut variance = t.variance().to_vec();
    variance[slot] = new;
    TensorField::from_fn(n, variance, t.symmetry(), |idx| {
        let terms = (0..n)
            .filter_map(|c| {
                let w = with.get(&[idx[slot], c]);
                let mut sw = idx.to_vec();
                sw[slot] = c;
                let comp = t.get(&sw);
                (!w.is_zero() && !comp.is_zero()).then(|| w.clone() * comp.clone())
            })
            .collect();
        simplify(&Expr::sum(terms))
    })
}

pub fn raise_index(t: &TensorField, slot: usize, m: &Manifold) -> Result<TensorField, GeometryError> {
    if t.variance().get(slot) != Some(&Variance::Down) {
        return Err(GeometryError::InvalidSlot(slot));
    }
    Ok(contract_slot(t, slot, &inverse_metric(m)?, Variance::Up))
}

pub fn lower_index(t: &TensorField, slot: usize, m: &Manifold) -> Result<TensorField, GeometryError> {
    if t.variance().get(slot) != Some(&Variance::Up) {
        return Err(GeometryError::InvalidSlot(slot));
    }
    Ok(contract_slot(t, slot, &m.metric_tensor(), Variance::Down))
}

fn require_form(f: &TensorField) -> Result<(), GeometryError> {
    if f.variance().iter().any(|v| *v != Variance::Down) {
        return Err(GeometryError::Shape("differential forms need lower slots only".into()));
    }
    Ok(())
}

/// `(df)_{ν0…νp} = Σ_j (-1)^j ∂_{νj} f_{ν0…ν̂j…νp}`.
pub fn exterior_derivative(f: &TensorField, m: &Manifold) -> Result<TensorField, GeometryError> {
    require_form(f)?;
    let n = m.dim();
    let p = f.rank();
    if p >= n {
        return Ok(TensorField::zero(n, vec![Variance::Down; n.min(p + 1)], Symmetry::Antisymmetric));
    }
    let coords = m.chart().coords();
    Ok(TensorField::from_fn(
        n,
        vec![Variance::Down; p + 1],
        Symmetry::Antisymmetric,
        |idx| {
            let terms = (0..=p)
                .map(|j| {
                    let mut rest = idx.to_vec();
                    let v = rest.remove(j);
                    let d = differentiate(f.get(&rest), &coords[v]);
                    if j % 2 == 0 {
                        d
                    } else {
                        -d
                    }
                })
                .collect();
            simplify(&Expr::sum(terms))
        },
    ))
}

/// `(d*f)_{μ2…μp} = -g^{λμ} ∇_λ f_{μ μ2…μp}`.
pub fn codifferential(f: &TensorField, m: &Manifold) -> Result<TensorField, GeometryError> {
    require_form(f)?;
    let n = m.dim();
    let p = f.rank();
    if p == 0 {
        return Ok(TensorField::scalar(n, Expr::zero()));
    }
    let nabla = covariant_derivative(f, m)?;
    let ginv = inverse_metric(m)?;
    Ok(TensorField::from_fn(
        n,
        vec![Variance::Down; p - 1],
        Symmetry::Antisymmetric,
        |idx| {
            let mut terms = Vec::new();
            for l in 0..n {
                for mu in 0..n {
                    let gi = ginv.get(&[l, mu]);
                    if gi.is_zero() {
                        continue;
                    }
                    let mut full = vec![l, mu];
                    full.extend_from_slice(idx);
                    let c = nabla.get(&full);
                    if !c.is_zero() {
                        terms.push(gi.clone() * c.clone());
                    }
                }
            }
            simplify(&-Expr::sum(terms))
        },
    ))
}

/// Evaluates every component of a tensor at a chart point.
pub fn evaluate_tensor(t: &TensorField, m: &Manifold, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let p = m.chart().point(x);
    t.components()
        .iter()
        .map(|e| crate::exprkit::evaluate(e, &p, m.params()).map_err(Into::into))
        .collect()
}

/// Number of components of a rank-`r` tensor in the manifold's dimension.
pub fn tensor_len(m: &Manifold, rank: usize) -> usize {
    component_count(m.dim(), rank)
}

/// Lie bracket `[X, Y]^μ = X^ν ∂_ν Y^μ − Y^ν ∂_ν X^μ`.
pub fn lie_bracket(x: &TensorField, y: &TensorField, m: &Manifold) -> Result<TensorField, GeometryError> {
    if x.variance() != [Variance::Up] || y.variance() != [Variance::Up] {
        return Err(GeometryError::Shape("Lie bracket needs two vector fields".into()));
    }
    let coords = m.chart().coords();
    let n = m.dim();
    Ok(TensorField::vector(
        (0..n)
            .map(|mu| {
                let terms = (0..n)
                    .flat_map(|nu| {
                        [
                            x.components()[nu].clone() * differentiate(&y.components()[mu], &coords[nu]),
                            -(y.components()[nu].clone() * differentiate(&x.components()[mu], &coords[nu])),
                        ]
                    })
                    .collect();
                simplify(&Expr::sum(terms))
            })
            .collect(),
    ))
}
