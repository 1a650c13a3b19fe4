use super::SpinError;
use crate::exprkit::{differentiate, evaluate, simplify, Expr};
use crate::manifold::{christoffel, inverse_metric, sample_points, Manifold};

/// Orthonormal coframe `e^a_μ` (row `a`, column `μ`) with its inverse
/// `e_a^μ` and the frame metric `η_{ab} = diag(eta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub coframe: Vec<Vec<Expr>>,
    pub inverse: Vec<Vec<Expr>>,
    pub eta: Vec<i8>,
}

impl Frame {
    /// Wraps a supplied coframe; `η` is read off numerically and the
    /// orthonormality `e^a_μ e^b_ν η_{ab} = g_{μν}` is verified.
    pub fn from_coframe(m: &Manifold, coframe: Vec<Vec<Expr>>) -> Result<Frame, SpinError> {
        let n = m.dim();
        if coframe.len() != n || coframe.iter().any(|r| r.len() != n) {
            return Err(SpinError::Frame(format!("coframe must be {n}x{n}")));
        }
        let x = centre(m);
        let p = m.chart().point(&x);
        let e: Vec<Vec<f64>> = coframe
            .iter()
            .map(|r| r.iter().map(|c| evaluate(c, &p, m.params())).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        let g = m.metric_at(&x)?;
        let einv = crate::exprkit::invert_f64(&e).ok_or_else(|| SpinError::Frame("coframe is singular".into()))?;
        // η_{ab} = e_a^μ g_{μν} e_b^ν
        let mut eta = Vec::with_capacity(n);
        for a in 0..n {
            let v: f64 = (0..n)
                .flat_map(|mu| (0..n).map(move |nu| (mu, nu)))
                .map(|(mu, nu)| einv[mu][a] * g[mu][nu] * einv[nu][a])
                .sum();
            eta.push(if v > 0.0 { 1 } else { -1 });
        }
        let inv = inverse_metric(m)?;
        let inverse = (0..n)
            .map(|a| {
                (0..n)
                    .map(|mu| {
                        let terms = (0..n).map(|nu| inv.get(&[mu, nu]).clone() * coframe[a][nu].clone()).collect();
                        simplify(&Expr::scale(crate::exprkit::rat(eta[a] as i64), Expr::sum(terms)))
                    })
                    .collect()
            })
            .collect();
        let frame = Frame {
            coframe,
            inverse,
            eta,
        };
        let res = frame_residual(&frame, m, 5, 0)?;
        if !(res < 1e-10) {
            return Err(SpinError::Frame(format!("coframe is not orthonormal (relative residual {res:e})")));
        }
        Ok(frame)
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }
}

fn centre(m: &Manifold) -> Vec<f64> {
    m.chart().domain().iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
}

/// Builds an orthonormal coframe: `supplied` if given, `√|g_aa|` for a
/// diagonal metric, otherwise a symbolic `UᵀDU` (Gram-Schmidt) factorization.
pub fn orthonormal_frame(m: &Manifold, supplied: Option<&[Vec<Expr>]>) -> Result<Frame, SpinError> {
    if let Some(rows) = supplied {
        return Frame::from_coframe(m, rows.to_vec());
    }
    let n = m.dim();
    let g = m.metric();
    let x = centre(m);
    let p = m.chart().point(&x);
    let sign = |e: &Expr| -> Result<i64, SpinError> {
        let v = evaluate(e, &p, m.params())?;
        if v == 0.0 {
            return Err(SpinError::Frame(format!("degenerate pivot `{e}`")));
        }
        Ok(if v > 0.0 { 1 } else { -1 })
    };
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || g[i][j].is_zero()));
    let mut coframe = vec![vec![Expr::zero(); n]; n];
    if diagonal {
        for a in 0..n {
            let s = sign(&g[a][a])?;
            coframe[a][a] = simplify(&Expr::sqrt(Expr::int(s) * g[a][a].clone()));
        }
        return Frame::from_coframe(m, coframe);
    }
    // g = Uᵀ D U with U unit upper triangular
    let mut u = vec![vec![Expr::zero(); n]; n];
    let mut d = Vec::with_capacity(n);
    for a in 0..n {
        let corr = |mu: usize, u: &[Vec<Expr>], d: &[Expr]| {
            Expr::sum((0..a).map(|c| d[c].clone() * u[c][a].clone() * u[c][mu].clone()).collect())
        };
        let da = simplify(&(g[a][a].clone() - corr(a, &u, &d)));
        if da.is_zero() {
            return Err(SpinError::Frame(format!("zero pivot at index {a}")));
        }
        u[a][a] = Expr::one();
        for mu in a + 1..n {
            u[a][mu] = simplify(&((g[a][mu].clone() - corr(mu, &u, &d)) / da.clone()));
        }
        d.push(da);
    }
    for a in 0..n {
        let s = sign(&d[a])?;
        let scale = Expr::sqrt(Expr::int(s) * d[a].clone());
        for mu in a..n {
            coframe[a][mu] = simplify(&(scale.clone() * u[a][mu].clone()));
        }
    }
    Frame::from_coframe(m, coframe)
}

/// Worst relative deviation of `e^a_μ e^b_ν η_{ab}` from `g_{μν}` over sample points.
pub fn frame_residual(frame: &Frame, m: &Manifold, points: usize, seed: u64) -> Result<f64, SpinError> {
    let n = m.dim();
    let mut worst = 0.0f64;
    for x in sample_points(m.chart(), points, seed) {
        let p = m.chart().point(&x);
        let e: Vec<Vec<f64>> = frame
            .coframe
            .iter()
            .map(|r| r.iter().map(|c| evaluate(c, &p, m.params())).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        let g = m.metric_at(&x)?;
        let scale = g.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        for mu in 0..n {
            for nu in 0..n {
                let v: f64 = (0..n).map(|a| frame.eta[a] as f64 * e[a][mu] * e[a][nu]).sum();
                worst = worst.max((v - g[mu][nu]).abs() / scale);
            }
        }
    }
    Ok(worst)
}

/// Spin connection `ω_μ^{ab}` from the tetrad postulate
/// `∂_μ e^a_ν − Γ^λ_{μν} e^a_λ + ω_μ{}^a{}_b e^b_ν = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinConnection {
    dim: usize,
    comps: Vec<Expr>,
}

impl SpinConnection {
    pub fn get(&self, mu: usize, a: usize, b: usize) -> &Expr {
        &self.comps[(mu * self.dim + a) * self.dim + b]
    }
}

pub fn spin_connection(frame: &Frame, m: &Manifold) -> Result<SpinConnection, SpinError> {
    let n = m.dim();
    let gam = christoffel(m)?;
    let coords = m.chart().coords();
    // (∇_μ e^a)_ν
    let nabla_e = |mu: usize, a: usize, nu: usize| {
        let mut t = vec![differentiate(&frame.coframe[a][nu], &coords[mu])];
        for lam in 0..n {
            let c = gam.get(&[lam, mu, nu]);
            if !c.is_zero() && !frame.coframe[a][lam].is_zero() {
                t.push(-(c.clone() * frame.coframe[a][lam].clone()));
            }
        }
        Expr::sum(t)
    };
    let mut comps = Vec::with_capacity(n * n * n);
    for mu in 0..n {
        let ne: Vec<Vec<Expr>> = (0..n).map(|a| (0..n).map(|nu| nabla_e(mu, a, nu)).collect()).collect();
        for a in 0..n {
            for b in 0..n {
                // ω_μ^{ab} = −(∇_μ e^a)_ν e_b^ν η^{bb}
                let terms = (0..n).map(|nu| ne[a][nu].clone() * frame.inverse[b][nu].clone()).collect();
                comps.push(simplify(&Expr::scale(crate::exprkit::rat(-(frame.eta[b] as i64)), Expr::sum(terms))));
            }
        }
    }
    Ok(SpinConnection { dim: n, comps })
}
