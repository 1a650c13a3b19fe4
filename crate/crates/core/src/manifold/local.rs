//! Pointwise geometry on jets.
//!
//! Every field is expanded into a truncated Taylor polynomial at one chart
//! point, so differential identities can be checked there with derivatives
//! that are exact up to roundoff. Order 2 is enough for curvature and for
//! compositions of two first-order operators.

use std::sync::Arc;

use super::error::GeometryError;
use super::geometry::Manifold;
use super::tensor::{component_count, flatten, unflatten, TensorField, Variance};
use crate::exprkit::{invert_matrix, Expr, Jet, JetEvaluator, JetSpace, ParamEnv};

/// Component jets of a tensor at one point.
#[derive(Clone, Debug)]
pub struct JetTensor {
    dim: usize,
    variance: Vec<Variance>,
    comps: Vec<Jet>,
}

impl JetTensor {
    pub fn from_fn(
        dim: usize,
        variance: Vec<Variance>,
        mut f: impl FnMut(&[usize]) -> Jet,
    ) -> JetTensor {
        let rank = variance.len();
        let comps = (0..component_count(dim, rank))
            .map(|k| f(&unflatten(k, dim, rank)))
            .collect();
        JetTensor {
            dim,
            variance,
            comps,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn comps(&self) -> &[Jet] {
        &self.comps
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.comps[flatten(idx, self.dim)]
    }

    /// Component values at the base point.
    pub fn values(&self) -> Vec<f64> {
        self.comps.iter().map(Jet::value).collect()
    }

    pub fn scale(&self, s: f64) -> JetTensor {
        self.map(|j| j.scale(s))
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> JetTensor {
        JetTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn add(&self, o: &JetTensor) -> JetTensor {
        JetTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &JetTensor) -> JetTensor {
        self.add(&o.scale(-1.0))
    }
}

/// Jets of the metric, its inverse and the Christoffel symbols at one point.
#[derive(Clone, Debug)]
pub struct LocalGeometry {
    space: Arc<JetSpace>,
    n: usize,
    point: Vec<f64>,
    coords: Vec<String>,
    params: ParamEnv,
    g: JetTensor,
    ginv: JetTensor,
    gamma: JetTensor,
}

impl LocalGeometry {
    pub fn new(m: &Manifold, x: &[f64], order: usize) -> Result<LocalGeometry, GeometryError> {
        let n = m.dim();
        if x.len() != n {
            return Err(GeometryError::Shape(format!("point has {} coordinates, expected {n}", x.len())));
        }
        // one extra order so that Christoffels keep the requested order
        let space = JetSpace::new(n, order + 1);
        let coords = m.chart().coords().to_vec();
        let mut ev = JetEvaluator::new(&space, &coords, x, m.params());
        let rows: Vec<Vec<Jet>> = m
            .metric()
            .iter()
            .map(|row| row.iter().map(|e| ev.eval(e)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        let inv = invert_matrix(&rows).map_err(|_| GeometryError::Singular(format!("{x:?}")))?;
        let g = JetTensor::from_fn(n, vec![Variance::Down; 2], |i| rows[i[0]][i[1]].clone());
        let ginv = JetTensor::from_fn(n, vec![Variance::Up; 2], |i| inv[i[0]][i[1]].clone());
        let dg: Vec<Jet> = (0..n * n * n)
            .map(|f| {
                let i = unflatten(f, n, 3);
                g.get(&[i[1], i[2]]).deriv(i[0])
            })
            .collect();
        let d = |k: usize, i: usize, j: usize| &dg[(k * n + i) * n + j];
        let gamma = JetTensor::from_fn(
            n,
            vec![Variance::Up, Variance::Down, Variance::Down],
            |idx| {
                let (rho, mu, nu) = (idx[0], idx[1], idx[2]);
                let mut acc = Jet::zero(&space);
                for l in 0..n {
                    let s = d(mu, l, nu).add(d(nu, l, mu)).sub(d(l, mu, nu));
                    acc = acc.add(&ginv.get(&[rho, l]).mul(&s));
                }
                acc.scale(0.5)
            },
        );
        Ok(LocalGeometry {
            space,
            n,
            point: x.to_vec(),
            coords,
            params: m.params().clone(),
            g,
            ginv,
            gamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn metric(&self) -> &JetTensor {
        &self.g
    }

    pub fn inverse_metric(&self) -> &JetTensor {
        &self.ginv
    }

    pub fn christoffel(&self) -> &JetTensor {
        &self.gamma
    }

    pub fn constant(&self, c: f64) -> Jet {
        Jet::constant(&self.space, c)
    }

    pub fn eval(&self, e: &Expr) -> Result<Jet, GeometryError> {
        let mut ev = JetEvaluator::new(&self.space, &self.coords, &self.point, &self.params);
        Ok(ev.eval(e)?)
    }

    pub fn tensor(&self, t: &TensorField) -> Result<JetTensor, GeometryError> {
        let mut ev = JetEvaluator::new(&self.space, &self.coords, &self.point, &self.params);
        let comps = t
            .components()
            .iter()
            .map(|e| ev.eval(e))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(JetTensor {
            dim: self.n,
            variance: t.variance().to_vec(),
            comps,
        })
    }

    /// `R^ρ_{σμν}` at index `[ρ, σ, μ, ν]`.
    pub fn riemann(&self) -> JetTensor {
        let n = self.n;
        let gm = |a: usize, b: usize, c: usize| self.gamma.get(&[a, b, c]);
        JetTensor::from_fn(
            n,
            vec![Variance::Up, Variance::Down, Variance::Down, Variance::Down],
            |idx| {
                let (rho, sigma, mu, nu) = (idx[0], idx[1], idx[2], idx[3]);
                let mut acc = gm(rho, nu, sigma).deriv(mu).sub(&gm(rho, mu, sigma).deriv(nu));
                for l in 0..n {
                    acc = acc.add(&gm(rho, mu, l).mul(gm(l, nu, sigma)));
                    acc = acc.sub(&gm(rho, nu, l).mul(gm(l, mu, sigma)));
                }
                acc
            },
        )
    }

    pub fn ricci(&self) -> JetTensor {
        let r = self.riemann();
        let n = self.n;
        JetTensor::from_fn(n, vec![Variance::Down; 2], |idx| {
            let mut acc = self.constant(0.0);
            for l in 0..n {
                acc = acc.add(r.get(&[l, idx[0], l, idx[1]]));
            }
            acc
        })
    }

    pub fn covariant_derivative(&self, t: &JetTensor) -> JetTensor {
        let n = self.n;
        let mut variance = vec![Variance::Down];
        variance.extend_from_slice(t.variance());
        JetTensor::from_fn(n, variance, |idx| {
            let lam = idx[0];
            let rest = &idx[1..];
            let mut acc = t.get(rest).deriv(lam);
            for (slot, v) in t.variance().iter().enumerate() {
                let mut sw = rest.to_vec();
                for c in 0..n {
                    sw[slot] = c;
                    match v {
                        Variance::Up => {
                            acc = acc.add(&self.gamma.get(&[rest[slot], lam, c]).mul(t.get(&sw)))
                        }
                        Variance::Down => {
                            acc = acc.sub(&self.gamma.get(&[c, lam, rest[slot]]).mul(t.get(&sw)))
                        }
                    }
                }
            }
            acc
        })
    }

    fn contract(&self, t: &JetTensor, slot: usize, with: &JetTensor, new: Variance) -> JetTensor {
        let mut variance = t.variance().to_vec();
        variance[slot] = new;
        JetTensor::from_fn(self.n, variance, |idx| {
            let mut acc = self.constant(0.0);
            let mut sw = idx.to_vec();
            for c in 0..self.n {
                sw[slot] = c;
                acc = acc.add(&with.get(&[idx[slot], c]).mul(t.get(&sw)));
            }
            acc
        })
    }

    pub fn raise(&self, t: &JetTensor, slot: usize) -> Result<JetTensor, GeometryError> {
        if t.variance().get(slot) != Some(&Variance::Down) {
            return Err(GeometryError::InvalidSlot(slot));
        }
        Ok(self.contract(t, slot, &self.ginv, Variance::Up))
    }

    pub fn lower(&self, t: &JetTensor, slot: usize) -> Result<JetTensor, GeometryError> {
        if t.variance().get(slot) != Some(&Variance::Up) {
            return Err(GeometryError::InvalidSlot(slot));
        }
        Ok(self.contract(t, slot, &self.g, Variance::Down))
    }

    pub fn exterior_derivative(&self, f: &JetTensor) -> JetTensor {
        let p = f.rank();
        JetTensor::from_fn(self.n, vec![Variance::Down; p + 1], |idx| {
            let mut acc = self.constant(0.0);
            for j in 0..=p {
                let mut rest = idx.to_vec();
                let v = rest.remove(j);
                let d = f.get(&rest).deriv(v);
                acc = if j % 2 == 0 { acc.add(&d) } else { acc.sub(&d) };
            }
            acc
        })
    }

    pub fn codifferential(&self, f: &JetTensor) -> JetTensor {
        let p = f.rank();
        let n = self.n;
        if p == 0 {
            return JetTensor::from_fn(n, Vec::new(), |_| self.constant(0.0));
        }
        let nabla = self.covariant_derivative(f);
        JetTensor::from_fn(n, vec![Variance::Down; p - 1], |idx| {
            let mut acc = self.constant(0.0);
            for l in 0..n {
                for mu in 0..n {
                    let mut full = vec![l, mu];
                    full.extend_from_slice(idx);
                    acc = acc.add(&self.ginv.get(&[l, mu]).mul(nabla.get(&full)));
                }
            }
            acc.scale(-1.0)
        })
    }
}
