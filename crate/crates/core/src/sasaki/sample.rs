use serde_json::{Map, Value};

use super::{MixedThreeStructure, SasakiError};
use crate::killing::{CheckOptions, ResidualReport};
use crate::manifold::{LocalGeometry, Manifold};

/// A sum together with the largest magnitude among its terms.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Acc {
    pub v: f64,
    pub m: f64,
}

impl Acc {
    pub fn of(v: f64) -> Acc {
        Acc { v, m: v.abs() }
    }

    pub fn push(&mut self, p: f64) {
        self.v += p;
        self.m = self.m.max(p.abs());
    }

    pub fn plus(self, o: Acc) -> Acc {
        Acc {
            v: self.v + o.v,
            m: self.m.max(o.m),
        }
    }

    pub fn times(self, c: f64) -> Acc {
        Acc {
            v: self.v * c,
            m: self.m * c.abs(),
        }
    }
}

/// `(max |l − r|, largest term magnitude)` over paired components.
pub(crate) fn compare(lhs: &[Acc], rhs: &[Acc]) -> (f64, f64) {
    let mut res = 0.0f64;
    let mut scale = 0.0f64;
    for (l, r) in lhs.iter().zip(rhs) {
        res = res.max((l.v - r.v).abs());
        scale = scale.max(l.m).max(r.m).max(l.v.abs()).max(r.v.abs());
    }
    (res, scale)
}

/// Named sub-reports folded into one aggregated report.
pub(crate) struct Parts {
    opts: CheckOptions,
    parts: Vec<ResidualReport>,
}

impl Parts {
    pub fn new(opts: &CheckOptions) -> Parts {
        Parts {
            opts: *opts,
            parts: Vec::new(),
        }
    }

    fn slot(&mut self, name: &str) -> &mut ResidualReport {
        if let Some(i) = self.parts.iter().position(|p| p.check == name) {
            &mut self.parts[i]
        } else {
            self.parts.push(ResidualReport::new(name, "", &self.opts));
            self.parts.last_mut().expect("just pushed")
        }
    }

    pub fn record(&mut self, name: &str, x: &[f64], (res, scale): (f64, f64)) {
        self.slot(name).record(x, res, scale);
    }

    pub fn absorb(&mut self, name: &str, mut r: ResidualReport) {
        r.check = name.to_string();
        self.parts.push(r);
    }

    pub fn finish(self, check: &str, target: &str, points: usize) -> ResidualReport {
        let mut main = ResidualReport::new(check, target, &self.opts);
        main.points = points;
        let mut sub = Map::new();
        main.pass = !self.parts.is_empty();
        for p in &self.parts {
            main.max_residual = main.max_residual.max(p.max_residual);
            if p.max_relative_residual > main.max_relative_residual || main.worst_point.is_empty() {
                main.max_relative_residual = p.max_relative_residual;
                main.worst_point = p.worst_point.clone();
            }
            main.pass &= p.pass;
            sub.insert(p.check.clone(), serde_json::to_value(p).expect("report serializes"));
        }
        main.extra.insert("subchecks".into(), Value::Object(sub));
        main
    }
}

/// Maps `f` over points on scoped threads, preserving order.
pub(crate) fn par_map<T: Send>(
    points: &[Vec<f64>],
    f: impl Fn(&[f64]) -> Result<T, SasakiError> + Sync,
) -> Result<Vec<T>, SasakiError> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(points.len().max(1));
    let chunk = points.len().div_ceil(workers).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .map(|c| {
                let f = &f;
                s.spawn(move || c.iter().map(|x| f(x)).collect::<Result<Vec<T>, SasakiError>>())
            })
            .collect();
        let mut out = Vec::with_capacity(points.len());
        for h in handles {
            out.extend(h.join().expect("sampling thread panicked")?);
        }
        Ok(out)
    })
}

/// Every structure tensor and its first derivatives at one point.
/// Matrices are flattened row-major: `phi[μ*n+ν] = φ^μ_ν`,
/// `nphi[(λ*n+μ)*n+ν] = ∇_λ φ^μ_ν`, `nxi[λ*n+μ] = ∇_λ ξ^μ`, `dxi[λ*n+μ] = ∂_λ ξ^μ`.
pub(crate) struct Sample {
    pub x: Vec<f64>,
    pub n: usize,
    pub g: Vec<f64>,
    pub phi: [Vec<f64>; 3],
    pub xi: [Vec<f64>; 3],
    pub eta: [Vec<f64>; 3],
    pub nphi: [Vec<f64>; 3],
    pub nxi: [Vec<f64>; 3],
    pub dxi: [Vec<f64>; 3],
    /// `R^ρ_{σμν}` at `[ρ, σ, μ, ν]`.
    pub riemann: Vec<f64>,
    /// Largest of `|Γ|²` and `|∂Γ|`: the size of the terms making up the curvature.
    pub curvature_scale: f64,
}

impl Sample {
    pub fn at(s: &MixedThreeStructure, x: &[f64]) -> Result<Sample, SasakiError> {
        let lg = s.manifold.local(x, 1)?;
        let n = s.manifold.dim();
        let mut phi: [Vec<f64>; 3] = Default::default();
        let mut xi: [Vec<f64>; 3] = Default::default();
        let mut eta: [Vec<f64>; 3] = Default::default();
        let mut nphi: [Vec<f64>; 3] = Default::default();
        let mut nxi: [Vec<f64>; 3] = Default::default();
        let mut dxi: [Vec<f64>; 3] = Default::default();
        for a in 0..3 {
            let p = lg.tensor(&s.phi[a])?;
            let v = lg.tensor(&s.xi[a])?;
            phi[a] = p.values();
            xi[a] = v.values();
            eta[a] = lg.tensor(&s.eta[a])?.values();
            nphi[a] = lg.covariant_derivative(&p).values();
            nxi[a] = lg.covariant_derivative(&v).values();
            dxi[a] = (0..n * n).map(|k| v.comps()[k % n].deriv(k / n).value()).collect();
        }
        Ok(Sample {
            x: x.to_vec(),
            n,
            g: lg.metric().values(),
            phi,
            xi,
            eta,
            nphi,
            nxi,
            dxi,
            riemann: lg.riemann().values(),
            curvature_scale: curvature_scale(&lg),
        })
    }

    /// `g(u, v)` with term magnitudes.
    pub fn dot(&self, u: &[f64], v: &[f64]) -> Acc {
        let n = self.n;
        let mut acc = Acc::default();
        for i in 0..n {
            for j in 0..n {
                acc.push(self.g[i * n + j] * u[i] * v[j]);
            }
        }
        acc
    }

    /// `M v` for a flattened `(1,1)` tensor.
    pub fn apply(&self, m: &[f64], v: &[f64]) -> Vec<Acc> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = Acc::default();
                for j in 0..n {
                    acc.push(m[i * n + j] * v[j]);
                }
                acc
            })
            .collect()
    }

    /// `ω ∘ M` for a 1-form `ω`.
    pub fn pull(&self, w: &[f64], m: &[f64]) -> Vec<Acc> {
        let n = self.n;
        (0..n)
            .map(|j| {
                let mut acc = Acc::default();
                for i in 0..n {
                    acc.push(w[i] * m[i * n + j]);
                }
                acc
            })
            .collect()
    }

    /// Matrix product `A B`.
    pub fn compose(&self, a: &[f64], b: &[f64]) -> Vec<Acc> {
        let n = self.n;
        (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let mut acc = Acc::default();
                for l in 0..n {
                    acc.push(a[i * n + l] * b[l * n + j]);
                }
                acc
            })
            .collect()
    }

    /// `R(X, Z) Y = R^ρ_{σμν} Y^σ X^μ Z^ν`.
    pub fn curvature(&self, x: &[f64], z: &[f64], y: &[f64]) -> Vec<Acc> {
        let n = self.n;
        (0..n)
            .map(|rho| {
                let mut acc = Acc::default();
                for sigma in 0..n {
                    for mu in 0..n {
                        for nu in 0..n {
                            let r = self.riemann[((rho * n + sigma) * n + mu) * n + nu];
                            acc.push(r * y[sigma] * x[mu] * z[nu]);
                        }
                    }
                }
                acc.m = acc.m.max(self.curvature_scale * max_norm(x) * max_norm(y) * max_norm(z));
                acc
            })
            .collect()
    }
}

pub(crate) fn curvature_scale(lg: &LocalGeometry) -> f64 {
    let n = lg.dim();
    let mut s = 0.0f64;
    for j in lg.christoffel().comps() {
        s = s.max(j.value() * j.value());
        for i in 0..n {
            s = s.max(j.deriv(i).value().abs());
        }
    }
    s
}

pub(crate) fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

pub(crate) fn basis(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

pub(crate) fn values(v: &[Acc]) -> Vec<f64> {
    v.iter().map(|a| a.v).collect()
}

pub(crate) fn exact(v: &[f64]) -> Vec<Acc> {
    v.iter().map(|x| Acc::of(*x)).collect()
}

/// Samples of every structure tensor at the points chosen by `opts`.
pub(crate) fn samples(s: &MixedThreeStructure, opts: &CheckOptions) -> Result<Vec<Sample>, SasakiError> {
    let points = crate::manifold::sample_points(s.manifold.chart(), opts.points.max(1), opts.seed);
    par_map(&points, |x| Sample::at(s, x))
}

/// The manifold evaluated at sample points only for its curvature.
pub(crate) fn local_all(
    m: &Manifold,
    opts: &CheckOptions,
    order: usize,
) -> Result<Vec<(Vec<f64>, LocalGeometry)>, SasakiError> {
    let points = crate::manifold::sample_points(m.chart(), opts.points.max(1), opts.seed);
    par_map(&points, |x| Ok((x.to_vec(), m.local(x, order)?)))
}
