//! Geodesic integration and conservation of Killing-tensor first integrals.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprkit::{CompiledExprs, Expr, ExprError};
use crate::manifold::{christoffel, lower_index, unflatten, GeometryError, Manifold, TensorField, Variance};

#[derive(Debug, Error)]
pub enum GeodesicError {
    #[error("initial position {0:?} lies outside the domain box")]
    OutsideDomain(Vec<f64>),
    #[error("invalid integrator configuration: {0}")]
    BadConfig(String),
    #[error("state has dimension {found}, manifold has {expected}")]
    WrongDimension { expected: usize, found: usize },
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("invariant must be a vector or a symmetric covariant tensor")]
    BadInvariant,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Position and velocity `ṡ^μ` in chart coordinates at parameter `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub t: f64,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl GeodesicState {
    pub fn new(position: Vec<f64>, velocity: Vec<f64>) -> GeodesicState {
        GeodesicState {
            t: 0.0,
            position,
            velocity,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "method")]
pub enum Method {
    /// Classical fixed-step Runge-Kutta.
    Rk4 { step: f64 },
    /// Dormand-Prince 5(4) with error control on the local step.
    Rk45 { tolerance: f64, initial_step: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_end: f64,
    /// Record every `stride`-th accepted step (the final state is always kept).
    pub stride: usize,
}

impl IntegratorConfig {
    pub fn rk4(step: f64, t_end: f64) -> IntegratorConfig {
        IntegratorConfig {
            method: Method::Rk4 { step },
            t_end,
            stride: 1,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> IntegratorConfig {
        self.stride = stride;
        self
    }

    fn validate(&self) -> Result<(), GeodesicError> {
        let bad = |m: &str| Err(GeodesicError::BadConfig(m.into()));
        match self.method {
            Method::Rk4 { step } if !(step > 0.0) => return bad("step must be positive"),
            Method::Rk45 { tolerance, initial_step } if !(tolerance > 0.0 && initial_step > 0.0) => {
                return bad("tolerance and initial step must be positive")
            }
            _ => {}
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad("t_end must be positive and finite");
        }
        if self.stride == 0 {
            return bad("stride must be at least 1");
        }
        Ok(())
    }
}

/// Sampled geodesic; `exited` marks a path that left the domain box, in
/// which case the samples stop at the last state inside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub coords: Vec<String>,
    pub states: Vec<GeodesicState>,
    pub exited: bool,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &GeodesicState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Right-hand side of the geodesic equation with the nonzero Christoffel
/// symbols compiled to a single tape.
pub struct GeodesicSystem {
    dim: usize,
    terms: Vec<(usize, usize, usize)>,
    gamma: CompiledExprs,
    scratch: Vec<f64>,
    values: Vec<f64>,
}

impl GeodesicSystem {
    pub fn new(m: &Manifold) -> Result<GeodesicSystem, GeodesicError> {
        let n = m.dim();
        let gam = christoffel(m)?;
        let mut terms = Vec::new();
        let mut exprs = Vec::new();
        for (k, e) in gam.components().iter().enumerate() {
            let idx = unflatten(k, n, 3);
            // Γ^ρ_{μν} is symmetric in μν; fold the pair into one term
            if e.is_zero() || idx[1] > idx[2] {
                continue;
            }
            let e = if idx[1] == idx[2] { e.clone() } else { Expr::int(2) * e.clone() };
            terms.push((idx[0], idx[1], idx[2]));
            exprs.push(e);
        }
        let gamma = CompiledExprs::new(&exprs, m.chart().coords(), m.params())?;
        Ok(GeodesicSystem {
            dim: n,
            values: vec![0.0; terms.len()],
            terms,
            gamma,
            scratch: Vec::new(),
        })
    }

    /// Acceleration `−Γ^ρ_{μν} ẋ^μ ẋ^ν` at `(x, v)`.
    pub fn acceleration(&mut self, x: &[f64], v: &[f64]) -> Result<Vec<f64>, GeodesicError> {
        self.gamma.eval_into(x, &mut self.scratch, &mut self.values)?;
        let mut a = vec![0.0; self.dim];
        for ((r, mu, nu), g) in self.terms.iter().zip(&self.values) {
            a[*r] -= g * v[*mu] * v[*nu];
        }
        Ok(a)
    }

    // derivative of the first-order state y = (x, v)
    fn rhs(&mut self, y: &[f64]) -> Result<Vec<f64>, GeodesicError> {
        let (x, v) = y.split_at(self.dim);
        let mut out = v.to_vec();
        out.extend(self.acceleration(x, v)?);
        Ok(out)
    }
}

fn axpy(y: &[f64], h: f64, ks: &[(&[f64], f64)]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (k, c) in ks {
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += h * c * ki;
        }
    }
    out
}

// Returns the increment rather than the new state so the caller can apply
// it with compensated summation.
fn rk4_increment(sys: &mut GeodesicSystem, y: &[f64], h: f64) -> Result<Vec<f64>, GeodesicError> {
    let k1 = sys.rhs(y)?;
    let k2 = sys.rhs(&axpy(y, h, &[(&k1, 0.5)]))?;
    let k3 = sys.rhs(&axpy(y, h, &[(&k2, 0.5)]))?;
    let k4 = sys.rhs(&axpy(y, h, &[(&k3, 1.0)]))?;
    Ok((0..y.len())
        .map(|i| h * ((k1[i] + k4[i]) + 2.0 * (k2[i] + k3[i])) / 6.0)
        .collect())
}

// Kahan summation of `dy` into `y`, carrying the lost low-order bits in `comp`.
fn compensated_add(y: &[f64], comp: &mut [f64], dy: &[f64]) -> Vec<f64> {
    y.iter()
        .zip(comp.iter_mut())
        .zip(dy)
        .map(|((yi, ci), di)| {
            let d = di - *ci;
            let t = yi + d;
            *ci = (t - yi) - d;
            t
        })
        .collect()
}

// Dormand-Prince tableau; returns the fifth-order solution and an error estimate.
fn dopri_step(sys: &mut GeodesicSystem, y: &[f64], h: f64) -> Result<(Vec<f64>, f64), GeodesicError> {
    let k1 = sys.rhs(y)?;
    let k2 = sys.rhs(&axpy(y, h, &[(&k1, 1.0 / 5.0)]))?;
    let k3 = sys.rhs(&axpy(y, h, &[(&k1, 3.0 / 40.0), (&k2, 9.0 / 40.0)]))?;
    let k4 = sys.rhs(&axpy(y, h, &[(&k1, 44.0 / 45.0), (&k2, -56.0 / 15.0), (&k3, 32.0 / 9.0)]))?;
    let k5 = sys.rhs(&axpy(
        y,
        h,
        &[(&k1, 19372.0 / 6561.0), (&k2, -25360.0 / 2187.0), (&k3, 64448.0 / 6561.0), (&k4, -212.0 / 729.0)],
    ))?;
    let k6 = sys.rhs(&axpy(
        y,
        h,
        &[
            (&k1, 9017.0 / 3168.0),
            (&k2, -355.0 / 33.0),
            (&k3, 46732.0 / 5247.0),
            (&k4, 49.0 / 176.0),
            (&k5, -5103.0 / 18656.0),
        ],
    ))?;
    let y5 = axpy(
        y,
        h,
        &[
            (&k1, 35.0 / 384.0),
            (&k3, 500.0 / 1113.0),
            (&k4, 125.0 / 192.0),
            (&k5, -2187.0 / 6784.0),
            (&k6, 11.0 / 84.0),
        ],
    );
    let k7 = sys.rhs(&y5)?;
    let e = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let ks = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
    let err = (0..y.len())
        .map(|i| {
            let d: f64 = ks.iter().zip(e).map(|(k, c)| c * k[i]).sum::<f64>() * h;
            (d / (1.0 + y[i].abs().max(y5[i].abs()))).abs()
        })
        .fold(0.0, f64::max);
    Ok((y5, err))
}

/// Integrates `ẍ^ρ + Γ^ρ_{μν} ẋ^μ ẋ^ν = 0` from `s0` up to `cfg.t_end`.
pub fn integrate(m: &Manifold, s0: &GeodesicState, cfg: &IntegratorConfig) -> Result<Trajectory, GeodesicError> {
    let mut sys = GeodesicSystem::new(m)?;
    integrate_with(&mut sys, m, s0, cfg)
}

/// As [`integrate`], reusing a compiled system.
pub fn integrate_with(
    sys: &mut GeodesicSystem,
    m: &Manifold,
    s0: &GeodesicState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, GeodesicError> {
    cfg.validate()?;
    let n = m.dim();
    for len in [s0.position.len(), s0.velocity.len()] {
        if len != n {
            return Err(GeodesicError::WrongDimension { expected: n, found: len });
        }
    }
    let chart = m.chart();
    if !chart.contains(&s0.position) {
        return Err(GeodesicError::OutsideDomain(s0.position.clone()));
    }
    let mut traj = Trajectory {
        coords: chart.coords().to_vec(),
        states: vec![s0.clone()],
        exited: false,
        steps: 0,
    };
    let mut y: Vec<f64> = s0.position.iter().chain(&s0.velocity).copied().collect();
    let mut t = s0.t;
    let t_end = s0.t + cfg.t_end;
    let mut h = match cfg.method {
        Method::Rk4 { step } => step,
        Method::Rk45 { initial_step, .. } => initial_step,
    };
    let eps = 1e-12 * cfg.t_end;
    let mut last_recorded = 0;
    let mut comp = vec![0.0; 2 * n];
    while t < t_end - eps {
        let step = h.min(t_end - t);
        let next = match cfg.method {
            Method::Rk4 { .. } => {
                let dy = rk4_increment(sys, &y, step)?;
                let mut c = comp.clone();
                let next = compensated_add(&y, &mut c, &dy);
                if chart.contains(&next[..n]) {
                    comp = c;
                }
                next
            }
            Method::Rk45 { tolerance, .. } => {
                let (next, err) = dopri_step(sys, &y, step)?;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * (tolerance / err).powf(0.2)).clamp(0.2, 5.0) };
                if err > tolerance {
                    h = step * factor;
                    if h < 1e-14 * cfg.t_end.max(1.0) {
                        return Err(GeodesicError::StepUnderflow(t));
                    }
                    continue;
                }
                h = step * factor;
                next
            }
        };
        if !chart.contains(&next[..n]) || next.iter().any(|v| !v.is_finite()) {
            traj.exited = true;
            break;
        }
        y = next;
        t += step;
        traj.steps += 1;
        if traj.steps % cfg.stride == 0 || t >= t_end - eps {
            traj.states.push(GeodesicState {
                t,
                position: y[..n].to_vec(),
                velocity: y[n..].to_vec(),
            });
            last_recorded = traj.steps;
        }
    }
    if traj.exited && last_recorded != traj.steps {
        traj.states.push(GeodesicState {
            t,
            position: y[..n].to_vec(),
            velocity: y[n..].to_vec(),
        });
    }
    Ok(traj)
}

/// Integrates several initial states in parallel.
pub fn integrate_many(
    m: &Manifold,
    starts: &[GeodesicState],
    cfg: &IntegratorConfig,
) -> Vec<Result<Trajectory, GeodesicError>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = starts.iter().map(|s0| s.spawn(move || integrate(m, s0, cfg))).collect();
        handles.into_iter().map(|h| h.join().expect("integration thread panicked")).collect()
    })
}

/// A first integral `Q = K_{μ1…μr} ṡ^{μ1}⋯ṡ^{μr}` compiled for evaluation.
pub struct Invariant {
    pub name: String,
    rank: usize,
    dim: usize,
    components: CompiledExprs,
}

impl Invariant {
    /// Accepts a vector field (lowered with the metric) or a symmetric
    /// covariant tensor.
    pub fn new(name: &str, q: &TensorField, m: &Manifold) -> Result<Invariant, GeodesicError> {
        let low = match q.variance() {
            [Variance::Up] => lower_index(q, 0, m)?,
            v if !v.is_empty() && v.iter().all(|x| *x == Variance::Down) => q.clone(),
            _ => return Err(GeodesicError::BadInvariant),
        };
        if low.dim() != m.dim() {
            return Err(GeodesicError::BadInvariant);
        }
        Ok(Invariant {
            name: name.to_string(),
            rank: low.rank(),
            dim: low.dim(),
            components: CompiledExprs::new(low.components(), m.chart().coords(), m.params())?,
        })
    }

    /// The energy `g_{μν} ṡ^μ ṡ^ν`.
    pub fn energy(m: &Manifold) -> Result<Invariant, GeodesicError> {
        Invariant::new("energy", &m.metric_tensor(), m)
    }

    pub fn value(&self, s: &GeodesicState) -> Result<f64, GeodesicError> {
        let k = self.components.eval(&s.position)?;
        Ok(k.iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| c * unflatten(i, self.dim, self.rank).iter().map(|&a| s.velocity[a]).product::<f64>())
            .sum())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub invariant: String,
    pub initial: f64,
    pub max_drift: f64,
    /// `max |Q(t) − Q(0)| / max(1, |Q(0)|)`.
    pub relative_drift: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Evaluates `q` along the trajectory and reports its drift.
pub fn monitor_invariant(traj: &Trajectory, q: &Invariant, tol: f64) -> Result<ConservationReport, GeodesicError> {
    let values = traj.states.iter().map(|s| q.value(s)).collect::<Result<Vec<_>, _>>()?;
    let q0 = values[0];
    let max_drift = values.iter().map(|v| (v - q0).abs()).fold(0.0, f64::max);
    let relative_drift = max_drift / q0.abs().max(1.0);
    Ok(ConservationReport {
        invariant: q.name.clone(),
        initial: q0,
        max_drift,
        relative_drift,
        tolerance: tol,
        samples: values.len(),
        pass: relative_drift < tol,
    })
}

/// Writes `t`, coordinates, velocities and each invariant as CSV columns.
pub fn write_csv<W: Write>(traj: &Trajectory, invariants: &[&Invariant], out: W) -> Result<(), GeodesicError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(traj.coords.iter().cloned());
    header.extend(traj.coords.iter().map(|c| format!("d{c}")));
    header.extend(invariants.iter().map(|q| q.name.clone()));
    w.write_record(&header)?;
    for s in &traj.states {
        let mut row = vec![s.t];
        row.extend(&s.position);
        row.extend(&s.velocity);
        for q in invariants {
            row.push(q.value(s)?);
        }
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}
