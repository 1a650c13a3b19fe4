use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::KillingError;
use crate::manifold::{sample_points, LocalGeometry, Manifold};

/// Sampling and tolerance settings shared by all pointwise checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            points: 20,
            seed: 0,
            tol: 1e-9,
        }
    }
}

/// Outcome of one residual check over a sample of points.
///
/// The relative residual at a point is the absolute residual divided by the
/// largest magnitude among the individual terms of the identity there;
/// `pass` holds exactly when the worst relative residual is below `tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub check: String,
    pub target: String,
    pub tolerance: f64,
    pub points: usize,
    pub seed: u64,
    pub max_residual: f64,
    pub max_relative_residual: f64,
    pub pass: bool,
    pub worst_point: Vec<f64>,
    #[serde(default)]
    pub extra: Map<String, Value>,
}

impl ResidualReport {
    pub fn new(check: &str, target: &str, opts: &CheckOptions) -> ResidualReport {
        ResidualReport {
            check: check.to_string(),
            target: target.to_string(),
            tolerance: opts.tol,
            points: 0,
            seed: opts.seed,
            max_residual: 0.0,
            max_relative_residual: 0.0,
            pass: true,
            worst_point: Vec::new(),
            extra: Map::new(),
        }
    }

    /// Folds in the residual at one point.
    pub fn record(&mut self, x: &[f64], residual: f64, scale: f64) {
        let rel = relative(residual, scale);
        self.points += 1;
        self.max_residual = self.max_residual.max(residual);
        if rel > self.max_relative_residual || self.worst_point.is_empty() || rel.is_nan() {
            self.max_relative_residual = if rel.is_nan() { f64::INFINITY } else { rel };
            self.worst_point = x.to_vec();
        }
        self.pass = self.max_relative_residual < self.tolerance;
    }

    pub fn with_extra(mut self, key: &str, value: impl Into<Value>) -> ResidualReport {
        self.extra.insert(key.to_string(), value.into());
        self
    }

    pub fn set_extra(&mut self, key: &str, value: impl Into<Value>) {
        self.extra.insert(key.to_string(), value.into());
    }
}

pub fn relative(residual: f64, scale: f64) -> f64 {
    if residual == 0.0 {
        0.0
    } else if scale > 0.0 {
        residual / scale
    } else {
        f64::INFINITY
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Runs `f` at every sample point; `f` returns `(absolute residual, scale)`.
pub(crate) fn pointwise<F>(
    check: &str,
    target: &str,
    m: &Manifold,
    opts: &CheckOptions,
    order: usize,
    mut f: F,
) -> Result<ResidualReport, KillingError>
where
    F: FnMut(&LocalGeometry, &mut ResidualReport) -> Result<(f64, f64), KillingError>,
{
    let mut report = ResidualReport::new(check, target, opts);
    for x in sample_points(m.chart(), opts.points.max(1), opts.seed) {
        let lg = m.local(&x, order)?;
        let (res, scale) = f(&lg, &mut report)?;
        report.record(&x, res, scale);
    }
    Ok(report)
}
