//! Metric mixed 3-structures, their Sasakian conditions, the metric cone and
//! the corollaries that follow on a verified structure.

mod checks;
mod cone;
mod sample;

use serde_json::Value;
use thiserror::Error;

use crate::exprkit::{simplify, Expr};
use crate::killing::{KillingError, ResidualReport};
use crate::manifold::{GeometryError, Manifold, TensorField, Variance};

pub use checks::{
    conformal_to_killing_check, curvature_characterization, einstein_check, einstein_residual,
    killing_triple_check, ky_odd_rank_check, ky_odd_rank_form, phi_not_killing_witness, sasakian_residuals,
    sectional_curvature_check, structure_identity_suite, wedge, ConformalOutcome, ConformalReport, Witness,
    WitnessReport,
};
pub use cone::{
    build_cone, para_hyperkahler_check, para_hyperkahler_residual, reverse_cone, round_trip_check, ConeManifold,
    RADIAL_DOMAIN,
};

#[derive(Debug, Error)]
pub enum SasakiError {
    #[error("dimension {0} is not of the form 4n+3")]
    Dimension(usize),
    #[error("signature has {positive} positive and {negative} negative entries, expected ({expected_pos}, {expected_neg})")]
    Signature {
        positive: usize,
        negative: usize,
        expected_pos: usize,
        expected_neg: usize,
    },
    #[error("structure tensor {0} has the wrong shape")]
    Shape(String),
    #[error("degenerate construction: {0}")]
    Degenerate(String),
    #[error("no non-lightlike witness X with (∇_X φ_{0}) X ≠ 0 was found")]
    NoWitness(usize),
    #[error("cone is not para-hyper-Kähler (worst relative residual {0:e})")]
    ConeCheck(f64),
    #[error(transparent)]
    Killing(#[from] KillingError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `(φ_α, ξ_α, η_α)` for α = 1, 2, 3 on a manifold of dimension `4n+3`,
/// with `ε = (1, −1, −1)`. Index 0 of each array is α = 1.
///
/// `φ_α` has variance `[Up, Down]` (`φ^μ_ν`), `ξ_α` is a vector and `η_α` a 1-form.
#[derive(Clone, Debug)]
pub struct MixedThreeStructure {
    pub manifold: Manifold,
    pub phi: [TensorField; 3],
    pub xi: [TensorField; 3],
    pub eta: [TensorField; 3],
}

/// `ε_α` for α = 1, 2, 3.
pub const EPSILON: [f64; 3] = [1.0, -1.0, -1.0];

/// Even permutations `(α, β, γ)` of `(0, 1, 2)`.
pub(crate) const EVEN: [(usize, usize, usize); 3] = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];

impl MixedThreeStructure {
    /// Validates shapes, the dimension `4n+3` and the signature `(2n+1, 2n+2)`.
    pub fn new(
        manifold: Manifold,
        phi: [TensorField; 3],
        xi: [TensorField; 3],
        eta: [TensorField; 3],
    ) -> Result<MixedThreeStructure, SasakiError> {
        let d = manifold.dim();
        if d < 3 || (d - 3) % 4 != 0 {
            return Err(SasakiError::Dimension(d));
        }
        let n = (d - 3) / 4;
        let positive = manifold.signature().iter().filter(|s| **s > 0).count();
        let negative = d - positive;
        if positive != 2 * n + 1 {
            return Err(SasakiError::Signature {
                positive,
                negative,
                expected_pos: 2 * n + 1,
                expected_neg: 2 * n + 2,
            });
        }
        for a in 0..3 {
            let ok = phi[a].variance() == [Variance::Up, Variance::Down] && phi[a].dim() == d;
            if !ok {
                return Err(SasakiError::Shape(format!("phi{}", a + 1)));
            }
            if xi[a].variance() != [Variance::Up] || xi[a].dim() != d {
                return Err(SasakiError::Shape(format!("xi{}", a + 1)));
            }
            if eta[a].variance() != [Variance::Down] || eta[a].dim() != d {
                return Err(SasakiError::Shape(format!("eta{}", a + 1)));
            }
        }
        Ok(MixedThreeStructure { manifold, phi, xi, eta })
    }

    /// The `n` in `dim = 4n + 3`.
    pub fn n(&self) -> usize {
        (self.manifold.dim() - 3) / 4
    }

    /// The same structure with `φ_α` replaced by `s·φ_α`.
    pub fn with_phi_scaled(&self, alpha: usize, s: i64) -> MixedThreeStructure {
        let mut out = self.clone();
        out.phi[alpha] = out.phi[alpha].map(|e| simplify(&(Expr::int(s) * e.clone())));
        out
    }

    /// The same structure with `ξ_α` replaced by `s·ξ_α` (η untouched).
    pub fn with_xi_scaled(&self, alpha: usize, s: i64) -> MixedThreeStructure {
        let mut out = self.clone();
        out.xi[alpha] = out.xi[alpha].map(|e| simplify(&(Expr::int(s) * e.clone())));
        out
    }
}

/// Builds a 1-form field from its components.
pub fn one_form(components: Vec<Expr>) -> TensorField {
    let n = components.len();
    TensorField::new(n, vec![Variance::Down], crate::manifold::Symmetry::None, components)
        .expect("one component per coordinate")
}

/// Builds a `(1,1)` tensor `φ^μ_ν` from rows indexed by `μ`.
pub fn endomorphism(rows: Vec<Vec<Expr>>) -> TensorField {
    let n = rows.len();
    TensorField::from_fn(n, vec![Variance::Up, Variance::Down], crate::manifold::Symmetry::None, |idx| {
        rows[idx[0]][idx[1]].clone()
    })
}

/// A named sub-result stored inside an aggregated report.
pub fn subcheck(report: &ResidualReport, name: &str) -> Option<ResidualReport> {
    let parts = report.extra.get("subchecks")?.as_object()?;
    serde_json::from_value(parts.get(name)?.clone()).ok()
}

/// Names of all sub-results, sorted.
pub fn subcheck_names(report: &ResidualReport) -> Vec<String> {
    match report.extra.get("subchecks") {
        Some(Value::Object(m)) => m.keys().cloned().collect(),
        _ => Vec::new(),
    }
}
