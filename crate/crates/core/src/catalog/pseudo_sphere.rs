use std::f64::consts::PI;

use super::{ex, expect, CatalogEntry, CatalogError, CheckKind};
use crate::exprkit::{Expr, ParamEnv};
use crate::manifold::{Chart, Manifold, TensorField};
use crate::sasaki::{endomorphism, one_form, MixedThreeStructure};

const CH: &str = "((exp(rho) + exp(-rho))/2)";
const SH: &str = "((exp(rho) - exp(-rho))/2)";

fn e(src: &str) -> Expr {
    ex(&src.replace("ch", CH).replace("sh", SH).replace("S", "sin(a + b)").replace("C", "cos(a + b)"), &[])
}

fn row(srcs: [&str; 3]) -> Vec<Expr> {
    srcs.iter().map(|s| e(s)).collect()
}

/// The pseudo-sphere `x·x = 1` in `R^{2,2}`, `η = diag(1, 1, -1, -1)`, in the chart
/// `x = (cosh ρ cos a, cosh ρ sin a, sinh ρ cos b, sinh ρ sin b)`.
///
/// The mixed 3-structure is induced by the constant ambient structures
/// `J_1` (complex) and `J_2`, `J_3 = J_2 J_1` (para-complex), all skew for `η`:
/// `ξ_α = J_α x`, `η_α = g(ξ_α, ·)` and `φ_α X = tan(J_α X) = ∇_X ξ_α`.
pub fn pseudo_sphere_fixture() -> Result<CatalogEntry, CatalogError> {
    let chart = Chart::new(&["rho", "a", "b"], &[(0.3, 2.0), (0.1, 2.0 * PI - 0.1), (0.1, 2.0 * PI - 0.1)])?;
    let z = Expr::zero;
    let metric = vec![
        vec![Expr::int(-1), z(), z()],
        vec![z(), e("ch^2"), z()],
        vec![z(), z(), e("-sh^2")],
    ];
    let manifold = Manifold::new("pseudo-sphere", chart, metric, ParamEnv::default(), vec![1, -1, -1])?;
    let xi = [
        row(["0", "-1", "-1"]),
        row(["C", "-S*sh/ch", "-S*ch/sh"]),
        row(["S", "C*sh/ch", "C*ch/sh"]),
    ];
    let eta = [
        row(["0", "-ch^2", "sh^2"]),
        row(["-C", "-S*sh*ch", "S*sh*ch"]),
        row(["-S", "C*sh*ch", "-C*sh*ch"]),
    ];
    let phi = [
        vec![row(["0", "-sh*ch", "sh*ch"]), row(["-sh/ch", "0", "0"]), row(["-ch/sh", "0", "0"])],
        vec![row(["0", "-S*ch^2", "S*sh^2"]), row(["-S", "0", "-C*sh/ch"]), row(["-S", "-C*ch/sh", "0"])],
        vec![row(["0", "C*ch^2", "-C*sh^2"]), row(["C", "0", "-S*sh/ch"]), row(["C", "-S*ch/sh", "0"])],
    ];
    let structure = MixedThreeStructure::new(
        manifold.clone(),
        phi.map(endomorphism),
        xi.clone().map(TensorField::vector),
        eta.clone().map(one_form),
    )
    .map_err(|err| CatalogError::Structure(err.to_string()))?;
    let mut entry = CatalogEntry::bare(manifold);
    for a in 0..3 {
        let name = a + 1;
        entry.vectors.push((format!("xi{name}"), structure.xi[a].clone()));
        let form = TensorField::form(3, 1, &(0..3).map(|i| (vec![i], eta[a][i].clone())).collect::<Vec<_>>());
        entry.forms.push((format!("eta{name}"), form));
        entry.tensors.push((format!("phi{name}"), structure.phi[a].clone()));
        entry.manifest.push(expect(CheckKind::KillingVector, &format!("xi{name}"), true));
        entry.manifest.push(expect(CheckKind::Cky, &format!("eta{name}"), true));
        entry.manifest.push(expect(CheckKind::Ky, &format!("eta{name}"), true));
    }
    entry.vectors.push(("d_rho".into(), TensorField::vector(vec![Expr::one(), z(), z()])));
    use CheckKind::*;
    entry.manifest.extend([
        expect(KillingVector, "d_rho", false),
        expect(SasakiVerify, "structure", true),
        // the α = 1 Sasakian equation and φ_1 = −∇ξ_1 conflict with the cone formula
        expect(SasakiVerify, "sasakian", false),
        expect(SasakiVerify, "killing-triple", false),
        expect(SasakiVerify, "curvature", true),
        expect(SasakiVerify, "sectional", true),
        expect(SasakiEinstein, "base", true),
        expect(SasakiEinstein, "cone", true),
        expect(SasakiCone, "para-hyperkahler", true),
        expect(SasakiCone, "round-trip", false),
        expect(SasakiWitness, "phi", true),
    ]);
    entry
        .metadata
        .insert("ambient".into(), "R^{2,2}, eta = diag(1,1,-1,-1), J3 = J2 J1".into());
    entry.structure = Some(structure);
    Ok(entry)
}
