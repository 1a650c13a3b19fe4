use serde_json::{json, Value};

use super::CliError;
use crate::catalog::{CatalogEntry, CheckKind};
use crate::geodesic::{integrate, monitor_invariant, GeodesicState, IntegratorConfig, Invariant};
use crate::killing::{
    associated_sk, cky_residual, covariant_constancy_residual, killing_vector_residual, ky_residual,
    quaternion_relations_check, sk_residual, unit_root_check, CheckOptions, KillingError, ResidualReport,
};
use crate::manifold::{Symmetry, TensorField, Variance};
use crate::sasaki::{
    build_cone, curvature_characterization, einstein_check, einstein_residual, killing_triple_check,
    para_hyperkahler_check, phi_not_killing_witness, round_trip_check, sasakian_residuals,
    sectional_curvature_check, structure_identity_suite, MixedThreeStructure, SasakiError,
};
use crate::spin::{
    anticommutator_residual, commutator_residual, orthonormal_frame, spinor_bank, square_compare, OperatorSpec,
    SpinContext, SpinError,
};

impl From<KillingError> for CliError {
    fn from(e: KillingError) -> CliError {
        match e {
            KillingError::Geometry(g) => CliError::Internal(g.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SasakiError> for CliError {
    fn from(e: SasakiError) -> CliError {
        match e {
            SasakiError::Killing(k) => k.into(),
            SasakiError::Geometry(g) => CliError::Internal(g.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SpinError> for CliError {
    fn from(e: SpinError) -> CliError {
        match e {
            SpinError::Payload(_) | SpinError::SpinorSize { .. } | SpinError::Frame(_) => CliError::Input(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

/// Tags a report with its check kind, target and manifest expectation.
/// Without a manifest entry the check is expected to pass.
pub fn tag(entry: &CatalogEntry, kind: CheckKind, target: &str, mut r: ResidualReport) -> ResidualReport {
    let expected = entry
        .manifest
        .iter()
        .find(|e| e.check == kind && e.target == target)
        .is_none_or(|e| e.pass);
    r.check = kind.name().to_string();
    r.target = target.to_string();
    r.set_extra("manifold", entry.manifold.name());
    r.set_extra("expected", expected);
    r
}

/// Whether a tagged report meets its expectation.
pub fn as_expected(r: &ResidualReport) -> bool {
    r.extra.get("expected").and_then(Value::as_bool).unwrap_or(true) == r.pass
}

fn field<'a>(entry: &'a CatalogEntry, name: &str) -> Result<&'a TensorField, CliError> {
    entry
        .field(name)
        .ok_or_else(|| CliError::Input(format!("{} has no field `{name}`", entry.manifold.name())))
}

fn structure(entry: &CatalogEntry) -> Result<&MixedThreeStructure, CliError> {
    entry
        .structure
        .as_ref()
        .ok_or_else(|| CliError::Input(format!("{} has no mixed 3-structure", entry.manifold.name())))
}

/// A named field viewed as a symmetric covariant tensor: forms give their
/// associated tensor, symmetric tensors are used as they are.
fn symmetric_target(entry: &CatalogEntry, name: &str) -> Result<TensorField, CliError> {
    let f = field(entry, name)?;
    if f.symmetry() == Symmetry::Antisymmetric {
        return Ok(associated_sk(f, &entry.manifold)?);
    }
    Ok(f.clone())
}

/// Runs one manifest-style check on `target`.
pub fn run_check(
    entry: &CatalogEntry,
    kind: CheckKind,
    target: &str,
    opts: &CheckOptions,
) -> Result<Vec<ResidualReport>, CliError> {
    let m = &entry.manifold;
    let one = |r: ResidualReport| Ok(vec![tag(entry, kind, target, r)]);
    match kind {
        CheckKind::KillingVector => one(killing_vector_residual(field(entry, target)?, m, opts)?),
        CheckKind::Cky => one(cky_residual(field(entry, target)?, m, opts)?),
        CheckKind::Ky => one(ky_residual(field(entry, target)?, m, opts)?),
        CheckKind::Sk => one(sk_residual(&symmetric_target(entry, target)?, m, opts)?),
        CheckKind::Covconst => one(covariant_constancy_residual(field(entry, target)?, m, opts)?),
        CheckKind::UnitRoot => {
            let (r, scale) = unit_root_check(field(entry, target)?, m, opts)?;
            one(r.with_extra("normalization", scale))
        }
        CheckKind::Quaternion => {
            let names: Vec<&str> = target.split(',').map(str::trim).collect();
            let [a, b, c] = names.as_slice() else {
                return Err(CliError::Input(format!("quaternion target needs three forms, got `{target}`")));
            };
            one(quaternion_relations_check([field(entry, a)?, field(entry, b)?, field(entry, c)?], m, opts)?)
        }
        CheckKind::AssocSk => {
            let f = field(entry, target)?;
            if f.symmetry() != Symmetry::Antisymmetric {
                return Err(CliError::Input(format!("`{target}` is not a form")));
            }
            one(sk_residual(&associated_sk(f, m)?, m, opts)?)
        }
        CheckKind::SpinAnticommute | CheckKind::SpinCommute | CheckKind::SpinSquare => {
            spin_check(entry, kind, target, opts, 5).map(|r| vec![r])
        }
        CheckKind::SasakiVerify | CheckKind::SasakiCone | CheckKind::SasakiEinstein | CheckKind::SasakiWitness => {
            sasaki_check(entry, kind, Some(target), opts)
        }
    }
}

/// Runs a spinor operator identity with a bank of `spinors` test spinors.
pub fn spin_check(
    entry: &CatalogEntry,
    kind: CheckKind,
    target: &str,
    opts: &CheckOptions,
    spinors: usize,
) -> Result<ResidualReport, CliError> {
    let m = &entry.manifold;
    let frame = orthonormal_frame(m, entry.frame.as_deref())?;
    let ctx = SpinContext::new(m, frame);
    let bank = spinor_bank(m.chart(), ctx.spinor_size(), spinors, opts.seed);
    let f = field(entry, target)?.clone();
    let r = match kind {
        CheckKind::SpinAnticommute => {
            anticommutator_residual(&ctx, &OperatorSpec::StandardDirac, &OperatorSpec::DiracType(f), &bank, opts)?
        }
        CheckKind::SpinCommute => {
            commutator_residual(&ctx, &OperatorSpec::StandardDirac, &OperatorSpec::KillingOp(f), &bank, opts)?
        }
        CheckKind::SpinSquare => square_compare(&ctx, &OperatorSpec::DiracType(f), &bank, opts)?,
        other => return Err(CliError::Internal(format!("{} is not a spin check", other.name()))),
    };
    Ok(tag(entry, kind, target, r.with_extra("spinors", spinors)))
}

/// Sub-targets of each structure-level check.
pub fn sasaki_targets(kind: CheckKind) -> &'static [&'static str] {
    match kind {
        CheckKind::SasakiVerify => &["structure", "sasakian", "killing-triple", "curvature", "sectional"],
        CheckKind::SasakiEinstein => &["base", "cone"],
        CheckKind::SasakiCone => &["para-hyperkahler", "round-trip"],
        CheckKind::SasakiWitness => &["phi"],
        _ => &[],
    }
}

/// Runs the structure checks of `kind`, all sub-targets unless one is named.
pub fn sasaki_check(
    entry: &CatalogEntry,
    kind: CheckKind,
    only: Option<&str>,
    opts: &CheckOptions,
) -> Result<Vec<ResidualReport>, CliError> {
    let s = structure(entry)?;
    let targets = sasaki_targets(kind);
    if let Some(t) = only {
        if !targets.contains(&t) {
            return Err(CliError::Input(format!("{} has no target `{t}` (known: {})", kind.name(), targets.join(", "))));
        }
    }
    let mut out = Vec::new();
    for &t in targets.iter().filter(|t| only.is_none_or(|o| o == **t)) {
        let r = match (kind, t) {
            (CheckKind::SasakiVerify, "structure") => structure_identity_suite(s, opts)?,
            (CheckKind::SasakiVerify, "sasakian") => sasakian_residuals(s, opts)?,
            (CheckKind::SasakiVerify, "killing-triple") => killing_triple_check(s, opts)?,
            (CheckKind::SasakiVerify, "curvature") => curvature_characterization(s, opts)?,
            (CheckKind::SasakiVerify, "sectional") => sectional_curvature_check(s, opts)?,
            (CheckKind::SasakiEinstein, "base") => einstein_check(s, opts)?,
            (CheckKind::SasakiEinstein, "cone") => {
                let cone = build_cone(s)?;
                einstein_residual(&cone.manifold, 0.0, opts)?
            }
            (CheckKind::SasakiCone, "para-hyperkahler") => para_hyperkahler_check(&build_cone(s)?, opts)?,
            (CheckKind::SasakiCone, "round-trip") => round_trip_check(s, opts)?,
            (CheckKind::SasakiWitness, "phi") => witness_report(s, opts)?,
            _ => unreachable!("target list and dispatch agree"),
        };
        out.push(tag(entry, kind, t, r));
    }
    Ok(out)
}

fn witness_report(s: &MixedThreeStructure, opts: &CheckOptions) -> Result<ResidualReport, CliError> {
    let mut r = ResidualReport::new("sasaki-witness", s.manifold.name(), opts);
    match phi_not_killing_witness(s, opts) {
        Ok(w) => {
            r.pass = w.pass;
            r.points = w.candidates;
            r.max_relative_residual = w.witnesses.iter().map(|x| x.prediction_residual).fold(0.0, f64::max);
            r.set_extra("witnesses", serde_json::to_value(&w.witnesses).expect("witness serializes"));
            r.set_extra("lightlike_excluded", w.lightlike_excluded);
        }
        Err(SasakiError::NoWitness(alpha)) => {
            r.pass = false;
            r.set_extra("missing_alpha", alpha);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(r)
}

/// Geodesic run settings.
#[derive(Clone, Debug)]
pub struct GeodesicRun {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub step: f64,
    pub t_end: f64,
    pub invariants: Vec<String>,
    pub tol: f64,
}

/// Integrates one geodesic and reports the drift of the energy and of each
/// named invariant (vectors, symmetric tensors, or forms via their associated tensor).
pub fn geodesic_run(
    entry: &CatalogEntry,
    run: &GeodesicRun,
    csv: Option<&mut dyn std::io::Write>,
) -> Result<Vec<ResidualReport>, CliError> {
    let m = &entry.manifold;
    let n = m.dim();
    if run.position.len() != n || run.velocity.len() != n {
        return Err(CliError::Input(format!("initial position and velocity need {n} components")));
    }
    let internal = |e: crate::geodesic::GeodesicError| CliError::Internal(e.to_string());
    let mut invariants = vec![Invariant::energy(m).map_err(internal)?];
    for name in &run.invariants {
        let f = field(entry, name)?;
        let q = if f.variance() == [Variance::Up] { f.clone() } else { symmetric_target(entry, name)? };
        invariants.push(Invariant::new(name, &q, m).map_err(|e| CliError::Input(format!("{name}: {e}")))?);
    }
    let traj = integrate(m, &GeodesicState::new(run.position.clone(), run.velocity.clone()), &IntegratorConfig::rk4(run.step, run.t_end))
        .map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(w) = csv {
        crate::geodesic::write_csv(&traj, &invariants.iter().collect::<Vec<_>>(), w).map_err(internal)?;
    }
    let opts = CheckOptions {
        points: traj.states.len(),
        seed: 0,
        tol: run.tol,
    };
    let mut out = Vec::new();
    for q in &invariants {
        let c = monitor_invariant(&traj, q, run.tol).map_err(internal)?;
        let mut r = ResidualReport::new("geodesic-conservation", &q.name, &opts);
        r.points = c.samples;
        r.max_residual = c.max_drift;
        r.max_relative_residual = c.relative_drift;
        r.pass = c.pass && !traj.exited;
        r.worst_point = traj.last().position.clone();
        r.extra.insert("initial".into(), json!(c.initial));
        r.extra.insert("steps".into(), json!(traj.steps));
        r.extra.insert("exited_chart".into(), json!(traj.exited));
        r.extra.insert("manifold".into(), json!(m.name()));
        out.push(r);
    }
    Ok(out)
}
