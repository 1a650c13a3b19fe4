//! Built-in geometries with their symmetry objects and expected check outcomes.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprkit::{parse_with_params, simplify, Expr, ParamEnv};
use crate::manifold::{Chart, GeometryError, Manifold, Symmetry, TensorField, Variance};

mod pseudo_sphere;

pub use pseudo_sphere::pseudo_sphere_fixture;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("Taub-NUT parameter m must be positive, got {0}")]
    NonPositiveMass(f64),
    #[error("flat space needs n >= 2 and a signature of length n")]
    BadFlat,
    #[error("unknown catalog entry `{0}`")]
    Unknown(String),
    #[error("mixed 3-structure rejected: {0}")]
    Structure(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Checks a manifest can request.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    KillingVector,
    Cky,
    Ky,
    Sk,
    Covconst,
    UnitRoot,
    Quaternion,
    AssocSk,
    SasakiVerify,
    SasakiCone,
    SasakiEinstein,
    SasakiWitness,
    SpinAnticommute,
    SpinCommute,
    SpinSquare,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::KillingVector => "killing-vector",
            CheckKind::Cky => "cky",
            CheckKind::Ky => "ky",
            CheckKind::Sk => "sk",
            CheckKind::Covconst => "covconst",
            CheckKind::UnitRoot => "unit-root",
            CheckKind::Quaternion => "quaternion",
            CheckKind::AssocSk => "assoc-sk",
            CheckKind::SasakiVerify => "sasaki-verify",
            CheckKind::SasakiCone => "sasaki-cone",
            CheckKind::SasakiEinstein => "sasaki-einstein",
            CheckKind::SasakiWitness => "sasaki-witness",
            CheckKind::SpinAnticommute => "spin-anticommute",
            CheckKind::SpinCommute => "spin-commute",
            CheckKind::SpinSquare => "spin-square",
        }
    }
}

/// One expected outcome: running `check` on `target` must pass (or fail).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub check: CheckKind,
    pub target: String,
    pub pass: bool,
}

fn expect(check: CheckKind, target: &str, pass: bool) -> Expectation {
    Expectation {
        check,
        target: target.to_string(),
        pass,
    }
}

/// A manifold bundled with named fields and the outcomes its checks must produce.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub manifold: Manifold,
    pub vectors: Vec<(String, TensorField)>,
    pub forms: Vec<(String, TensorField)>,
    pub tensors: Vec<(String, TensorField)>,
    /// Orthonormal coframe `e^a_μ`, one row per frame index.
    pub frame: Option<Vec<Vec<Expr>>>,
    pub structure: Option<crate::sasaki::MixedThreeStructure>,
    pub metadata: BTreeMap<String, String>,
    pub manifest: Vec<Expectation>,
}

impl CatalogEntry {
    fn bare(manifold: Manifold) -> CatalogEntry {
        CatalogEntry {
            manifold,
            vectors: Vec::new(),
            forms: Vec::new(),
            tensors: Vec::new(),
            frame: None,
            structure: None,
            metadata: BTreeMap::new(),
            manifest: Vec::new(),
        }
    }

    pub fn vector(&self, name: &str) -> Option<&TensorField> {
        self.vectors.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn form(&self, name: &str) -> Option<&TensorField> {
        self.forms.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn tensor(&self, name: &str) -> Option<&TensorField> {
        self.tensors.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Any named field: vectors first, then forms, then other tensors.
    pub fn field(&self, name: &str) -> Option<&TensorField> {
        self.vector(name)
            .or_else(|| self.form(name))
            .or_else(|| self.tensor(name))
    }
}

pub(crate) fn ex(src: &str, params: &[&str]) -> Expr {
    simplify(&parse_with_params(src, params).expect("catalog expression parses"))
}

/// Names accepted by [`by_name`].
pub const ENTRY_NAMES: &[&str] = &["flat2", "flat3", "flat4", "sphere2", "pseudo-sphere", "taub-nut"];

/// Looks up an entry by name; `taub-nut` uses m = 1.
pub fn by_name(name: &str) -> Result<CatalogEntry, CatalogError> {
    match name {
        "flat2" => flat(2, &[1, 1]),
        "flat3" => flat(3, &[1, 1, 1]),
        "flat4" => flat(4, &[1, 1, 1, 1]),
        "sphere2" => sphere2(),
        "pseudo-sphere" => pseudo_sphere_fixture(),
        "taub-nut" => taub_nut(1.0),
        _ => Err(CatalogError::Unknown(name.to_string())),
    }
}

/// Flat space in Cartesian coordinates `x1..xn` with a diagonal signature.
pub fn flat(n: usize, signature: &[i8]) -> Result<CatalogEntry, CatalogError> {
    if n < 2 || signature.len() != n || signature.iter().any(|s| *s != 1 && *s != -1) {
        return Err(CatalogError::BadFlat);
    }
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let chart = Chart::from_owned(names.clone(), vec![(-2.0, 2.0); n])?;
    let metric = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Expr::int(signature[i] as i64) } else { Expr::zero() })
                .collect()
        })
        .collect();
    let manifold = Manifold::new(&format!("flat{n}"), chart, metric, ParamEnv::default(), signature.to_vec())?;
    let mut entry = CatalogEntry::bare(manifold);
    let mut t = vec![Expr::zero(); n];
    t[0] = Expr::one();
    entry.vectors.push(("translation".into(), TensorField::vector(t)));
    entry
        .vectors
        .push(("dilation".into(), TensorField::vector(names.iter().map(|c| Expr::coord(c)).collect())));
    let mut rot = vec![Expr::zero(); n];
    rot[0] = -Expr::coord(&names[1]);
    rot[1] = Expr::coord(&names[0]);
    entry.vectors.push(("rotation12".into(), TensorField::vector(rot)));
    entry.forms.push((
        "volume12".into(),
        TensorField::form(n, 2, &[(vec![0, 1], Expr::int(signature[0] as i64))]),
    ));
    entry.manifest = vec![
        expect(CheckKind::KillingVector, "translation", true),
        expect(CheckKind::KillingVector, "rotation12", signature[0] == signature[1]),
        expect(CheckKind::KillingVector, "dilation", false),
        expect(CheckKind::Covconst, "volume12", true),
        expect(CheckKind::Ky, "volume12", true),
    ];
    if n == 4 && signature.iter().all(|s| *s == 1) {
        // standard complex structures dx1^dx2 + dx3^dx4 and cyclic partners
        for (name, entries) in [
            ("J1", [(vec![0, 1], 1), (vec![2, 3], 1)]),
            ("J2", [(vec![0, 3], 1), (vec![1, 2], 1)]),
            ("J3", [(vec![0, 2], 1), (vec![3, 1], 1)]),
        ] {
            let es: Vec<(Vec<usize>, Expr)> = entries
                .iter()
                .map(|(idx, s)| {
                    let mut sorted = idx.clone();
                    let sign = if sorted[0] > sorted[1] { -1 } else { 1 };
                    sorted.sort_unstable();
                    (sorted, Expr::int(s * sign))
                })
                .collect();
            entry.forms.push((name.to_string(), TensorField::form(n, 2, &es)));
            entry.manifest.push(expect(CheckKind::UnitRoot, name, true));
        }
        entry.manifest.push(expect(CheckKind::Quaternion, "J1,J2,J3", true));
    }
    Ok(entry)
}

/// The unit 2-sphere `dθ² + sin²θ dφ²`.
pub fn sphere2() -> Result<CatalogEntry, CatalogError> {
    let chart = Chart::new(&["theta", "phi"], &[(0.2, PI - 0.2), (0.1, 2.0 * PI - 0.1)])?;
    let metric = vec![
        vec![Expr::one(), Expr::zero()],
        vec![Expr::zero(), ex("sin(theta)^2", &[])],
    ];
    let manifold = Manifold::new("sphere2", chart, metric, ParamEnv::default(), vec![1, 1])?;
    let mut entry = CatalogEntry::bare(manifold);
    entry
        .vectors
        .push(("Lz".into(), TensorField::vector(vec![Expr::zero(), Expr::one()])));
    entry.vectors.push((
        "Lx".into(),
        TensorField::vector(vec![ex("-sin(phi)", &[]), ex("-cos(phi)*cos(theta)/sin(theta)", &[])]),
    ));
    entry.vectors.push((
        "Ly".into(),
        TensorField::vector(vec![ex("cos(phi)", &[]), ex("-sin(phi)*cos(theta)/sin(theta)", &[])]),
    ));
    entry
        .forms
        .push(("area".into(), TensorField::form(2, 2, &[(vec![0, 1], ex("sin(theta)", &[]))])));
    entry.frame = Some(vec![
        vec![Expr::one(), Expr::zero()],
        vec![Expr::zero(), ex("sin(theta)", &[])],
    ]);
    entry.manifest = vec![
        expect(CheckKind::KillingVector, "Lx", true),
        expect(CheckKind::KillingVector, "Ly", true),
        expect(CheckKind::KillingVector, "Lz", true),
        expect(CheckKind::Covconst, "area", true),
        expect(CheckKind::UnitRoot, "area", true),
    ];
    Ok(entry)
}

/// Euclidean Taub-NUT in the chart `(r, θ, φ, χ)`:
/// `V (dr² + r²dθ² + r² sin²θ dφ²) + 16m² V⁻¹ (dχ + cosθ dφ)²` with `V = 1 + 4m/r`.
pub fn taub_nut(m: f64) -> Result<CatalogEntry, CatalogError> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(CatalogError::NonPositiveMass(m));
    }
    let p = &["m"];
    let e = |s: &str| ex(s, p);
    let chart = Chart::new(
        &["r", "theta", "phi", "chi"],
        &[(0.5, 10.0), (0.2, PI - 0.2), (0.1, 2.0 * PI - 0.1), (0.1, 4.0 * PI - 0.1)],
    )?;
    let v = "((4*m + r)/r)";
    let u = "(16*m^2*r/(4*m + r))";
    let z = Expr::zero;
    let metric = vec![
        vec![e(v), z(), z(), z()],
        vec![z(), e(&format!("{v}*r^2")), z(), z()],
        vec![
            z(),
            z(),
            e(&format!("{v}*r^2*sin(theta)^2 + {u}*cos(theta)^2")),
            e(&format!("{u}*cos(theta)")),
        ],
        vec![z(), z(), e(&format!("{u}*cos(theta)")), e(u)],
    ];
    let params = ParamEnv::from_pairs(&[("m", m)]);
    let manifold = Manifold::new("taub-nut", chart, metric, params, vec![1, 1, 1, 1])?;
    let mut entry = CatalogEntry::bare(manifold);

    // rotations obeying [R_i, R_j] = ε_ijk R_k, and the U(1) generator
    let vec4 = |c: [&str; 4]| TensorField::vector(c.iter().map(|s| e(s)).collect());
    entry.vectors.push((
        "R1".into(),
        vec4(["0", "cos(phi)", "-sin(phi)*cos(theta)/sin(theta)", "sin(phi)/sin(theta)"]),
    ));
    entry.vectors.push((
        "R2".into(),
        vec4(["0", "-sin(phi)", "-cos(phi)*cos(theta)/sin(theta)", "cos(phi)/sin(theta)"]),
    ));
    entry.vectors.push(("R3".into(), vec4(["0", "0", "1", "0"])));
    entry.vectors.push(("K4".into(), vec4(["0", "0", "0", "1"])));

    // Cartesian differentials dx_i and the fibre one-form σ = dχ + cosθ dφ
    let dx = [
        ["sin(theta)*cos(phi)", "r*cos(theta)*cos(phi)", "-r*sin(theta)*sin(phi)", "0"],
        ["sin(theta)*sin(phi)", "r*cos(theta)*sin(phi)", "r*sin(theta)*cos(phi)", "0"],
        ["cos(theta)", "-r*sin(theta)", "0", "0"],
    ];
    let dx: Vec<Vec<Expr>> = dx.iter().map(|row| row.iter().map(|s| e(s)).collect()).collect();
    let sigma: Vec<Expr> = ["0", "0", "cos(theta)", "1"].iter().map(|s| e(s)).collect();
    let wedge = |a: &[Expr], b: &[Expr], mu: usize, nu: usize| {
        a[mu].clone() * b[nu].clone() - a[nu].clone() * b[mu].clone()
    };
    let scale = 4.0f64;
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let raw = TensorField::from_fn(4, vec![Variance::Down; 2], Symmetry::Antisymmetric, |idx| {
            let (mu, nu) = (idx[0], idx[1]);
            let a = e("8*m") * wedge(&sigma, &dx[i], mu, nu);
            let b = Expr::int(2) * e(v) * wedge(&dx[j], &dx[k], mu, nu);
            simplify(&(a - b))
        });
        let normalized = raw.map(|c| simplify(&(c.clone() * Expr::frac(1, 2))));
        entry.forms.push((format!("f{}", i + 1), normalized));
        entry.forms.push((format!("f{}_raw", i + 1), raw));
    }
    // Forms are read as f = f_{μν} dx^μ ∧ dx^ν summed over all index pairs, so a
    // coefficient `a dx∧dy` contributes f_xy = a/2. The `_raw` variants keep the
    // full coefficient.
    let fy_raw = TensorField::form(
        4,
        2,
        &[
            (vec![0, 2], e("-8*m*cos(theta)")),
            (vec![0, 3], e("-8*m")),
            (vec![1, 2], e("4*r*(r + 2*m)*(1 + r/(4*m))*sin(theta)")),
        ],
    );
    entry.forms.push(("fY".into(), fy_raw.map(|c| simplify(&(c.clone() * Expr::frac(1, 2))))));
    entry.forms.push(("fY_raw".into(), fy_raw));
    let sv = format!("sqrt({v})");
    entry.frame = Some(vec![
        vec![e(&sv), z(), z(), z()],
        vec![z(), e(&format!("r*{sv}")), z(), z()],
        vec![z(), z(), e(&format!("r*sin(theta)*{sv}")), z()],
        vec![z(), z(), e(&format!("4*m*cos(theta)/{sv}")), e(&format!("4*m/{sv}"))],
    ]);
    entry.metadata.insert("m".into(), format!("{m}"));
    entry.metadata.insert("unit_root_scale".into(), format!("{scale}"));
    entry.metadata.insert(
        "normalization".into(),
        "forms are f = f_{mu nu} dx^mu ^ dx^nu summed over all pairs; *_raw keep the full wedge coefficient. \
         Fitted unit-root scale of f1_raw..f3_raw is c = 4, so f_i = f_i_raw / sqrt(c); fY uses the same halving"
            .into(),
    );
    entry.metadata.insert(
        "gauge".into(),
        "x4 = -4m(chi + phi), A = 4m(1 - cos(theta)) dphi, so dx4 + A = -4m(dchi + cos(theta) dphi)".into(),
    );
    entry.metadata.insert("nut_period".into(), "16*pi*m (metadata only)".into());
    entry.metadata.insert(
        "fY_worst_component".into(),
        "nabla_phi fY_(r,theta) = 2(1 + r/(4m)) r sin(theta)".into(),
    );
    use CheckKind::*;
    let mut manifest = Vec::new();
    for k in ["R1", "R2", "R3", "K4"] {
        manifest.push(expect(KillingVector, k, true));
    }
    for f in ["f1", "f2", "f3"] {
        manifest.push(expect(Ky, f, true));
        manifest.push(expect(Cky, f, true));
        manifest.push(expect(Covconst, f, true));
        manifest.push(expect(UnitRoot, f, true));
        manifest.push(expect(UnitRoot, &format!("{f}_raw"), false));
    }
    manifest.push(expect(Quaternion, "f1,f2,f3", true));
    manifest.push(expect(Ky, "fY", true));
    manifest.push(expect(Cky, "fY", true));
    manifest.push(expect(Covconst, "fY", false));
    manifest.push(expect(UnitRoot, "fY", false));
    manifest.push(expect(AssocSk, "fY", true));
    manifest.push(expect(Ky, "fY_raw", true));
    manifest.push(expect(Covconst, "fY_raw", false));
    for f in ["f1", "f2", "f3", "fY"] {
        manifest.push(expect(SpinAnticommute, f, true));
        manifest.push(expect(SpinSquare, f, f != "fY"));
    }
    for k in ["R1", "R2", "R3", "K4"] {
        manifest.push(expect(SpinCommute, k, true));
    }
    entry.manifest = manifest;
    Ok(entry)
}
