use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::catalog::{CatalogEntry, Expectation};
use crate::exprkit::{parse_with_params, simplify, Expr, ParamEnv};
use crate::manifold::{Chart, Manifold, Symmetry, TensorField, Variance};
use crate::sasaki::{endomorphism, one_form, MixedThreeStructure};

/// A p-form given on strictly increasing index tuples such as `"0,1"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormSpec {
    pub rank: usize,
    pub components: BTreeMap<String, String>,
}

/// A general tensor given by its full row-major component list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub variance: Vec<Variance>,
    #[serde(default = "no_symmetry")]
    pub symmetry: Symmetry,
    pub components: Vec<String>,
}

fn no_symmetry() -> Symmetry {
    Symmetry::None
}

/// `φ_α` as matrices `φ^μ_ν` (rows indexed by `μ`), `ξ_α`, `η_α` as component lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureSpec {
    pub phi: [Vec<Vec<String>>; 3],
    pub xi: [Vec<String>; 3],
    pub eta: [Vec<String>; 3],
}

/// A manifold with its named fields, as read from or written to JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldFile {
    pub name: String,
    pub dimension: usize,
    pub coordinates: Vec<String>,
    pub domain: BTreeMap<String, [f64; 2]>,
    pub signature: Vec<i8>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    pub metric: Vec<Vec<String>>,
    #[serde(default)]
    pub vectors: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub forms: BTreeMap<String, FormSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tensors: BTreeMap<String, TensorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structures: Option<StructureSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub manifest: Vec<Expectation>,
}

fn strings(v: &[Expr]) -> Vec<String> {
    v.iter().map(|e| e.to_string()).collect()
}

/// Strictly increasing index tuples of length `p` below `n`.
fn increasing(n: usize, p: usize) -> Vec<Vec<usize>> {
    if p == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for head in increasing(n, p - 1) {
        let start = head.last().map_or(0, |l| l + 1);
        for i in start..n {
            let mut t = head.clone();
            t.push(i);
            out.push(t);
        }
    }
    out
}

impl ManifoldFile {
    pub fn from_entry(e: &CatalogEntry) -> ManifoldFile {
        let m = &e.manifold;
        let coords = m.chart().coords().to_vec();
        let n = m.dim();
        let forms = e
            .forms
            .iter()
            .map(|(name, f)| {
                let components = increasing(n, f.rank())
                    .into_iter()
                    .filter(|idx| !f.get(idx).is_zero())
                    .map(|idx| {
                        let key = idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
                        (key, f.get(&idx).to_string())
                    })
                    .collect();
                (name.clone(), FormSpec { rank: f.rank(), components })
            })
            .collect();
        let tensors = e
            .tensors
            .iter()
            .map(|(name, t)| {
                let spec = TensorSpec {
                    variance: t.variance().to_vec(),
                    symmetry: t.symmetry(),
                    components: strings(t.components()),
                };
                (name.clone(), spec)
            })
            .collect();
        let structures = e.structure.as_ref().map(|s| StructureSpec {
            phi: [0, 1, 2].map(|a| (0..n).map(|i| (0..n).map(|j| s.phi[a].get(&[i, j]).to_string()).collect()).collect()),
            xi: [0, 1, 2].map(|a| strings(s.xi[a].components())),
            eta: [0, 1, 2].map(|a| strings(s.eta[a].components())),
        });
        ManifoldFile {
            name: m.name().to_string(),
            dimension: n,
            coordinates: coords.clone(),
            domain: coords
                .iter()
                .zip(m.chart().domain())
                .map(|(c, (lo, hi))| (c.clone(), [*lo, *hi]))
                .collect(),
            signature: m.signature().to_vec(),
            parameters: m.params().0.clone(),
            metric: m.metric().iter().map(|row| strings(row)).collect(),
            vectors: e.vectors.iter().map(|(k, v)| (k.clone(), strings(v.components()))).collect(),
            forms,
            tensors,
            frame: e.frame.as_ref().map(|f| f.iter().map(|row| strings(row)).collect()),
            structures,
            metadata: e.metadata.clone(),
            manifest: e.manifest.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<ManifoldFile, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("manifold file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifold file serializes")
    }

    /// Parses every expression and validates shapes and the metric.
    pub fn to_entry(&self) -> Result<CatalogEntry, CliError> {
        let n = self.dimension;
        let bad = |msg: String| CliError::Input(format!("{}: {msg}", self.name));
        if self.coordinates.len() != n {
            return Err(bad(format!("{} coordinates for dimension {n}", self.coordinates.len())));
        }
        let params: Vec<&str> = self.parameters.keys().map(String::as_str).collect();
        let ex = |src: &str| -> Result<Expr, CliError> {
            let e = parse_with_params(src, &params).map_err(|err| bad(format!("`{src}`: {err}")))?;
            Ok(simplify(&e))
        };
        let list = |v: &[String], what: &str| -> Result<Vec<Expr>, CliError> {
            if v.len() != n {
                return Err(bad(format!("{what} has {} components, expected {n}", v.len())));
            }
            v.iter().map(|s| ex(s)).collect()
        };
        let matrix = |rows: &[Vec<String>], what: &str| -> Result<Vec<Vec<Expr>>, CliError> {
            if rows.len() != n {
                return Err(bad(format!("{what} has {} rows, expected {n}", rows.len())));
            }
            rows.iter().map(|r| list(r, what)).collect()
        };
        let domain = self
            .coordinates
            .iter()
            .map(|c| {
                self.domain
                    .get(c)
                    .map(|[lo, hi]| (*lo, *hi))
                    .ok_or_else(|| bad(format!("no domain for coordinate `{c}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let chart = Chart::from_owned(self.coordinates.clone(), domain).map_err(|e| bad(e.to_string()))?;
        let metric = matrix(&self.metric, "metric")?;
        for i in 0..n {
            for j in 0..i {
                if simplify(&(metric[i][j].clone() - metric[j][i].clone())) != Expr::zero() {
                    return Err(bad(format!("metric is not symmetric at ({i},{j})")));
                }
            }
        }
        let env = ParamEnv(self.parameters.clone());
        let manifold =
            Manifold::new(&self.name, chart, metric, env, self.signature.clone()).map_err(|e| bad(e.to_string()))?;
        let mut entry = CatalogEntry {
            manifold,
            vectors: Vec::new(),
            forms: Vec::new(),
            tensors: Vec::new(),
            frame: None,
            structure: None,
            metadata: self.metadata.clone(),
            manifest: self.manifest.clone(),
        };
        for (name, v) in &self.vectors {
            entry.vectors.push((name.clone(), TensorField::vector(list(v, name)?)));
        }
        for (name, f) in &self.forms {
            let mut entries = Vec::new();
            for (key, src) in &f.components {
                let idx = key
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| bad(format!("form {name}: bad index tuple `{key}`")))?;
                let increasing = idx.windows(2).all(|w| w[0] < w[1]);
                if idx.len() != f.rank || !increasing || idx.iter().any(|i| *i >= n) {
                    return Err(bad(format!("form {name}: `{key}` is not a strictly increasing {}-tuple", f.rank)));
                }
                entries.push((idx, ex(src)?));
            }
            entry.forms.push((name.clone(), TensorField::form(n, f.rank, &entries)));
        }
        for (name, t) in &self.tensors {
            let comps = t.components.iter().map(|s| ex(s)).collect::<Result<Vec<_>, _>>()?;
            let field = TensorField::new(n, t.variance.clone(), t.symmetry, comps).map_err(|e| bad(format!("{name}: {e}")))?;
            entry.tensors.push((name.clone(), field));
        }
        if let Some(frame) = &self.frame {
            entry.frame = Some(matrix(frame, "frame")?);
        }
        if let Some(s) = &self.structures {
            let phi = [0, 1, 2].map(|a| matrix(&s.phi[a], "phi").map(endomorphism));
            let xi = [0, 1, 2].map(|a| list(&s.xi[a], "xi").map(TensorField::vector));
            let eta = [0, 1, 2].map(|a| list(&s.eta[a], "eta").map(one_form));
            let [p1, p2, p3] = phi;
            let [x1, x2, x3] = xi;
            let [e1, e2, e3] = eta;
            let structure = MixedThreeStructure::new(
                entry.manifold.clone(),
                [p1?, p2?, p3?],
                [x1?, x2?, x3?],
                [e1?, e2?, e3?],
            )
            .map_err(|e| bad(e.to_string()))?;
            entry.structure = Some(structure);
        }
        Ok(entry)
    }
}
