//! Command-line front end: reads manifolds from the catalog or a JSON file,
//! runs checks and prints one JSON report per line.
//!
//! Exit codes: 0 when every report meets its manifest expectation, 1 when a
//! check misses it, 2 on input errors, 3 on internal errors.

mod checks;
mod file;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{
    graded_generators, grade_absorb, jacobi_check, jkq_generators, quaternion_table_check, structure_constants,
    BracketTable, JkqTable, KacMoodyTable,
};
use crate::catalog::{by_name, CatalogEntry, CheckKind, ENTRY_NAMES};
use crate::killing::{CheckOptions, ResidualReport};

pub use checks::{as_expected, geodesic_run, run_check, sasaki_check, sasaki_targets, spin_check, tag, GeodesicRun};
pub use file::{FormSpec, ManifoldFile, StructureSpec, TensorSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hidsym", version, about = "Verify hidden symmetries of curved spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Residual check of one field against its defining identity.
    Check {
        kind: CheckArg,
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        target: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Build a derived tensor and check it.
    Construct {
        kind: ConstructArg,
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        target: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Integrate a geodesic and monitor conserved quantities.
    Geodesic {
        action: GeodesicArg,
        #[command(flatten)]
        source: Source,
        /// Initial position, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Vec<f64>,
        /// Initial velocity, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        v0: Vec<f64>,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        /// Fields whose first integrals are monitored besides the energy.
        #[arg(long = "invariant")]
        invariants: Vec<String>,
        /// Write the trajectory as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Spinor operator identities.
    Spin {
        kind: SpinArg,
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        target: String,
        /// Number of test spinors.
        #[arg(long, default_value_t = 5)]
        spinors: usize,
        #[command(flatten)]
        opts: Opts,
    },
    /// Exact operator algebra tables.
    Algebra {
        kind: AlgebraArg,
        /// Grade cutoff N: generators up to grade 2N.
        #[arg(long, default_value_t = 10)]
        cutoff: u32,
        #[arg(long, value_enum, default_value_t = TableArg::Graded)]
        table: TableArg,
        #[command(flatten)]
        opts: Opts,
    },
    /// Mixed 3-Sasakian structure checks.
    Sasaki {
        kind: SasakiArg,
        #[command(flatten)]
        source: Source,
        /// Run a single sub-target.
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Built-in geometries.
    Catalog {
        action: CatalogArg,
        /// Entry name (all entries for `verify` when omitted).
        #[arg(long)]
        catalog: Option<String>,
        /// Ingest a manifold file instead (for `verify`).
        #[arg(long, conflicts_with = "catalog")]
        manifold: Option<PathBuf>,
        /// Output file for `export` (standard output otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Manifold JSON file.
    #[arg(long)]
    manifold: Option<PathBuf>,
    /// Built-in catalog entry.
    #[arg(long)]
    catalog: Option<String>,
}

#[derive(Clone, Copy, Debug, Args)]
pub struct Opts {
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// JSON-lines output (the default).
    #[arg(long, conflicts_with = "pretty")]
    json: bool,
    /// Human-readable table instead of JSON lines.
    #[arg(long)]
    pretty: bool,
}

impl Opts {
    fn check(&self) -> CheckOptions {
        CheckOptions {
            points: self.points,
            seed: self.seed,
            tol: self.tol,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CheckArg {
    KillingVector,
    Cky,
    Ky,
    Sk,
    Covconst,
    UnitRoot,
    Quaternion,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ConstructArg {
    AssocSk,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GeodesicArg {
    Run,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SpinArg {
    Anticommute,
    Commute,
    Square,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AlgebraArg {
    Table,
    Jacobi,
    QuaternionUnits,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
pub enum TableArg {
    /// The J/K/Q relations.
    Jkq,
    /// The graded loop table.
    Graded,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SasakiArg {
    Verify,
    Cone,
    Einstein,
    Witness,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CatalogArg {
    List,
    Export,
    Verify,
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub reports: Vec<ResidualReport>,
    /// Plain data lines (algebra tables, catalog listings).
    pub data: Vec<Value>,
    /// Text written verbatim (exported manifold files).
    pub text: Option<String>,
}

impl Outcome {
    pub fn all_as_expected(&self) -> bool {
        self.reports.iter().all(as_expected)
    }
}

fn load(source: &Source) -> Result<CatalogEntry, CliError> {
    match (&source.manifold, &source.catalog) {
        (Some(path), _) => load_file(path),
        (None, Some(name)) => load_catalog(name),
        (None, None) => Err(CliError::Input("one of --manifold or --catalog is required".into())),
    }
}

fn load_catalog(name: &str) -> Result<CatalogEntry, CliError> {
    by_name(name).map_err(|e| CliError::Input(e.to_string()))
}

fn load_file(path: &PathBuf) -> Result<CatalogEntry, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    ManifoldFile::from_json(&text)?.to_entry()
}

fn table(kind: TableArg) -> Box<dyn BracketTable> {
    match kind {
        TableArg::Jkq => Box::new(JkqTable),
        TableArg::Graded => Box::new(KacMoodyTable),
    }
}

fn algebra(kind: AlgebraArg, cutoff: u32, which: TableArg, opts: &CheckOptions) -> Result<Outcome, CliError> {
    let internal = |e: crate::algebra::AlgebraError| CliError::Internal(e.to_string());
    let t = table(which);
    let gens = match which {
        TableArg::Jkq => jkq_generators(),
        TableArg::Graded => graded_generators(cutoff),
    };
    let exact = |check: &str, target: &str, count: usize, pass: bool, detail: Value| {
        let mut r = ResidualReport::new(check, target, &CheckOptions { tol: 0.0, ..*opts });
        r.points = count;
        r.pass = pass;
        r.max_residual = if pass { 0.0 } else { 1.0 };
        r.max_relative_residual = r.max_residual;
        r.set_extra("exact", true);
        r.set_extra("detail", detail);
        r
    };
    let mut out = Outcome::default();
    match kind {
        AlgebraArg::Table => {
            for c in structure_constants(t.as_ref(), &gens).map_err(internal)? {
                out.data.push(serde_json::to_value(c).expect("structure constant serializes"));
            }
        }
        AlgebraArg::Jacobi => {
            let cut = (which == TableArg::Graded).then_some(cutoff);
            let j = jacobi_check(t.as_ref(), &gens, cut).map_err(internal)?;
            let detail = serde_json::to_value(&j).expect("report serializes");
            out.reports.push(exact("algebra-jacobi", t.name(), j.triples, j.pass, detail));
            if which == TableArg::Graded {
                let a = grade_absorb(cutoff);
                let detail = serde_json::to_value(&a).expect("report serializes");
                out.reports.push(exact("algebra-absorption", t.name(), a.pairs, a.pass, detail));
            }
        }
        AlgebraArg::QuaternionUnits => {
            let q = quaternion_table_check();
            let detail = serde_json::to_value(&q).expect("report serializes");
            out.reports.push(exact("algebra-quaternion-units", "I,Q1,Q2,Q3", q.associative_triples, q.pass, detail));
        }
    }
    Ok(out)
}

fn catalog(
    action: CatalogArg,
    name: Option<&str>,
    manifold: Option<&PathBuf>,
    opts: &CheckOptions,
) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match action {
        CatalogArg::List => {
            for n in ENTRY_NAMES {
                let e = load_catalog(n)?;
                out.data.push(json!({
                    "name": n,
                    "dimension": e.manifold.dim(),
                    "expectations": e.manifest.len(),
                    "structure": e.structure.is_some(),
                }));
            }
        }
        CatalogArg::Export => {
            let n = name.ok_or_else(|| CliError::Input("export needs --catalog".into()))?;
            out.text = Some(ManifoldFile::from_entry(&load_catalog(n)?).to_json());
        }
        CatalogArg::Verify => {
            let entries = match (manifold, name) {
                (Some(path), _) => vec![load_file(path)?],
                (None, Some(n)) => vec![load_catalog(n)?],
                (None, None) => ENTRY_NAMES.iter().map(|n| load_catalog(n)).collect::<Result<_, _>>()?,
            };
            for e in &entries {
                out.reports.extend(verify_manifest(e, opts)?);
            }
        }
    }
    Ok(out)
}

/// Runs every expectation of an entry's manifest. Structure-level checks run
/// once per sub-target listed in the manifest.
pub fn verify_manifest(entry: &CatalogEntry, opts: &CheckOptions) -> Result<Vec<ResidualReport>, CliError> {
    let mut out = Vec::new();
    for e in &entry.manifest {
        out.extend(run_check(entry, e.check, &e.target, opts)?);
    }
    Ok(out)
}

/// Executes a parsed command.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match &cli.command {
        Command::Check { kind, source, target, opts } => {
            let kind = match kind {
                CheckArg::KillingVector => CheckKind::KillingVector,
                CheckArg::Cky => CheckKind::Cky,
                CheckArg::Ky => CheckKind::Ky,
                CheckArg::Sk => CheckKind::Sk,
                CheckArg::Covconst => CheckKind::Covconst,
                CheckArg::UnitRoot => CheckKind::UnitRoot,
                CheckArg::Quaternion => CheckKind::Quaternion,
            };
            out.reports = run_check(&load(source)?, kind, target, &opts.check())?;
        }
        Command::Construct {
            kind: ConstructArg::AssocSk,
            source,
            target,
            opts,
        } => {
            out.reports = run_check(&load(source)?, CheckKind::AssocSk, target, &opts.check())?;
        }
        Command::Geodesic {
            action: GeodesicArg::Run,
            source,
            x0,
            v0,
            step,
            t_end,
            invariants,
            csv,
            opts,
        } => {
            let run = GeodesicRun {
                position: x0.clone(),
                velocity: v0.clone(),
                step: *step,
                t_end: *t_end,
                invariants: invariants.clone(),
                tol: opts.tol,
            };
            let entry = load(source)?;
            out.reports = match csv {
                Some(path) => {
                    let mut f = std::fs::File::create(path)
                        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
                    geodesic_run(&entry, &run, Some(&mut f))?
                }
                None => geodesic_run(&entry, &run, None)?,
            };
        }
        Command::Spin {
            kind,
            source,
            target,
            spinors,
            opts,
        } => {
            let kind = match kind {
                SpinArg::Anticommute => CheckKind::SpinAnticommute,
                SpinArg::Commute => CheckKind::SpinCommute,
                SpinArg::Square => CheckKind::SpinSquare,
            };
            out.reports = vec![spin_check(&load(source)?, kind, target, &opts.check(), *spinors)?];
        }
        Command::Algebra {
            kind,
            cutoff,
            table,
            opts,
        } => out = algebra(*kind, *cutoff, *table, &opts.check())?,
        Command::Sasaki {
            kind,
            source,
            target,
            opts,
        } => {
            let kind = match kind {
                SasakiArg::Verify => CheckKind::SasakiVerify,
                SasakiArg::Cone => CheckKind::SasakiCone,
                SasakiArg::Einstein => CheckKind::SasakiEinstein,
                SasakiArg::Witness => CheckKind::SasakiWitness,
            };
            out.reports = sasaki_check(&load(source)?, kind, target.as_deref(), &opts.check())?;
        }
        Command::Catalog {
            action,
            catalog: name,
            manifold,
            out: path,
            opts,
        } => {
            out = catalog(*action, name.as_deref(), manifold.as_ref(), &opts.check())?;
            if let (Some(path), Some(text)) = (path, out.text.take()) {
                std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
            }
        }
    }
    Ok(out)
}

fn pretty(&cmd: &&Command) -> bool {
    let opts = match cmd {
        Command::Check { opts, .. }
        | Command::Construct { opts, .. }
        | Command::Geodesic { opts, .. }
        | Command::Spin { opts, .. }
        | Command::Algebra { opts, .. }
        | Command::Sasaki { opts, .. }
        | Command::Catalog { opts, .. } => opts,
    };
    opts.pretty
}

/// Writes an outcome as JSON lines, or as a table when `pretty` is set.
pub fn render(out: &Outcome, pretty: bool, w: &mut dyn Write) -> std::io::Result<()> {
    if let Some(text) = &out.text {
        writeln!(w, "{text}")?;
    }
    for d in &out.data {
        writeln!(w, "{d}")?;
    }
    if pretty && !out.reports.is_empty() {
        writeln!(w, "{:<24} {:<22} {:>12} {:>6} {:>9}", "check", "target", "rel. resid.", "pass", "expected")?;
        for r in &out.reports {
            let expected = r.extra.get("expected").and_then(Value::as_bool).unwrap_or(true);
            let flag = if as_expected(r) { "" } else { "  <-- unexpected" };
            writeln!(
                w,
                "{:<24} {:<22} {:>12.3e} {:>6} {:>9}{flag}",
                r.check, r.target, r.max_relative_residual, r.pass, expected
            )?;
        }
        return Ok(());
    }
    for r in &out.reports {
        writeln!(w, "{}", serde_json::to_string(r).expect("report serializes"))?;
    }
    Ok(())
}

/// Parses `argv`, runs the command, prints reports on `stdout` and
/// diagnostics on `stderr`, and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let outcome = match std::panic::catch_unwind(|| execute(&cli)) {
        Ok(Ok(o)) => o,
        Ok(Err(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
        Err(_) => {
            let _ = writeln!(stderr, "error: internal failure");
            return 3;
        }
    };
    if let Err(e) = render(&outcome, pretty(&&cli.command), stdout) {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return 3;
    }
    for r in outcome.reports.iter().filter(|r| !as_expected(r)) {
        let _ = writeln!(stderr, "unexpected outcome: {} {} pass={}", r.check, r.target, r.pass);
    }
    if outcome.all_as_expected() {
        0
    } else {
        1
    }
}
