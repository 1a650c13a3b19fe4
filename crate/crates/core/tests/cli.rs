use hidsym::catalog::{by_name, ENTRY_NAMES};
use hidsym::cli::{run, ManifoldFile};
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hidsym").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn lines(s: &str) -> Vec<Value> {
    s.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn write_file(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn ky_of_fourth_tensor_passes() {
    let (code, out, _) = call(&["check", "ky", "--catalog", "taub-nut", "--target", "fY"]);
    assert_eq!(code, 0);
    let r = lines(&out);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0]["pass"], true);
    assert_eq!(r[0]["check"], "ky");
    for key in ["target", "tolerance", "points", "seed", "max_residual", "max_relative_residual", "worst_point", "extra"] {
        assert!(r[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn expected_failure_exits_zero() {
    let (code, out, _) = call(&["check", "covconst", "--catalog", "taub-nut", "--target", "fY"]);
    assert_eq!(code, 0);
    let r = lines(&out);
    assert_eq!(r[0]["pass"], false);
    assert_eq!(r[0]["extra"]["expected"], false);
}

#[test]
fn jacobi_is_exact() {
    let (code, out, _) = call(&["algebra", "jacobi", "--cutoff", "10"]);
    assert_eq!(code, 0);
    let r = lines(&out);
    assert_eq!(r[0]["check"], "algebra-jacobi");
    assert_eq!(r[0]["tolerance"], 0.0);
    assert_eq!(r[0]["max_residual"], 0.0);
    assert_eq!(r[1]["check"], "algebra-absorption");
    assert_eq!(r[1]["pass"], true);
}

#[test]
fn algebra_tables_and_units() {
    let (code, out, _) = call(&["algebra", "table", "--table", "jkq"]);
    assert_eq!(code, 0);
    let rows = lines(&out);
    assert!(rows.iter().any(|r| r["left"] == "J1" && r["right"] == "J2" && r["result"] == "(i) J3"));
    let (_, graded, _) = call(&["algebra", "table", "--cutoff", "2"]);
    // [B^1_2, B^2_2] = i A^3_4
    assert!(lines(&graded).iter().any(|r| r["left"] == "B1_2" && r["right"] == "B2_2" && r["result"] == "(i) A3_4"));
    let (code, out, _) = call(&["algebra", "quaternion-units"]);
    assert_eq!(code, 0);
    assert_eq!(lines(&out)[0]["points"], 64);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = ["sasaki", "verify", "--catalog", "pseudo-sphere", "--points", "6", "--seed", "3"];
    assert_eq!(call(&args).1, call(&args).1);
    let other = ["sasaki", "verify", "--catalog", "pseudo-sphere", "--points", "6", "--seed", "4"];
    assert_ne!(call(&args).1, call(&other).1);
}

#[test]
fn export_ingest_round_trip_preserves_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    for name in ENTRY_NAMES {
        let path = dir.path().join(format!("{name}.json"));
        let p = path.to_str().unwrap();
        assert_eq!(call(&["catalog", "export", "--catalog", name, "--out", p]).0, 0);
        let file = ManifoldFile::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(file, ManifoldFile::from_entry(&by_name(name).unwrap()));
        let (c1, direct, _) = call(&["catalog", "verify", "--catalog", name, "--points", "5"]);
        let (c2, ingested, _) = call(&["catalog", "verify", "--manifold", p, "--points", "5"]);
        assert_eq!((c1, c2), (0, 0), "{name}");
        let outcome = |s: &str| lines(s).iter().map(|r| (r["check"].clone(), r["target"].clone(), r["pass"].clone())).collect::<Vec<_>>();
        assert_eq!(outcome(&direct), outcome(&ingested), "{name}");
        assert!(!outcome(&direct).is_empty());
    }
}

#[test]
fn structure_block_round_trips() {
    let e = by_name("pseudo-sphere").unwrap();
    let back = ManifoldFile::from_entry(&e).to_entry().unwrap();
    let (s, t) = (e.structure.unwrap(), back.structure.unwrap());
    assert_eq!(s.phi, t.phi);
    assert_eq!(s.xi, t.xi);
    assert_eq!(s.eta, t.eta);
}

const POLAR: &str = r#"{
  "name": "plane-polar", "dimension": 2, "coordinates": ["r", "t"],
  "domain": {"r": [0.5, 2.0], "t": [0.0, 6.0]}, "signature": [1, 1],
  "parameters": {"k": 2.0},
  "metric": [["1", "0"], ["0", "r^2"]],
  "vectors": {"rot": ["0", "1"], "scale": ["k*r", "0"]},
  "forms": {"area": {"rank": 2, "components": {"0,1": "r"}}}
}"#;

#[test]
fn manifold_file_checks_without_manifest_expect_pass() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_file(&dir, "polar.json", POLAR);
    assert_eq!(call(&["check", "killing-vector", "--manifold", &p, "--target", "rot"]).0, 0);
    assert_eq!(call(&["check", "covconst", "--manifold", &p, "--target", "area"]).0, 0);
    let (code, out, err) = call(&["check", "killing-vector", "--manifold", &p, "--target", "scale"]);
    assert_eq!(code, 1);
    assert_eq!(lines(&out)[0]["pass"], false);
    assert!(err.contains("unexpected"));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("bad-json", "{".to_string()),
        ("asym", POLAR.replace(r#"[["1", "0"], ["0", "r^2"]]"#, r#"[["1", "r"], ["0", "r^2"]]"#)),
        ("tuple", POLAR.replace(r#""0,1": "r""#, r#""1,0": "r""#)),
        ("expr", POLAR.replace(r#""k*r""#, r#""k*(r""#)),
        ("domain", POLAR.replace(r#""t": [0.0, 6.0]"#, r#""s": [0.0, 6.0]"#)),
    ];
    for (name, text) in cases {
        let p = write_file(&dir, &format!("{name}.json"), &text);
        let (code, out, err) = call(&["check", "killing-vector", "--manifold", &p, "--target", "rot"]);
        assert_eq!(code, 2, "{name}: {err}");
        assert!(out.is_empty() && !err.is_empty());
    }
    assert_eq!(call(&["check", "ky", "--catalog", "nowhere", "--target", "x"]).0, 2);
    assert_eq!(call(&["check", "ky", "--catalog", "flat2", "--target", "missing"]).0, 2);
    assert_eq!(call(&["check", "killing-vector", "--catalog", "flat2", "--target", "volume12"]).0, 2);
    assert_eq!(call(&["sasaki", "verify", "--catalog", "flat3"]).0, 2);
    assert_eq!(call(&["no-such-command"]).0, 2);
    assert_eq!(call(&["check", "ky", "--target", "fY"]).0, 2);
    assert_eq!(call(&["--help"]).0, 0);
}

#[test]
fn sasaki_commands_follow_manifest() {
    let (code, out, _) = call(&["sasaki", "cone", "--catalog", "pseudo-sphere", "--points", "6"]);
    assert_eq!(code, 0);
    let r = lines(&out);
    assert_eq!(r.len(), 2);
    assert_eq!((r[0]["target"].as_str(), r[0]["pass"].as_bool()), (Some("para-hyperkahler"), Some(true)));
    let (code, out, _) = call(&["sasaki", "einstein", "--catalog", "pseudo-sphere", "--target", "cone", "--points", "6"]);
    assert_eq!(code, 0);
    assert_eq!(lines(&out).len(), 1);
    let (code, out, _) = call(&["sasaki", "witness", "--catalog", "pseudo-sphere", "--points", "6"]);
    assert_eq!(code, 0);
    assert_eq!(lines(&out)[0]["extra"]["witnesses"].as_array().unwrap().len(), 3);
}

#[test]
fn spin_and_construct_commands() {
    let (code, out, _) = call(&["spin", "square", "--catalog", "taub-nut", "--target", "fY", "--points", "4", "--tol", "1e-8"]);
    assert_eq!(code, 0);
    assert!(lines(&out)[0]["max_relative_residual"].as_f64().unwrap() > 1e-3);
    let (code, _, _) = call(&["spin", "anticommute", "--catalog", "taub-nut", "--target", "f2", "--points", "4", "--tol", "1e-8"]);
    assert_eq!(code, 0);
    let (code, out, _) = call(&["construct", "assoc-sk", "--catalog", "taub-nut", "--target", "fY"]);
    assert_eq!(code, 0);
    assert_eq!(lines(&out)[0]["check"], "assoc-sk");
}

#[test]
fn geodesic_run_reports_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let (code, out, _) = call(&[
        "geodesic", "run", "--catalog", "taub-nut", "--x0", "4,1.3,2,5", "--v0", "0,0.05,0.2,0.3", "--t-end", "2",
        "--invariant", "fY", "--invariant", "K4", "--tol", "1e-8", "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let r = lines(&out);
    let names: Vec<_> = r.iter().map(|x| x["target"].as_str().unwrap().to_string()).collect();
    assert_eq!(names, ["energy", "fY", "K4"]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,r,theta,phi,chi,dr,dtheta,dphi,dchi,energy,fY,K4"));
    assert_eq!(text.lines().count(), 2002);
}

#[test]
fn pretty_table() {
    let (code, out, _) = call(&["sasaki", "verify", "--catalog", "pseudo-sphere", "--points", "4", "--pretty"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("check"));
    assert_eq!(out.lines().count(), 6);
    assert!(!out.contains("unexpected"));
}
