//! Killing vectors and Killing-Yano tensors of Euclidean Taub-NUT.
use hidsym::catalog::taub_nut;
use hidsym::killing::{
    associated_sk, covariant_constancy_residual, killing_vector_residual, ky_residual, sk_residual, unit_root_check,
    CheckOptions,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tn = taub_nut(1.0)?;
    let m = &tn.manifold;
    let opts = CheckOptions::default();
    for v in ["R1", "R2", "R3", "K4"] {
        let r = killing_vector_residual(tn.vector(v).unwrap(), m, &opts)?;
        println!("Killing vector {v}: pass={} residual={:.1e}", r.pass, r.max_relative_residual);
    }
    for f in ["f1", "f2", "f3", "fY"] {
        let form = tn.form(f).unwrap();
        let ky = ky_residual(form, m, &opts)?;
        let cc = covariant_constancy_residual(form, m, &opts)?;
        let (ur, _) = unit_root_check(form, m, &opts)?;
        println!("{f}: Killing-Yano={} covariantly constant={} unit root={}", ky.pass, cc.pass, ur.pass);
    }
    let k = associated_sk(tn.form("fY").unwrap(), m)?;
    println!("Staeckel-Killing tensor of fY: pass={}", sk_residual(&k, m, &opts)?.pass);
    Ok(())
}
