//! The mixed 3-structure on the pseudo-sphere in R^{2,2} and its metric cone.
use hidsym::catalog::pseudo_sphere_fixture;
use hidsym::killing::CheckOptions;
use hidsym::sasaki::{
    build_cone, einstein_check, einstein_residual, para_hyperkahler_check, sasakian_residuals, sectional_curvature_check,
    structure_identity_suite, subcheck, subcheck_names,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = pseudo_sphere_fixture()?.structure.expect("fixture carries a structure");
    let opts = CheckOptions::default();
    println!("structure identities: {}", structure_identity_suite(&s, &opts)?.pass);
    let r = sasakian_residuals(&s, &opts)?;
    for name in subcheck_names(&r) {
        let p = subcheck(&r, &name).unwrap();
        println!("  {name}: pass={} relative residual {:.1e}", p.pass, p.max_relative_residual);
    }
    println!("sectional curvature 1: {}", sectional_curvature_check(&s, &opts)?.pass);
    println!("Einstein with lambda = 2: {}", einstein_check(&s, &opts)?.pass);
    let cone = build_cone(&s)?;
    println!("cone para-hyper-Kahler: {}", para_hyperkahler_check(&cone, &opts)?.pass);
    println!("cone Ricci-flat: {}", einstein_residual(&cone.manifold, 0.0, &opts)?.pass);
    Ok(())
}
