//! Dirac-type operators built from Killing-Yano tensors on Taub-NUT.
use hidsym::catalog::taub_nut;
use hidsym::killing::CheckOptions;
use hidsym::spin::{
    anticommutator_residual, commutator_residual, orthonormal_frame, spinor_bank, square_compare, OperatorSpec,
    SpinContext,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tn = taub_nut(1.0)?;
    let m = &tn.manifold;
    let ctx = SpinContext::new(m, orthonormal_frame(m, tn.frame.as_deref())?);
    let bank = spinor_bank(m.chart(), ctx.spinor_size(), 5, 7);
    let opts = CheckOptions { points: 6, seed: 0, tol: 1e-8 };
    let dirac = OperatorSpec::StandardDirac;
    for f in ["f1", "f2", "f3", "fY"] {
        let df = OperatorSpec::DiracType(tn.form(f).unwrap().clone());
        let anti = anticommutator_residual(&ctx, &dirac, &df, &bank, &opts)?;
        let sq = square_compare(&ctx, &df, &bank, &opts)?;
        println!(
            "D_{f}: anticommutes with D_s: {} ({:.1e}); squares to D_s^2: {} ({:.1e})",
            anti.pass, anti.max_relative_residual, sq.pass, sq.max_relative_residual
        );
    }
    let x = OperatorSpec::KillingOp(tn.vector("K4").unwrap().clone());
    let c = commutator_residual(&ctx, &dirac, &x, &bank, &opts)?;
    println!("X_K4 commutes with D_s: {} ({:.1e})", c.pass, c.max_relative_residual);
    Ok(())
}
