//! Integrates a Taub-NUT geodesic and monitors its first integrals.
use hidsym::catalog::taub_nut;
use hidsym::geodesic::{integrate, monitor_invariant, GeodesicState, IntegratorConfig, Invariant};
use hidsym::killing::associated_sk;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tn = taub_nut(1.0)?;
    let m = &tn.manifold;
    let start = GeodesicState::new(vec![9.5, 1.5, 0.3, 6.0], vec![-2.5, 0.02, 0.03, 0.05]);
    let traj = integrate(m, &start, &IntegratorConfig::rk4(1e-3, 10.0))?;
    println!("{} steps, final position {:?}", traj.steps, traj.last().position);
    let k = associated_sk(tn.form("fY").unwrap(), m)?;
    let invariants = [
        Invariant::energy(m)?,
        Invariant::new("K4", tn.vector("K4").unwrap(), m)?,
        Invariant::new("K_fY", &k, m)?,
    ];
    for q in &invariants {
        let r = monitor_invariant(&traj, q, 1e-8)?;
        println!("{:>6}: initial {:+.6} relative drift {:.1e}", r.invariant, r.initial, r.relative_drift);
    }
    Ok(())
}
