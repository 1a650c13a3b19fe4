//! Christoffel symbols, curvature and the Ricci tensor of the round 2-sphere.
use hidsym::catalog::sphere2;
use hidsym::manifold::{christoffel, evaluate_tensor, ricci, riemann};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = sphere2()?.manifold;
    let gamma = christoffel(&m)?;
    println!("Gamma^theta_(phi,phi) = {}", gamma.get(&[0, 1, 1]));
    println!("Gamma^phi_(theta,phi) = {}", gamma.get(&[1, 0, 1]));
    println!("R^theta_(phi,theta,phi) = {}", riemann(&m)?.get(&[0, 1, 0, 1]));
    let x = [1.0, 2.0];
    println!("Ricci at {x:?} = {:?} (equals the metric)", evaluate_tensor(&ricci(&m)?, &m, &x)?);
    println!("metric at {x:?} = {:?}", m.metric_at(&x)?);
    Ok(())
}
