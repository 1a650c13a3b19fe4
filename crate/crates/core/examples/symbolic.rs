//! Parse, differentiate, simplify and evaluate an expression.
use hidsym::exprkit::{differentiate, evaluate, parse_with_params, simplify, ParamEnv, Point};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = parse_with_params("1 + 4*m/r", &["m"])?;
    let dv = simplify(&differentiate(&v, "r"));
    println!("V = {v}");
    println!("dV/dr = {dv}");
    let env = ParamEnv::from_pairs(&[("m", 1.0)]);
    let p = Point::from_pairs(&[("r", 4.0)]);
    println!("V(4) = {}, dV/dr(4) = {}", evaluate(&v, &p, &env)?, evaluate(&dv, &p, &env)?);
    let id = simplify(&parse_with_params("sin(x)^2 + cos(x)^2", &[])?);
    println!("sin^2 + cos^2 = {id}");
    Ok(())
}
