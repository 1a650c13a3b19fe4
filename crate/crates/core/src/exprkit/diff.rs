use num_traits::One;

use super::expr::{rat, Expr, Func, Node};
use super::simplify::simplify;

/// Exact partial derivative with respect to a coordinate, simplified.
pub fn differentiate(e: &Expr, var: &str) -> Expr {
    simplify(&differentiate_raw(e, var))
}

/// Partial derivative without the final simplification pass.
pub fn differentiate_raw(e: &Expr, var: &str) -> Expr {
    match e.node() {
        Node::Const(_) | Node::Param(_) => Expr::zero(),
        Node::Coord(name) => {
            if name == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Sum(ts) => Expr::sum(ts.iter().map(|t| differentiate_raw(t, var)).collect()),
        Node::Product(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for i in 0..fs.len() {
                let d = differentiate_raw(&fs[i], var);
                if d.is_zero() {
                    continue;
                }
                let mut factors: Vec<Expr> = fs.clone();
                factors[i] = d;
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        Node::Quotient(a, b) => {
            let da = differentiate_raw(a, var);
            let db = differentiate_raw(b, var);
            let left = Expr::div(da, b.clone());
            if db.is_zero() {
                return left;
            }
            let right = Expr::div(Expr::mul(a.clone(), db), Expr::powi(b.clone(), 2));
            Expr::sub(left, right)
        }
        Node::Power(b, p) => {
            let db = differentiate_raw(b, var);
            if db.is_zero() {
                return Expr::zero();
            }
            let lowered = Expr::pow(b.clone(), p - rat(1));
            Expr::product(vec![Expr::constant(p.clone()), lowered, db])
        }
        Node::Neg(a) => {
            let d = differentiate_raw(a, var);
            if d.is_zero() {
                d
            } else {
                Expr::neg(d)
            }
        }
        Node::Func(f, a) => {
            let da = differentiate_raw(a, var);
            if da.is_zero() {
                return Expr::zero();
            }
            let outer = match f {
                Func::Sin => Expr::cos(a.clone()),
                Func::Cos => Expr::neg(Expr::sin(a.clone())),
                Func::Tan => Expr::powi(Expr::cos(a.clone()), -2),
                Func::Exp => e.clone(),
                Func::Log => Expr::powi(a.clone(), -1),
                Func::Sqrt => Expr::div(Expr::frac(1, 2), e.clone()),
            };
            if da.as_const().map_or(false, |c| c.is_one()) {
                outer
            } else {
                Expr::mul(outer, da)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprkit::eval::{evaluate, ParamEnv, Point};
    use crate::exprkit::parse::{parse, parse_with_params};

    #[test]
    fn derivative_of_potential() {
        let e = parse_with_params("(4*m+r)/r", &["m"]).unwrap();
        let d = differentiate(&e, "r");
        let expected = parse_with_params("-4*m/r^2", &["m"]).unwrap();
        let p = Point::from_pairs(&[("r", 2.0)]);
        let env = ParamEnv::from_pairs(&[("m", 1.0)]);
        let got = evaluate(&d, &p, &env).unwrap();
        // central finite-difference oracle at r = 2, m = 1
        let h = 1e-5;
        let f = |r: f64| (4.0 + r) / r;
        let fd = (f(2.0 + h) - f(2.0 - h)) / (2.0 * h);
        assert!((fd + 1.0).abs() < 1e-8);
        assert!((got - fd).abs() < 1e-8);
        assert_eq!(d, simplify(&expected));
    }

    #[test]
    fn derivative_of_sine() {
        let d = differentiate(&parse("sin(theta)").unwrap(), "theta");
        assert_eq!(d, parse("cos(theta)").unwrap());
    }

    #[test]
    fn parameters_are_constant() {
        let e = parse_with_params("m", &["m"]).unwrap();
        assert!(differentiate(&e, "r").is_zero());
        // a coordinate with a different name is also constant
        assert!(differentiate(&parse("m").unwrap(), "r").is_zero());
    }
}
