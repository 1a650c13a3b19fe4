use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use super::error::ExprError;
use super::expr::{Expr, Func, Node, Rational};

/// Coordinate values at a point of a chart.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point(pub BTreeMap<String, f64>);

impl Point {
    pub fn from_pairs(pairs: &[(&str, f64)]) -> Point {
        Point(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }
}

/// Parameter values such as the NUT parameter `m`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamEnv(pub BTreeMap<String, f64>);

impl ParamEnv {
    pub fn from_pairs(pairs: &[(&str, f64)]) -> ParamEnv {
        ParamEnv(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }
}

pub fn rational_to_f64(c: &Rational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN)
    })
}

/// Evaluates with IEEE double arithmetic.
pub fn evaluate(e: &Expr, p: &Point, env: &ParamEnv) -> Result<f64, ExprError> {
    Ok(match e.node() {
        Node::Const(c) => rational_to_f64(c),
        Node::Param(n) => env.get(n).ok_or_else(|| ExprError::Unbound(n.clone()))?,
        Node::Coord(n) => p.get(n).ok_or_else(|| ExprError::Unbound(n.clone()))?,
        Node::Sum(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += evaluate(t, p, env)?;
            }
            acc
        }
        Node::Product(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= evaluate(f, p, env)?;
            }
            acc
        }
        Node::Quotient(a, b) => {
            let den = evaluate(b, p, env)?;
            if den == 0.0 {
                return Err(ExprError::Domain(format!("division by zero in `{e}`")));
            }
            evaluate(a, p, env)? / den
        }
        Node::Power(b, q) => {
            let base = evaluate(b, p, env)?;
            power(base, q).map_err(|m| ExprError::Domain(format!("{m} in `{e}`")))?
        }
        Node::Neg(a) => -evaluate(a, p, env)?,
        Node::Func(f, a) => {
            let x = evaluate(a, p, env)?;
            apply_func(*f, x).map_err(|m| ExprError::Domain(format!("{m} in `{e}`")))?
        }
    })
}

pub(crate) fn power(base: f64, q: &Rational) -> Result<f64, &'static str> {
    if q.is_integer() {
        let n = q.to_i32().ok_or("exponent out of range")?;
        if base == 0.0 && n < 0 {
            return Err("division by zero");
        }
        return Ok(base.powi(n));
    }
    if base < 0.0 {
        return Err("fractional power of a negative number");
    }
    if base == 0.0 && rational_to_f64(q) < 0.0 {
        return Err("division by zero");
    }
    Ok(base.powf(rational_to_f64(q)))
}

pub(crate) fn apply_func(f: Func, x: f64) -> Result<f64, &'static str> {
    Ok(match f {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Tan => {
            if x.cos() == 0.0 {
                return Err("tan at a pole");
            }
            x.tan()
        }
        Func::Exp => x.exp(),
        Func::Log => {
            if x <= 0.0 {
                return Err("log of a non-positive number");
            }
            x.ln()
        }
        Func::Sqrt => {
            if x < 0.0 {
                return Err("sqrt of a negative number");
            }
            x.sqrt()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprkit::parse::{parse, parse_with_params};

    #[test]
    fn potential_at_r4() {
        let e = parse_with_params("(4*m+r)/r", &["m"]).unwrap();
        let v = evaluate(
            &e,
            &Point::from_pairs(&[("r", 4.0)]),
            &ParamEnv::from_pairs(&[("m", 1.0)]),
        )
        .unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn zero_times_anything() {
        let e = parse("0*x").unwrap();
        let v = evaluate(&e, &Point::from_pairs(&[("x", 123.5)]), &ParamEnv::default()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn domain_errors() {
        let env = ParamEnv::default();
        let at0 = Point::from_pairs(&[("r", 0.0)]);
        assert!(matches!(
            evaluate(&parse("1/r").unwrap(), &at0, &env),
            Err(ExprError::Domain(_))
        ));
        assert!(matches!(
            evaluate(&parse("log(r)").unwrap(), &at0, &env),
            Err(ExprError::Domain(_))
        ));
        let neg = Point::from_pairs(&[("r", -1.0)]);
        assert!(matches!(
            evaluate(&parse("sqrt(r)").unwrap(), &neg, &env),
            Err(ExprError::Domain(_))
        ));
        assert_eq!(
            evaluate(&parse("q").unwrap(), &at0, &env),
            Err(ExprError::Unbound("q".into()))
        );
    }
}
