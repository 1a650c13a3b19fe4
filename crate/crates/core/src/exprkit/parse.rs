//! Recursive-descent parser for the infix expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right associative, constant exponent
//! primary := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::error::ExprError;
use super::expr::{Expr, Func, Node, Rational};

/// Parses an expression; every identifier becomes a coordinate reference.
pub fn parse(src: &str) -> Result<Expr, ExprError> {
    parse_with_params(src, &[])
}

/// Parses an expression, treating the listed identifiers as parameters.
pub fn parse_with_params(src: &str, params: &[&str]) -> Result<Expr, ExprError> {
    let mut p = Parser {
        src,
        bytes: src.as_bytes(),
        pos: 0,
        params,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    params: &'a [&'a str],
}

// A parsed operand, remembering whether it was a bare numeric literal so that
// `-3` and `1/2` fold into exact constants while `-(3)` stays a negation.
struct Operand {
    expr: Expr,
    literal: bool,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> ExprError {
        ExprError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.term()?.expr];
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    terms.push(self.term()?.expr);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?.expr;
                    terms.push(Expr::new(Node::Neg(t)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::new(Node::Sum(terms))
        })
    }

    fn term(&mut self) -> Result<Operand, ExprError> {
        let first = self.unary()?;
        let mut literal = first.literal;
        let mut factors = vec![first.expr];
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    factors.push(self.unary()?.expr);
                    literal = false;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let den = self.unary()?;
                    let num = if factors.len() == 1 {
                        factors.pop().unwrap()
                    } else {
                        Expr::new(Node::Product(std::mem::take(&mut factors)))
                    };
                    let folded = match (literal && den.literal, num.as_const(), den.expr.as_const()) {
                        (true, Some(n), Some(d)) => {
                            if d.is_zero() {
                                self.pos = at;
                                return Err(self.err("division by zero literal"));
                            }
                            Some(Expr::constant(n / d))
                        }
                        _ => None,
                    };
                    match folded {
                        Some(c) => factors.push(c),
                        None => {
                            factors.push(Expr::new(Node::Quotient(num, den.expr)));
                            literal = false;
                        }
                    }
                }
                _ => break,
            }
        }
        let expr = if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::new(Node::Product(factors))
        };
        Ok(Operand { expr, literal })
    }

    fn unary(&mut self) -> Result<Operand, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary()?;
            if inner.literal {
                if let Some(c) = inner.expr.as_const() {
                    return Ok(Operand {
                        expr: Expr::constant(-c.clone()),
                        literal: true,
                    });
                }
            }
            return Ok(Operand {
                expr: Expr::new(Node::Neg(inner.expr)),
                literal: false,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Operand, ExprError> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let exponent = self.unary()?;
            let p = match exponent.expr.as_const() {
                Some(c) => c.clone(),
                None => {
                    self.pos = at;
                    return Err(self.err("exponent must be a rational constant"));
                }
            };
            return Ok(Operand {
                expr: Expr::new(Node::Power(base.expr, p)),
                literal: false,
            });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Operand, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(Operand {
                    expr: e,
                    literal: false,
                })
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Operand, ExprError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int_part = &self.src[start..self.pos];
        let mut frac_part = "";
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
            self.pos += 1;
            let fs = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            frac_part = &self.src[fs..self.pos];
        }
        if int_part.is_empty() && frac_part.is_empty() {
            self.pos = start;
            return Err(self.err("malformed number"));
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = digits.parse().map_err(|_| ExprError::Syntax {
            offset: start,
            message: "malformed number".into(),
        })?;
        let mut denom = BigInt::one();
        for _ in 0..frac_part.len() {
            denom *= 10;
        }
        Ok(Operand {
            expr: Expr::constant(Rational::new(numer, denom)),
            literal: true,
        })
    }

    fn ident(&mut self) -> Result<Operand, ExprError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        if self.peek() == Some(b'(') {
            let f = Func::from_name(name).ok_or_else(|| ExprError::UnknownFunction {
                name: name.to_string(),
                offset: start,
            })?;
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.err("expected `)` after function argument"));
            }
            self.pos += 1;
            return Ok(Operand {
                expr: Expr::func(f, arg),
                literal: false,
            });
        }
        let expr = if self.params.contains(&name) {
            Expr::param(name)
        } else {
            Expr::coord(name)
        };
        Ok(Operand {
            expr,
            literal: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprkit::expr::{rat, ratio};

    #[test]
    fn parses_zero() {
        assert_eq!(parse("0").unwrap(), Expr::int(0));
    }

    #[test]
    fn parses_taub_nut_potential() {
        let e = parse_with_params("(4*m + r)/r", &["m"]).unwrap();
        let expected = Expr::new(Node::Quotient(
            Expr::new(Node::Sum(vec![
                Expr::new(Node::Product(vec![Expr::int(4), Expr::param("m")])),
                Expr::coord("r"),
            ])),
            Expr::coord("r"),
        ));
        assert_eq!(e, expected);
    }

    #[test]
    fn parses_power_of_function() {
        let e = parse("sin(theta)^2").unwrap();
        assert_eq!(
            e,
            Expr::new(Node::Power(Expr::sin(Expr::coord("theta")), rat(2)))
        );
    }

    #[test]
    fn power_is_right_associative_and_binds_tighter_than_minus() {
        assert_eq!(
            parse("-x^2").unwrap(),
            Expr::new(Node::Neg(Expr::new(Node::Power(Expr::coord("x"), rat(2)))))
        );
        // 2^-1 folds to a constant exponent
        assert_eq!(
            parse("x^-1").unwrap(),
            Expr::new(Node::Power(Expr::coord("x"), rat(-1)))
        );
    }

    #[test]
    fn literal_rationals_fold() {
        assert_eq!(parse("1/2").unwrap(), Expr::constant(ratio(1, 2)));
        assert_eq!(parse("-3").unwrap(), Expr::int(-3));
        assert_eq!(parse("0.25").unwrap(), Expr::constant(ratio(1, 4)));
        assert_eq!(parse("-(3)").unwrap(), Expr::new(Node::Neg(Expr::int(3))));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("(x + 1") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("unexpected {other:?}"),
        }
        match parse("x + * y") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("x^y"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn unknown_function_is_rejected() {
        assert_eq!(
            parse("cosh(x)"),
            Err(ExprError::UnknownFunction {
                name: "cosh".into(),
                offset: 0
            })
        );
    }

    #[test]
    fn printed_form_reparses() {
        for src in [
            "(4*m + r)/r",
            "a - (b + c)",
            "-(a*b) + c",
            "x^(1/2)*y^(-2)",
            "(-3)*x + (1/2)",
            "a/b/c",
            "(a/b)*c",
            "sin(x - y)^2 - -z",
            "(a + b) + c",
            "(a*b)*c",
        ] {
            let e = parse_with_params(src, &["m"]).unwrap();
            let printed = e.to_string();
            assert_eq!(
                parse_with_params(&printed, &["m"]).unwrap(),
                e,
                "{src} -> {printed}"
            );
        }
    }
}
