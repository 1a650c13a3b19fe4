use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational constant stored inside expression trees.
pub type Rational = BigRational;

/// Elementary functions admitted by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Param(String),
    Coord(String),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Quotient(Expr, Expr),
    Power(Expr, Rational),
    Neg(Expr),
    Func(Func, Expr),
}

/// Immutable, cheaply clonable symbolic expression.
///
/// Constants are exact rationals; floating point only appears when an
/// expression is evaluated.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

impl Expr {
    pub fn new(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::new(Node::Const(c))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(rat(n))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::constant(ratio(n, d))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn coord(name: &str) -> Expr {
        Expr::new(Node::Coord(name.to_string()))
    }

    pub fn param(name: &str) -> Expr {
        Expr::new(Node::Param(name.to_string()))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().map_or(false, |c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().map_or(false, |c| c.is_one())
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        Expr::new(Node::Func(f, arg))
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::func(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::func(Func::Cos, arg)
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::func(Func::Exp, arg)
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::func(Func::Sqrt, arg)
    }

    /// Sum with trivial folding of zero terms.
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::sum(vec![a, b])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::sum(vec![a, Expr::neg(b)])
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut kept: Vec<Expr> = Vec::with_capacity(terms.len());
        for t in terms {
            if t.is_zero() {
                continue;
            }
            match t.node() {
                Node::Sum(inner) => kept.extend(inner.iter().cloned()),
                _ => kept.push(t),
            }
        }
        match kept.len() {
            0 => Expr::zero(),
            1 => kept.pop().unwrap(),
            _ => Expr::new(Node::Sum(kept)),
        }
    }

    /// Product with trivial folding of zero and unit factors.
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::product(vec![a, b])
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        let mut kept: Vec<Expr> = Vec::with_capacity(factors.len());
        for f in factors {
            if f.is_zero() {
                return Expr::zero();
            }
            if f.is_one() {
                continue;
            }
            match f.node() {
                Node::Product(inner) => kept.extend(inner.iter().cloned()),
                _ => kept.push(f),
            }
        }
        match kept.len() {
            0 => Expr::one(),
            1 => kept.pop().unwrap(),
            _ => Expr::new(Node::Product(kept)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return Expr::zero();
        }
        if b.is_one() {
            return a;
        }
        Expr::new(Node::Quotient(a, b))
    }

    pub fn neg(a: Expr) -> Expr {
        match a.node() {
            Node::Const(c) => Expr::constant(-c.clone()),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::new(Node::Neg(a)),
        }
    }

    pub fn scale(c: Rational, a: Expr) -> Expr {
        Expr::mul(Expr::constant(c), a)
    }

    pub fn pow(base: Expr, exponent: Rational) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return base;
        }
        Expr::new(Node::Power(base, exponent))
    }

    pub fn powi(base: Expr, n: i64) -> Expr {
        Expr::pow(base, rat(n))
    }

    /// Replaces coordinate references whose name is listed by parameter references.
    pub fn bind_params(&self, params: &[&str]) -> Expr {
        self.map_leaves(&|n| match n {
            Node::Coord(name) if params.contains(&name.as_str()) => Some(Expr::param(name)),
            _ => None,
        })
    }

    /// Substitutes coordinate references by expressions.
    pub fn substitute(&self, name: &str, value: &Expr) -> Expr {
        self.map_leaves(&|n| match n {
            Node::Coord(c) if c == name => Some(value.clone()),
            _ => None,
        })
    }

    fn map_leaves(&self, f: &dyn Fn(&Node) -> Option<Expr>) -> Expr {
        if let Some(e) = f(self.node()) {
            return e;
        }
        match self.node() {
            Node::Const(_) | Node::Param(_) | Node::Coord(_) => self.clone(),
            Node::Sum(ts) => Expr::new(Node::Sum(ts.iter().map(|t| t.map_leaves(f)).collect())),
            Node::Product(ts) => {
                Expr::new(Node::Product(ts.iter().map(|t| t.map_leaves(f)).collect()))
            }
            Node::Quotient(a, b) => Expr::new(Node::Quotient(a.map_leaves(f), b.map_leaves(f))),
            Node::Power(b, p) => Expr::new(Node::Power(b.map_leaves(f), p.clone())),
            Node::Neg(a) => Expr::new(Node::Neg(a.map_leaves(f))),
            Node::Func(g, a) => Expr::new(Node::Func(*g, a.map_leaves(f))),
        }
    }

    /// Number of nodes in the tree (shared subtrees counted each time).
    pub fn size(&self) -> usize {
        1 + match self.node() {
            Node::Const(_) | Node::Param(_) | Node::Coord(_) => 0,
            Node::Sum(ts) | Node::Product(ts) => ts.iter().map(Expr::size).sum(),
            Node::Quotient(a, b) => a.size() + b.size(),
            Node::Power(b, _) => b.size(),
            Node::Neg(a) | Node::Func(_, a) => a.size(),
        }
    }

    /// Coordinate names referenced by the expression.
    pub fn coordinates(&self, out: &mut std::collections::BTreeSet<String>) {
        match self.node() {
            Node::Coord(c) => {
                out.insert(c.clone());
            }
            Node::Const(_) | Node::Param(_) => {}
            Node::Sum(ts) | Node::Product(ts) => ts.iter().for_each(|t| t.coordinates(out)),
            Node::Quotient(a, b) => {
                a.coordinates(out);
                b.coordinates(out);
            }
            Node::Power(b, _) => b.coordinates(out),
            Node::Neg(a) | Node::Func(_, a) => a.coordinates(out),
        }
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

// Printing. The output is accepted by `parse` and reproduces the same tree.

fn fmt_rational(c: &Rational) -> String {
    if c.is_integer() {
        if c.is_negative() {
            format!("({})", c.numer())
        } else {
            format!("{}", c.numer())
        }
    } else {
        format!("({}/{})", c.numer(), c.denom())
    }
}

fn is_atom(e: &Expr) -> bool {
    match e.node() {
        Node::Param(_) | Node::Coord(_) | Node::Func(..) => true,
        Node::Const(c) => c.is_integer() && !c.is_negative(),
        _ => false,
    }
}

fn write_standalone(e: &Expr, out: &mut String) {
    match e.node() {
        Node::Const(c) => out.push_str(&fmt_rational(c)),
        Node::Param(n) | Node::Coord(n) => out.push_str(n),
        Node::Sum(ts) => {
            for (i, t) in ts.iter().enumerate() {
                if i == 0 {
                    write_wrapped(t, matches!(t.node(), Node::Sum(_)), out);
                    continue;
                }
                match t.node() {
                    Node::Neg(inner) => {
                        out.push_str(" - ");
                        write_wrapped(inner, matches!(inner.node(), Node::Sum(_)), out);
                    }
                    Node::Sum(_) => {
                        out.push_str(" + ");
                        write_wrapped(t, true, out);
                    }
                    _ => {
                        out.push_str(" + ");
                        write_standalone(t, out);
                    }
                }
            }
        }
        Node::Product(fs) => {
            for (i, f) in fs.iter().enumerate() {
                if i > 0 {
                    out.push('*');
                }
                let wrap = matches!(
                    f.node(),
                    Node::Sum(_) | Node::Neg(_) | Node::Product(_) | Node::Quotient(..)
                );
                write_wrapped(f, wrap, out);
            }
        }
        Node::Quotient(a, b) => {
            let wrap_num = matches!(a.node(), Node::Sum(_) | Node::Neg(_));
            write_wrapped(a, wrap_num, out);
            out.push('/');
            write_wrapped(b, !is_atom(b), out);
        }
        Node::Power(b, p) => {
            write_wrapped(b, !is_atom(b), out);
            out.push('^');
            out.push_str(&fmt_rational(p));
        }
        Node::Neg(a) => {
            out.push('-');
            let wrap = !(is_atom(a) || matches!(a.node(), Node::Power(..))) || a.as_const().is_some();
            write_wrapped(a, wrap, out);
        }
        Node::Func(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_standalone(a, out);
            out.push(')');
        }
    }
}

fn write_wrapped(e: &Expr, wrap: bool, out: &mut String) {
    if wrap {
        out.push('(');
        write_standalone(e, out);
        out.push(')');
    } else {
        write_standalone(e, out);
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_standalone(self, &mut s);
        f.write_str(&s)
    }
}
