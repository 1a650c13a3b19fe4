//! Terminating, sound simplifier.
//!
//! Every node is brought into a sum of monomials `c * b1^e1 * ... * bk^ek`
//! with exact rational coefficients and exponents. Bases are atoms:
//! coordinates, parameters, function applications, or normalized sums that
//! were too large to expand. Products of sums are distributed while the
//! expansion stays below a fixed term budget; beyond it the sums are kept as
//! atoms. `cos(u)^n` with integer `n >= 2` is rewritten through
//! `cos(u)^2 = 1 - sin(u)^2`, which in particular sends `sin^2 + cos^2` to 1.
//!
//! No completeness is claimed: two equal expressions may simplify to
//! different trees. Residual checks are confirmed numerically.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::expr::{rat, Expr, Func, Node, Rational};

const EXPANSION_BUDGET: usize = 128;

type Mono = Vec<(Expr, Rational)>;
type Poly = BTreeMap<Mono, Rational>;

/// Simplifies an expression. The result evaluates to the same value as the
/// input wherever the input is defined.
pub fn simplify(e: &Expr) -> Expr {
    let mut s = Simplifier::default();
    let p = s.poly(e);
    poly_to_expr(&p)
}

#[derive(Default)]
struct Simplifier {
    cache: HashMap<usize, Rc<Poly>>,
}

fn constant_poly(c: Rational) -> Poly {
    let mut p = Poly::new();
    if !c.is_zero() {
        p.insert(Vec::new(), c);
    }
    p
}

fn atom_poly(base: Expr, exponent: Rational) -> Poly {
    let mut p = Poly::new();
    if exponent.is_zero() {
        p.insert(Vec::new(), rat(1));
    } else {
        p.insert(vec![(base, exponent)], rat(1));
    }
    p
}

fn add_into(acc: &mut Poly, other: &Poly, sign: &Rational) {
    for (m, c) in other {
        let entry = acc.entry(m.clone()).or_insert_with(Rational::zero);
        *entry += c * sign;
        if entry.is_zero() {
            acc.remove(m);
        }
    }
}

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out: Mono = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            out.push(b[j].clone());
            j += 1;
        } else {
            let e = &a[i].1 + &b[j].1;
            if !e.is_zero() {
                out.push((a[i].0.clone(), e));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m = mono_mul(ma, mb);
            let entry = out.entry(m.clone()).or_insert_with(Rational::zero);
            *entry += ca * cb;
            if entry.is_zero() {
                out.remove(&m);
            }
        }
    }
    rewrite_cos_squares(out)
}

fn as_constant(p: &Poly) -> Option<Rational> {
    match p.len() {
        0 => Some(Rational::zero()),
        1 => p.get(&Vec::new()).cloned(),
        _ => None,
    }
}

// cos(u)^n -> cos(u)^(n-2) * (1 - sin(u)^2) for integer n >= 2, until none left.
fn rewrite_cos_squares(p: Poly) -> Poly {
    let needs = |m: &Mono| {
        m.iter().any(|(b, e)| {
            matches!(b.node(), Node::Func(Func::Cos, _)) && e.is_integer() && *e >= rat(2)
        })
    };
    if !p.keys().any(needs) {
        return p;
    }
    let mut out = Poly::new();
    let mut work: Vec<(Mono, Rational)> = p.into_iter().collect();
    while let Some((m, c)) = work.pop() {
        let pos = m.iter().position(|(b, e)| {
            matches!(b.node(), Node::Func(Func::Cos, _)) && e.is_integer() && *e >= rat(2)
        });
        match pos {
            None => {
                let entry = out.entry(m.clone()).or_insert_with(Rational::zero);
                *entry += c;
                if entry.is_zero() {
                    out.remove(&m);
                }
            }
            Some(i) => {
                let arg = match m[i].0.node() {
                    Node::Func(_, a) => a.clone(),
                    _ => unreachable!(),
                };
                let mut lowered = m.clone();
                let e = &lowered[i].1 - rat(2);
                if e.is_zero() {
                    lowered.remove(i);
                } else {
                    lowered[i].1 = e;
                }
                let sin_sq: Mono = vec![(Expr::sin(arg), rat(2))];
                work.push((lowered.clone(), c.clone()));
                work.push((mono_mul(&lowered, &sin_sq), -c));
            }
        }
    }
    out
}

// Splits a multi-term polynomial into (coefficient, content monomial, primitive
// sum) so that equal sums up to scaling share one atom.
fn normalize_sum(p: &Poly) -> (Rational, Mono, Expr) {
    // content: per base, the minimum exponent over all terms (absent = 0)
    let mut bases: BTreeMap<Expr, Rational> = BTreeMap::new();
    for m in p.keys() {
        for (b, _) in m {
            bases.entry(b.clone()).or_insert_with(Rational::zero);
        }
    }
    let mut content: Mono = Vec::new();
    for (b, _) in bases {
        let mut min: Option<Rational> = None;
        for m in p.keys() {
            let e = m
                .iter()
                .find(|(bb, _)| *bb == b)
                .map(|(_, e)| e.clone())
                .unwrap_or_else(Rational::zero);
            min = Some(match min {
                None => e,
                Some(cur) => {
                    if e < cur {
                        e
                    } else {
                        cur
                    }
                }
            });
        }
        let min = min.unwrap_or_else(Rational::zero);
        if !min.is_zero() {
            content.push((b, min));
        }
    }
    let inv_content: Mono = content.iter().map(|(b, e)| (b.clone(), -e.clone())).collect();
    let lead = p.values().next().cloned().unwrap_or_else(|| rat(1));
    let mut primitive = Poly::new();
    for (m, c) in p {
        primitive.insert(mono_mul(m, &inv_content), c / &lead);
    }
    (lead, content, poly_to_expr(&primitive))
}

fn poly_pow_int(p: &Poly, n: i64) -> Poly {
    let mut acc = constant_poly(rat(1));
    for _ in 0..n {
        acc = poly_mul(&acc, p);
    }
    acc
}

fn mono_pow(m: &Mono, q: &Rational) -> Mono {
    m.iter().map(|(b, e)| (b.clone(), e * q)).collect()
}

fn rational_pow_int(c: &Rational, n: i64) -> Rational {
    let mut acc = rat(1);
    let base = if n < 0 { c.recip() } else { c.clone() };
    for _ in 0..n.unsigned_abs() {
        acc *= &base;
    }
    acc
}

fn exact_sqrt(c: &Rational) -> Option<Rational> {
    if c.is_negative() {
        return None;
    }
    let (n, d) = (c.numer(), c.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(Rational::new(rn, rd))
    } else {
        None
    }
}

impl Simplifier {
    fn poly(&mut self, e: &Expr) -> Rc<Poly> {
        let key = e.node() as *const Node as usize;
        if let Some(p) = self.cache.get(&key) {
            return p.clone();
        }
        let p = Rc::new(self.compute(e));
        self.cache.insert(key, p.clone());
        p
    }

    fn compute(&mut self, e: &Expr) -> Poly {
        match e.node() {
            Node::Const(c) => constant_poly(c.clone()),
            Node::Param(_) | Node::Coord(_) => atom_poly(e.clone(), rat(1)),
            Node::Sum(ts) => {
                let mut acc = Poly::new();
                for t in ts {
                    let p = self.poly(t);
                    add_into(&mut acc, &p, &rat(1));
                }
                rewrite_cos_squares(acc)
            }
            Node::Neg(a) => {
                let p = self.poly(a);
                p.iter().map(|(m, c)| (m.clone(), -c)).collect()
            }
            Node::Product(fs) => {
                let polys: Vec<Rc<Poly>> = fs.iter().map(|f| self.poly(f)).collect();
                self.product(polys.iter().map(|p| p.as_ref().clone()).collect())
            }
            Node::Quotient(a, b) => {
                let num = self.poly(a).as_ref().clone();
                let den = self.poly(b);
                let inv = self.power(&den, &rat(-1));
                self.product(vec![num, inv])
            }
            Node::Power(b, q) => {
                let base = self.poly(b);
                self.power(&base, q)
            }
            Node::Func(f, a) => {
                let arg = self.poly(a);
                self.func(*f, &arg)
            }
        }
    }

    fn product(&mut self, polys: Vec<Poly>) -> Poly {
        if polys.iter().any(|p| p.is_empty()) {
            return Poly::new();
        }
        let total = polys
            .iter()
            .fold(1usize, |acc, p| acc.saturating_mul(p.len().max(1)));
        let mut acc = constant_poly(rat(1));
        for p in polys {
            let factor = if total > EXPANSION_BUDGET && p.len() > 1 {
                self.atomize(&p, &rat(1))
            } else {
                p
            };
            acc = poly_mul(&acc, &factor);
        }
        acc
    }

    // p^q kept as a single atom (after pulling out scale and content when q is an integer).
    fn atomize(&mut self, p: &Poly, q: &Rational) -> Poly {
        if q.is_integer() && p.len() > 1 {
            let (lead, content, sum) = normalize_sum(p);
            let n = q.to_i64().unwrap_or(1);
            let mut out = Poly::new();
            let mut m = mono_pow(&content, q);
            m = mono_mul(&m, &vec![(sum, q.clone())]);
            out.insert(m, rational_pow_int(&lead, n));
            return out;
        }
        atom_poly(poly_to_expr(p), q.clone())
    }

    fn power(&mut self, p: &Poly, q: &Rational) -> Poly {
        if q.is_zero() {
            return constant_poly(rat(1));
        }
        if let Some(c) = as_constant(p) {
            if q.is_integer() {
                if c.is_zero() {
                    if q.is_positive() {
                        return Poly::new();
                    }
                    return atom_poly(Expr::int(0), q.clone());
                }
                return constant_poly(rational_pow_int(&c, q.to_i64().unwrap_or(1)));
            }
            if *q == Rational::new(BigInt::from(1), BigInt::from(2)) {
                if let Some(r) = exact_sqrt(&c) {
                    return constant_poly(r);
                }
            }
            return atom_poly(Expr::constant(c), q.clone());
        }
        if q.is_integer() {
            let n = q.to_i64().unwrap_or(1);
            if p.len() == 1 {
                let (m, c) = p.iter().next().unwrap();
                let mut out = Poly::new();
                out.insert(mono_pow(m, q), rational_pow_int(c, n));
                return rewrite_cos_squares(out);
            }
            if n > 0 && (p.len() as f64).powi(n as i32) <= EXPANSION_BUDGET as f64 {
                return poly_pow_int(p, n);
            }
            return self.atomize(p, q);
        }
        // fractional exponent: only a bare atom with unit coefficient combines
        if p.len() == 1 {
            let (m, c) = p.iter().next().unwrap();
            if c.is_one() && m.len() == 1 && m[0].1.is_one() {
                return atom_poly(m[0].0.clone(), q.clone());
            }
        }
        atom_poly(poly_to_expr(p), q.clone())
    }

    fn func(&mut self, f: Func, arg: &Poly) -> Poly {
        if let Some(c) = as_constant(arg) {
            if c.is_zero() {
                match f {
                    Func::Sin | Func::Tan | Func::Sqrt => return Poly::new(),
                    Func::Cos | Func::Exp => return constant_poly(rat(1)),
                    Func::Log => {}
                }
            }
            if c.is_one() && f == Func::Log {
                return Poly::new();
            }
            if f == Func::Sqrt {
                if let Some(r) = exact_sqrt(&c) {
                    return constant_poly(r);
                }
            }
        }
        atom_poly(Expr::func(f, poly_to_expr(arg)), rat(1))
    }
}

fn mono_to_expr(m: &Mono, c: &Rational) -> Expr {
    let mut factors: Vec<Expr> = Vec::with_capacity(m.len() + 1);
    if !c.is_one() {
        factors.push(Expr::constant(c.clone()));
    }
    for (b, e) in m {
        if e.is_one() {
            factors.push(b.clone());
        } else {
            factors.push(Expr::new(Node::Power(b.clone(), e.clone())));
        }
    }
    match factors.len() {
        0 => Expr::constant(c.clone()),
        1 => factors.pop().unwrap(),
        _ => Expr::new(Node::Product(factors)),
    }
}

fn poly_to_expr(p: &Poly) -> Expr {
    let mut terms: Vec<Expr> = p.iter().map(|(m, c)| mono_to_expr(m, c)).collect();
    match terms.len() {
        0 => Expr::zero(),
        1 => terms.pop().unwrap(),
        _ => Expr::new(Node::Sum(terms)),
    }
}
