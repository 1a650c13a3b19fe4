//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A jet stores the Taylor coefficients of a function around a base point up
//! to a fixed total degree. Arithmetic and elementary functions act on jets
//! exactly up to roundoff, and `deriv` shifts coefficients, so composite
//! differential operators can be evaluated at a point without building large
//! symbolic trees. Each jet tracks how many orders of its coefficients are
//! still valid; differentiation consumes one.

use std::collections::HashMap;
use std::sync::Arc;

use super::error::ExprError;
use super::eval::{power, rational_to_f64};
use super::expr::{Expr, Func, Node};

/// Monomial bookkeeping shared by all jets of one dimension and order.
#[derive(Debug)]
pub struct JetSpace {
    dim: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    products: Vec<(usize, usize, usize)>,
    // for each variable i and monomial a: (index of a + e_i, a_i + 1) when within order
    shifts: Vec<Vec<Option<(usize, f64)>>>,
}

impl JetSpace {
    pub fn new(dim: usize, order: usize) -> Arc<JetSpace> {
        let mut monomials = Vec::new();
        for deg in 0..=order {
            let mut cur = vec![0u8; dim];
            enumerate(dim, deg, 0, &mut cur, &mut monomials);
        }
        let index: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                let s: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if let Some(&k) = index.get(&s) {
                    products.push((i, j, k));
                }
            }
        }
        let shifts = (0..dim)
            .map(|v| {
                monomials
                    .iter()
                    .map(|m| {
                        let mut up = m.clone();
                        up[v] += 1;
                        index.get(&up).map(|&k| (k, up[v] as f64))
                    })
                    .collect()
            })
            .collect();
        Arc::new(JetSpace {
            dim,
            order,
            monomials,
            index,
            products,
            shifts,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }
}

fn enumerate(dim: usize, left: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if pos + 1 == dim {
        cur[pos] = left as u8;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    if dim == 0 {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k as u8;
        enumerate(dim, left - k, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// A truncated Taylor polynomial around a fixed base point.
#[derive(Clone, Debug)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
    valid: usize,
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, c: f64) -> Jet {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = c;
        Jet {
            space: space.clone(),
            coeffs,
            valid: space.order,
        }
    }

    pub fn zero(space: &Arc<JetSpace>) -> Jet {
        Jet::constant(space, 0.0)
    }

    /// The coordinate function `x_i` around base value `at`.
    pub fn variable(space: &Arc<JetSpace>, i: usize, at: f64) -> Jet {
        let mut j = Jet::constant(space, at);
        if space.order >= 1 {
            let mut m = vec![0u8; space.dim];
            m[i] = 1;
            j.coeffs[space.index[&m]] = 1.0;
        }
        j
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    /// Number of derivative orders that are still exact.
    pub fn valid_order(&self) -> usize {
        self.valid
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    /// First partial derivative at the base point.
    pub fn partial(&self, i: usize) -> f64 {
        match self.space.shifts[i][0] {
            Some((k, _)) => self.coeffs[k],
            None => 0.0,
        }
    }

    pub fn deriv(&self, i: usize) -> Jet {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for (a, slot) in self.space.shifts[i].iter().enumerate() {
            if let Some((k, f)) = slot {
                coeffs[a] = self.coeffs[*k] * f;
            }
        }
        Jet {
            space: self.space.clone(),
            coeffs,
            valid: self.valid.saturating_sub(1),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            valid: self.valid,
        }
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
            valid: self.valid.min(o.valid),
        }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect(),
            valid: self.valid.min(o.valid),
        }
    }

    /// `self += s * o`
    pub fn axpy(&mut self, s: f64, o: &Jet) {
        for (a, b) in self.coeffs.iter_mut().zip(&o.coeffs) {
            *a += s * b;
        }
        self.valid = self.valid.min(o.valid);
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for &(i, j, k) in &self.space.products {
            coeffs[k] += self.coeffs[i] * o.coeffs[j];
        }
        Jet {
            space: self.space.clone(),
            coeffs,
            valid: self.valid.min(o.valid),
        }
    }

    fn nonconstant(&self) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        h
    }

    /// Composes a scalar function with known derivatives `d[k] = f^(k)(a0)`.
    pub fn compose(&self, d: &[f64]) -> Jet {
        let h = self.nonconstant();
        let mut out = Jet::constant(&self.space, d[0]);
        out.valid = self.valid;
        let mut hk = Jet::constant(&self.space, 1.0);
        let mut fact = 1.0;
        for (k, dk) in d.iter().enumerate().skip(1).take(self.space.order) {
            hk = hk.mul(&h);
            fact *= k as f64;
            out.axpy(dk / fact, &hk);
        }
        out
    }

    pub fn recip(&self) -> Result<Jet, ExprError> {
        let a = self.value();
        if a == 0.0 {
            return Err(ExprError::Domain("division by zero".into()));
        }
        Ok(self.compose(&power_derivs(a, -1.0, self.space.order)))
    }

    pub fn div(&self, o: &Jet) -> Result<Jet, ExprError> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn powf(&self, q: f64) -> Jet {
        self.compose(&power_derivs(self.value(), q, self.space.order))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(&cyclic([s, c, -s, -c], self.space.order))
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(&cyclic([c, -s, -c, s], self.space.order))
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.space.order + 1])
    }

    pub fn ln(&self) -> Result<Jet, ExprError> {
        let a = self.value();
        if a <= 0.0 {
            return Err(ExprError::Domain(format!("log of non-positive value {a}")));
        }
        let mut d = vec![a.ln()];
        let mut fact = 1.0;
        for k in 1..=self.space.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * fact / a.powi(k as i32));
            fact *= k as f64;
        }
        Ok(self.compose(&d))
    }
}

fn cyclic(pattern: [f64; 4], order: usize) -> Vec<f64> {
    (0..=order).map(|k| pattern[k % 4]).collect()
}

fn power_derivs(a: f64, q: f64, order: usize) -> Vec<f64> {
    let mut d = Vec::with_capacity(order + 1);
    let mut coef = 1.0;
    for k in 0..=order {
        d.push(coef * a.powf(q - k as f64));
        coef *= q - k as f64;
    }
    d
}

/// Evaluates expressions into jets at a base point, caching shared subtrees.
pub struct JetEvaluator<'a> {
    space: Arc<JetSpace>,
    coords: &'a [String],
    point: &'a [f64],
    params: &'a super::eval::ParamEnv,
    cache: HashMap<usize, Jet>,
}

impl<'a> JetEvaluator<'a> {
    pub fn new(
        space: &Arc<JetSpace>,
        coords: &'a [String],
        point: &'a [f64],
        params: &'a super::eval::ParamEnv,
    ) -> JetEvaluator<'a> {
        JetEvaluator {
            space: space.clone(),
            coords,
            point,
            params,
            cache: HashMap::new(),
        }
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Jet, ExprError> {
        let key = e.node() as *const Node as usize;
        if let Some(j) = self.cache.get(&key) {
            return Ok(j.clone());
        }
        let j = self.compute(e)?;
        self.cache.insert(key, j.clone());
        Ok(j)
    }

    fn compute(&mut self, e: &Expr) -> Result<Jet, ExprError> {
        let sp = self.space.clone();
        Ok(match e.node() {
            Node::Const(c) => Jet::constant(&sp, rational_to_f64(c)),
            Node::Param(name) => match self.params.get(name) {
                Some(v) => Jet::constant(&sp, v),
                None => return Err(ExprError::Unbound(name.clone())),
            },
            Node::Coord(name) => match self.coords.iter().position(|c| c == name) {
                Some(i) => Jet::variable(&sp, i, self.point[i]),
                None => match self.params.get(name) {
                    Some(v) => Jet::constant(&sp, v),
                    None => return Err(ExprError::Unbound(name.clone())),
                },
            },
            Node::Sum(ts) => {
                let mut acc = Jet::zero(&sp);
                for t in ts {
                    acc = acc.add(&self.eval(t)?);
                }
                acc
            }
            Node::Product(fs) => {
                let mut acc = Jet::constant(&sp, 1.0);
                for f in fs {
                    acc = acc.mul(&self.eval(f)?);
                }
                acc
            }
            Node::Quotient(a, b) => {
                let a = self.eval(a)?;
                a.div(&self.eval(b)?)?
            }
            Node::Neg(a) => self.eval(a)?.scale(-1.0),
            Node::Power(b, q) => {
                let base = self.eval(b)?;
                let qf = rational_to_f64(q);
                if q.is_integer() {
                    let n = qf as i64;
                    if n >= 0 {
                        let mut acc = Jet::constant(&sp, 1.0);
                        for _ in 0..n {
                            acc = acc.mul(&base);
                        }
                        acc
                    } else {
                        // reuse the scalar domain checks
                        power(base.value(), q).map_err(|m| ExprError::Domain(m.into()))?;
                        base.powf(qf)
                    }
                } else {
                    power(base.value(), q).map_err(|m| ExprError::Domain(m.into()))?;
                    if base.value() == 0.0 {
                        return Err(ExprError::Domain("non-smooth power at zero".into()));
                    }
                    base.powf(qf)
                }
            }
            Node::Func(f, a) => {
                let a = self.eval(a)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => {
                        if a.value().cos() == 0.0 {
                            return Err(ExprError::Domain("tan pole".into()));
                        }
                        a.sin().div(&a.cos())?
                    }
                    Func::Exp => a.exp(),
                    Func::Log => a.ln()?,
                    Func::Sqrt => {
                        if a.value() <= 0.0 {
                            return Err(ExprError::Domain(format!(
                                "sqrt not smooth at {}",
                                a.value()
                            )));
                        }
                        a.powf(0.5)
                    }
                }
            }
        })
    }
}

/// Dense square-matrix inverse of a jet matrix by a Neumann series around its
/// constant part.
pub fn invert_matrix(m: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>, ExprError> {
    let n = m.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let space = m[0][0].space().clone();
    let m0: Vec<Vec<f64>> = m
        .iter()
        .map(|row| row.iter().map(|j| j.value()).collect())
        .collect();
    let inv0 = invert_f64(&m0)
        .ok_or_else(|| ExprError::Domain("singular matrix at base point".into()))?;
    // H = M - M0 ; N = -inv0 * H ; inverse = sum_k N^k inv0
    let n_mat: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = Jet::zero(&space);
                    for (k, row) in inv0[i].iter().enumerate() {
                        acc.axpy(-row, &m[k][j].nonconstant());
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let const_mat = |a: &Vec<Vec<f64>>| -> Vec<Vec<Jet>> {
        a.iter()
            .map(|row| row.iter().map(|&v| Jet::constant(&space, v)).collect())
            .collect()
    };
    let mut term = const_mat(&inv0);
    let mut total = term.clone();
    for _ in 0..space.order() {
        term = mat_mul(&n_mat, &term);
        for i in 0..n {
            for j in 0..n {
                total[i][j] = total[i][j].add(&term[i][j]);
            }
        }
    }
    Ok(total)
}

pub fn mat_mul(a: &[Vec<Jet>], b: &[Vec<Jet>]) -> Vec<Vec<Jet>> {
    let space = a[0][0].space().clone();
    let (n, k, p) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let mut acc = Jet::zero(&space);
                    for l in 0..k {
                        acc = acc.add(&a[i][l].mul(&b[l][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert_f64(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    let pivot_row = a[col].clone();
                    for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}
