use std::collections::HashMap;

use super::eval::{apply_func, power, rational_to_f64};
use super::{Expr, ExprError, Func, Node, ParamEnv};

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Input(usize),
    Sum(Vec<usize>),
    Product(Vec<usize>),
    Quotient(usize, usize),
    Power(usize, super::Rational),
    Neg(usize),
    Func(Func, usize),
}

/// A batch of expressions flattened into one instruction tape.
///
/// Coordinates become positional inputs, parameters are frozen at compile
/// time and shared subexpressions are evaluated once.
#[derive(Clone, Debug)]
pub struct CompiledExprs {
    ops: Vec<Op>,
    outputs: Vec<usize>,
    inputs: usize,
}

impl CompiledExprs {
    pub fn new(exprs: &[Expr], coords: &[String], params: &ParamEnv) -> Result<CompiledExprs, ExprError> {
        let mut b = Builder {
            ops: Vec::new(),
            seen: HashMap::new(),
            coords,
            params,
        };
        let outputs = exprs.iter().map(|e| b.visit(e)).collect::<Result<_, _>>()?;
        Ok(CompiledExprs {
            ops: b.ops,
            outputs,
            inputs: coords.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Evaluates every output at `x`, writing into `out`.
    pub fn eval_into(&self, x: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) -> Result<(), ExprError> {
        assert_eq!(x.len(), self.inputs, "input length");
        scratch.clear();
        for op in &self.ops {
            let v = match op {
                Op::Const(c) => *c,
                Op::Input(i) => x[*i],
                Op::Sum(ts) => ts.iter().map(|t| scratch[*t]).sum(),
                Op::Product(fs) => fs.iter().map(|f| scratch[*f]).product(),
                Op::Quotient(a, b) => {
                    let den = scratch[*b];
                    if den == 0.0 {
                        return Err(ExprError::Domain("division by zero".into()));
                    }
                    scratch[*a] / den
                }
                Op::Power(b, q) => power(scratch[*b], q).map_err(|m| ExprError::Domain(m.into()))?,
                Op::Neg(a) => -scratch[*a],
                Op::Func(f, a) => apply_func(*f, scratch[*a]).map_err(|m| ExprError::Domain(m.into()))?,
            };
            scratch.push(v);
        }
        for (o, idx) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[*idx];
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, ExprError> {
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_into(x, &mut Vec::with_capacity(self.ops.len()), &mut out)?;
        Ok(out)
    }
}

struct Builder<'a> {
    ops: Vec<Op>,
    seen: HashMap<Expr, usize>,
    coords: &'a [String],
    params: &'a ParamEnv,
}

impl Builder<'_> {
    fn visit(&mut self, e: &Expr) -> Result<usize, ExprError> {
        if let Some(i) = self.seen.get(e) {
            return Ok(*i);
        }
        let op = match e.node() {
            Node::Const(c) => Op::Const(rational_to_f64(c)),
            Node::Param(n) => Op::Const(self.params.get(n).ok_or_else(|| ExprError::Unbound(n.clone()))?),
            Node::Coord(n) => match self.coords.iter().position(|c| c == n) {
                Some(i) => Op::Input(i),
                None => Op::Const(self.params.get(n).ok_or_else(|| ExprError::Unbound(n.clone()))?),
            },
            Node::Sum(ts) => Op::Sum(ts.iter().map(|t| self.visit(t)).collect::<Result<_, _>>()?),
            Node::Product(fs) => Op::Product(fs.iter().map(|f| self.visit(f)).collect::<Result<_, _>>()?),
            Node::Quotient(a, b) => Op::Quotient(self.visit(a)?, self.visit(b)?),
            Node::Power(b, q) => Op::Power(self.visit(b)?, q.clone()),
            Node::Neg(a) => Op::Neg(self.visit(a)?),
            Node::Func(f, a) => Op::Func(*f, self.visit(a)?),
        };
        self.ops.push(op);
        let idx = self.ops.len() - 1;
        self.seen.insert(e.clone(), idx);
        Ok(idx)
    }
}
