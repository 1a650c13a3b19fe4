use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gamma::ExactMatrix;
use crate::exprkit::{simplify, Expr, Jet, JetSpace, Rational};
use crate::manifold::{Chart, LocalGeometry};

use super::SpinError;

/// Complex-valued jet `re + i·im`.
#[derive(Clone, Debug)]
pub struct CJet {
    pub re: Jet,
    pub im: Jet,
}

impl CJet {
    pub fn zero(space: &Arc<JetSpace>) -> CJet {
        CJet {
            re: Jet::zero(space),
            im: Jet::zero(space),
        }
    }

    pub fn real(j: Jet) -> CJet {
        let im = Jet::zero(j.space());
        CJet { re: j, im }
    }

    /// `c · j` for a complex constant and a real jet.
    pub fn scaled(j: &Jet, c: Complex64) -> CJet {
        CJet {
            re: j.scale(c.re),
            im: j.scale(c.im),
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    pub fn deriv(&self, i: usize) -> CJet {
        CJet {
            re: self.re.deriv(i),
            im: self.im.deriv(i),
        }
    }

    pub fn add(&self, o: &CJet) -> CJet {
        CJet {
            re: self.re.add(&o.re),
            im: self.im.add(&o.im),
        }
    }

    pub fn sub(&self, o: &CJet) -> CJet {
        CJet {
            re: self.re.sub(&o.re),
            im: self.im.sub(&o.im),
        }
    }

    pub fn scale(&self, c: Complex64) -> CJet {
        CJet {
            re: self.re.scale(c.re).sub(&self.im.scale(c.im)),
            im: self.re.scale(c.im).add(&self.im.scale(c.re)),
        }
    }

    pub fn mul(&self, o: &CJet) -> CJet {
        CJet {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn mul_real(&self, j: &Jet) -> CJet {
        CJet {
            re: self.re.mul(j),
            im: self.im.mul(j),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

/// Spinor field with complex components `re + i·im` over a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    pub components: Vec<(Expr, Expr)>,
}

impl SpinorField {
    pub fn new(components: Vec<(Expr, Expr)>) -> SpinorField {
        SpinorField { components }
    }

    pub fn constant(values: &[Complex64]) -> SpinorField {
        let c = |v: f64| Expr::constant(Rational::from_float(v).expect("finite spinor value"));
        SpinorField::new(values.iter().map(|z| (c(z.re), c(z.im))).collect())
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn add(&self, o: &SpinorField) -> SpinorField {
        SpinorField::new(
            self.components
                .iter()
                .zip(&o.components)
                .map(|((a, b), (c, d))| (a.clone() + c.clone(), b.clone() + d.clone()))
                .collect(),
        )
    }

    /// The spinor `U ψ` for an exact complex matrix `U`.
    pub fn transformed(&self, u: &ExactMatrix) -> SpinorField {
        let q = |r: &num_rational::Rational64| Expr::frac(*r.numer(), *r.denom());
        SpinorField::new(
            u.0.iter()
                .map(|row| {
                    let mut re = Vec::new();
                    let mut im = Vec::new();
                    for (z, (a, b)) in row.iter().zip(&self.components) {
                        // (x + iy)(a + ib) = (xa − yb) + i(xb + ya)
                        re.push(q(&z.re) * a.clone() - q(&z.im) * b.clone());
                        im.push(q(&z.re) * b.clone() + q(&z.im) * a.clone());
                    }
                    (simplify(&Expr::sum(re)), simplify(&Expr::sum(im)))
                })
                .collect(),
        )
    }

    /// Jets of all components at the point of `lg`.
    pub fn jets(&self, lg: &LocalGeometry) -> Result<Vec<CJet>, SpinError> {
        self.components
            .iter()
            .map(|(re, im)| {
                Ok(CJet {
                    re: lg.eval(re)?,
                    im: lg.eval(im)?,
                })
            })
            .collect()
    }
}

/// Deterministic bank of test spinors: each component is a sum of three terms
/// `c · (degree ≤ 2 monomial) · {1, sin θ, cos θ}`, where θ is the coordinate
/// named `theta` when present and the first coordinate otherwise.
pub fn spinor_bank(chart: &Chart, size: usize, count: usize, seed: u64) -> Vec<SpinorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = chart.coords();
    let angle = if chart.index_of("theta").is_some() { "theta" } else { coords[0].as_str() };
    let part = |rng: &mut ChaCha8Rng| -> Expr {
        let terms = (0..3)
            .map(|_| {
                let mut c: i64 = rng.gen_range(-3..=3);
                if c == 0 {
                    c = 1;
                }
                let mut t = Expr::int(c);
                for _ in 0..rng.gen_range(0..=2) {
                    t = t * Expr::coord(&coords[rng.gen_range(0..coords.len())]);
                }
                match rng.gen_range(0..3) {
                    1 => t * Expr::sin(Expr::coord(angle)),
                    2 => t * Expr::cos(Expr::coord(angle)),
                    _ => t,
                }
            })
            .collect();
        Expr::sum(terms)
    };
    (0..count)
        .map(|_| SpinorField::new((0..size).map(|_| (part(&mut rng), part(&mut rng))).collect()))
        .collect()
}
