use num_complex::{Complex, Complex64};
use num_rational::Rational64;
use num_traits::{One, Zero};

/// Exact Gaussian-rational complex number.
pub type GaussRat = Complex<Rational64>;

/// Dense square matrix with exact Gaussian-rational entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrix(pub Vec<Vec<GaussRat>>);

impl ExactMatrix {
    pub fn zero(n: usize) -> ExactMatrix {
        ExactMatrix(vec![vec![GaussRat::zero(); n]; n])
    }

    pub fn identity(n: usize) -> ExactMatrix {
        let mut m = ExactMatrix::zero(n);
        for i in 0..n {
            m.0[i][i] = GaussRat::one();
        }
        m
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, o: &ExactMatrix) -> ExactMatrix {
        let n = self.size();
        let mut out = ExactMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                if self.0[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.0[i][j] = out.0[i][j] + self.0[i][k] * o.0[k][j];
                }
            }
        }
        out
    }

    pub fn add(&self, o: &ExactMatrix) -> ExactMatrix {
        ExactMatrix(
            self.0
                .iter()
                .zip(&o.0)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        )
    }

    pub fn scale(&self, s: GaussRat) -> ExactMatrix {
        ExactMatrix(self.0.iter().map(|r| r.iter().map(|x| x * s).collect()).collect())
    }

    pub fn kron(&self, o: &ExactMatrix) -> ExactMatrix {
        let (n, m) = (self.size(), o.size());
        let mut out = ExactMatrix::zero(n * m);
        for i in 0..n {
            for j in 0..n {
                for k in 0..m {
                    for l in 0..m {
                        out.0[i * m + k][j * m + l] = self.0[i][j] * o.0[k][l];
                    }
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ExactMatrix {
        let n = self.size();
        ExactMatrix((0..n).map(|i| (0..n).map(|j| self.0[j][i].conj()).collect()).collect())
    }

    pub fn to_f64(&self) -> Vec<Vec<Complex64>> {
        let f = |r: &Rational64| *r.numer() as f64 / *r.denom() as f64;
        self.0
            .iter()
            .map(|row| row.iter().map(|z| Complex64::new(f(&z.re), f(&z.im))).collect())
            .collect()
    }
}

fn gauss(re: i64, im: i64) -> GaussRat {
    Complex::new(Rational64::from_integer(re), Rational64::from_integer(im))
}

fn pauli(k: usize) -> ExactMatrix {
    let z = gauss(0, 0);
    ExactMatrix(match k {
        1 => vec![vec![z, gauss(1, 0)], vec![gauss(1, 0), z]],
        2 => vec![vec![z, gauss(0, -1)], vec![gauss(0, 1), z]],
        3 => vec![vec![gauss(1, 0), z], vec![z, gauss(-1, 0)]],
        _ => return ExactMatrix::identity(2),
    })
}

fn kron_all(factors: &[ExactMatrix]) -> ExactMatrix {
    factors
        .iter()
        .fold(ExactMatrix::identity(1), |acc, f| acc.kron(f))
}

/// Gamma matrices `γ^a` with `γ^a γ^b + γ^b γ^a = 2 η^{ab}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaRep {
    pub signature: Vec<i8>,
    pub gammas: Vec<ExactMatrix>,
}

impl GammaRep {
    /// Brauer-Weyl tensor-product representation of size `2^⌊n/2⌋`;
    /// timelike directions (`η^{aa} = −1`) carry an extra factor `i`.
    pub fn new(signature: &[i8]) -> GammaRep {
        let n = signature.len();
        let k = n / 2;
        let mut gammas = Vec::with_capacity(n);
        for a in 0..n {
            let pair = a / 2;
            let factors: Vec<ExactMatrix> = (0..k)
                .map(|j| {
                    if j < pair {
                        pauli(3)
                    } else if j == pair {
                        pauli(1 + a % 2)
                    } else {
                        pauli(0)
                    }
                })
                .collect();
            let mut g = kron_all(&factors);
            if a == 2 * k {
                // odd dimension: the chirality product closes the algebra
                g = kron_all(&vec![pauli(3); k]);
            }
            if signature[a] < 0 {
                g = g.scale(gauss(0, 1));
            }
            gammas.push(g);
        }
        GammaRep {
            signature: signature.to_vec(),
            gammas,
        }
    }

    pub fn dim(&self) -> usize {
        self.signature.len()
    }

    /// Number of spinor components.
    pub fn size(&self) -> usize {
        self.gammas[0].size()
    }

    /// The fixed unitary `U = u ⊗ … ⊗ u`, `u = [[3/5, 4i/5], [4i/5, 3/5]]`.
    pub fn conjugator(&self) -> ExactMatrix {
        let r = |n: i64| Rational64::new(n, 5);
        let u = ExactMatrix(vec![
            vec![Complex::new(r(3), r(0)), Complex::new(r(0), r(4))],
            vec![Complex::new(r(0), r(4)), Complex::new(r(3), r(0))],
        ]);
        kron_all(&vec![u; self.dim() / 2])
    }

    /// The representation `U γ^a U†` for `U` = [`GammaRep::conjugator`].
    pub fn conjugated(&self) -> GammaRep {
        let big = self.conjugator();
        let adj = big.adjoint();
        GammaRep {
            signature: self.signature.clone(),
            gammas: self.gammas.iter().map(|g| big.mul(g).mul(&adj)).collect(),
        }
    }

    /// Checks the Clifford relation in exact arithmetic.
    pub fn clifford_holds(&self) -> bool {
        let n = self.size();
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                let anti = self.gammas[a].mul(&self.gammas[b]).add(&self.gammas[b].mul(&self.gammas[a]));
                let expect = if a == b {
                    ExactMatrix::identity(n).scale(gauss(2 * self.signature[a] as i64, 0))
                } else {
                    ExactMatrix::zero(n)
                };
                if anti != expect {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_f64(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.gammas.iter().map(|g| g.to_f64()).collect()
    }
}
