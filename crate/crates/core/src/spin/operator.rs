use num_complex::Complex64;

use super::frame::Frame;
use super::gamma::GammaRep;
use super::spinor::{CJet, SpinorField};
use super::SpinError;
use crate::exprkit::Jet;
use crate::killing::{killing_vector_residual, ky_residual, CheckOptions, ResidualReport};
use crate::manifold::{sample_points, JetTensor, LocalGeometry, Manifold, TensorField, Variance};

/// Which first-order spinor operator to build.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorSpec {
    /// `D_s = i γ^μ ∇_μ`.
    StandardDirac,
    /// `X = −i(R^μ ∇_μ − ¼ γ^μ γ^ν R_{μ;ν})` for a Killing vector `R`.
    KillingOp(TensorField),
    /// `D_f = i γ^μ (f_μ^ν ∇_ν − ⅙ γ^ν γ^ρ f_{μν;ρ})` for a Killing-Yano 2-form `f`.
    DiracType(TensorField),
}

impl OperatorSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            OperatorSpec::StandardDirac => "standard-dirac",
            OperatorSpec::KillingOp(_) => "killing-op",
            OperatorSpec::DiracType(_) => "dirac-type",
        }
    }

    /// Runs the payload's defining check (Killing vector or Killing-Yano form).
    pub fn validate(&self, m: &Manifold, opts: &CheckOptions) -> Result<(), SpinError> {
        let report = match self {
            OperatorSpec::StandardDirac => return Ok(()),
            OperatorSpec::KillingOp(r) => {
                if r.variance() != [Variance::Up] {
                    return Err(SpinError::Payload("killing-op payload must be a vector field".into()));
                }
                killing_vector_residual(r, m, opts)?
            }
            OperatorSpec::DiracType(f) => {
                if f.variance() != [Variance::Down, Variance::Down] {
                    return Err(SpinError::Payload("dirac-type payload must be a 2-form".into()));
                }
                ky_residual(f, m, opts)?
            }
        };
        if report.pass {
            Ok(())
        } else {
            Err(SpinError::Payload(format!(
                "{} payload fails {} (relative residual {:e})",
                self.kind(),
                report.check,
                report.max_relative_residual
            )))
        }
    }
}

/// Manifold, frame and gamma representation shared by all spinor operators.
#[derive(Clone, Debug)]
pub struct SpinContext<'a> {
    pub manifold: &'a Manifold,
    pub frame: Frame,
    pub gammas: GammaRep,
}

type CMat = Vec<Vec<Complex64>>;

impl<'a> SpinContext<'a> {
    pub fn new(manifold: &'a Manifold, frame: Frame) -> SpinContext<'a> {
        let gammas = GammaRep::new(&frame.eta);
        SpinContext { manifold, frame, gammas }
    }

    pub fn with_gammas(mut self, gammas: GammaRep) -> SpinContext<'a> {
        self.gammas = gammas;
        self
    }

    pub fn spinor_size(&self) -> usize {
        self.gammas.size()
    }

    /// Geometry of the spin bundle at `x`, exact to second derivatives.
    pub fn at(&self, x: &[f64]) -> Result<LocalSpin, SpinError> {
        LocalSpin::new(self, x)
    }
}

fn cmul(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// Matrix of complex jets acting on spinor jets.
#[derive(Clone, Debug)]
struct JetMatrix(Vec<Vec<CJet>>);

impl JetMatrix {
    // Σ_k coefficient_k · M_k for real jets and constant complex matrices
    fn combine(lg: &LocalGeometry, size: usize, terms: &[(&Jet, &CMat)]) -> JetMatrix {
        let space = lg.space();
        JetMatrix(
            (0..size)
                .map(|i| {
                    (0..size)
                        .map(|j| {
                            let mut re = Jet::zero(space);
                            let mut im = Jet::zero(space);
                            for (c, m) in terms {
                                let z = m[i][j];
                                if z.re != 0.0 {
                                    re.axpy(z.re, c);
                                }
                                if z.im != 0.0 {
                                    im.axpy(z.im, c);
                                }
                            }
                            CJet { re, im }
                        })
                        .collect()
                })
                .collect(),
        )
    }

    fn apply(&self, psi: &[CJet]) -> Vec<CJet> {
        self.0
            .iter()
            .map(|row| {
                row.iter()
                    .zip(psi)
                    .filter(|(m, _)| !m.is_zero())
                    .fold(CJet::zero(psi[0].re.space()), |acc, (m, p)| acc.add(&m.mul(p)))
            })
            .collect()
    }
}

/// Local spin geometry at one point: frame jets, `γ^a`, and the spinor
/// connection `Σ_μ = ¼ ω_{μab} γ^a γ^b`.
pub struct LocalSpin {
    lg: LocalGeometry,
    size: usize,
    gamma: Vec<CMat>,
    gamma_pairs: Vec<Vec<CMat>>,
    // e_a^μ at index [a][μ]
    inverse: Vec<Vec<Jet>>,
    sigma: Vec<JetMatrix>,
}

impl LocalSpin {
    fn new(ctx: &SpinContext, x: &[f64]) -> Result<LocalSpin, SpinError> {
        let m = ctx.manifold;
        let n = m.dim();
        let lg = m.local(x, 2)?;
        let eta: Vec<f64> = ctx.frame.eta.iter().map(|e| *e as f64).collect();
        let coframe: Vec<Vec<Jet>> = ctx
            .frame
            .coframe
            .iter()
            .map(|r| r.iter().map(|c| lg.eval(c)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        let ginv = lg.inverse_metric();
        let inverse: Vec<Vec<Jet>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|mu| {
                        let mut acc = Jet::zero(lg.space());
                        for nu in 0..n {
                            acc = acc.add(&ginv.get(&[mu, nu]).mul(&coframe[a][nu]));
                        }
                        acc.scale(eta[a])
                    })
                    .collect()
            })
            .collect();
        let gamma = ctx.gammas.to_f64();
        let gamma_pairs: Vec<Vec<CMat>> =
            (0..n).map(|a| (0..n).map(|b| cmul(&gamma[a], &gamma[b])).collect()).collect();
        let gam = lg.christoffel();
        let size = ctx.gammas.size();
        let mut sigma = Vec::with_capacity(n);
        for mu in 0..n {
            // ω_{μab} = −(∇_μ e^a)_ν e_b^ν η_{aa}
            let mut coeffs = Vec::new();
            for a in 0..n {
                let nabla: Vec<Jet> = (0..n)
                    .map(|nu| {
                        let mut t = coframe[a][nu].deriv(mu);
                        for lam in 0..n {
                            t = t.sub(&gam.get(&[lam, mu, nu]).mul(&coframe[a][lam]));
                        }
                        t
                    })
                    .collect();
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let mut w = Jet::zero(lg.space());
                    for nu in 0..n {
                        w = w.add(&nabla[nu].mul(&inverse[b][nu]));
                    }
                    coeffs.push((a, b, w.scale(-0.25 * eta[a])));
                }
            }
            let terms: Vec<(&Jet, &CMat)> = coeffs.iter().map(|(a, b, w)| (w, &gamma_pairs[*a][*b])).collect();
            sigma.push(JetMatrix::combine(&lg, size, &terms));
        }
        Ok(LocalSpin {
            lg,
            size,
            gamma,
            gamma_pairs,
            inverse,
            sigma,
        })
    }

    pub fn geometry(&self) -> &LocalGeometry {
        &self.lg
    }

    fn gamma_apply(&self, a: usize, psi: &[CJet]) -> Vec<CJet> {
        mat_apply(&self.gamma[a], psi)
    }

    /// Spinor covariant derivatives `∇_μ ψ = ∂_μ ψ + Σ_μ ψ` for every μ.
    pub fn nabla(&self, psi: &[CJet]) -> Vec<Vec<CJet>> {
        (0..self.lg.dim())
            .map(|mu| {
                let s = self.sigma[mu].apply(psi);
                psi.iter().zip(s).map(|(p, q)| p.deriv(mu).add(&q)).collect()
            })
            .collect()
    }

    /// Prepares an operator for repeated application at this point.
    pub fn operator(&self, spec: &OperatorSpec) -> Result<LocalOperator, SpinError> {
        let n = self.lg.dim();
        Ok(match spec {
            OperatorSpec::StandardDirac => LocalOperator(Prepared::Dirac),
            OperatorSpec::KillingOp(r) => {
                let rj = self.lg.tensor(r)?;
                let low = self.lg.lower(&rj, 0)?;
                // ∇_ν R_μ at index [ν, μ]
                let cov = self.lg.covariant_derivative(&low);
                let frame_cov = self.to_frame(&cov, &[1, 0]);
                let terms: Vec<(Jet, &CMat)> = (0..n)
                    .flat_map(|a| (0..n).map(move |b| (a, b)))
                    .map(|(a, b)| (frame_cov[a * n + b].scale(-0.25), &self.gamma_pairs[a][b]))
                    .collect();
                let refs: Vec<(&Jet, &CMat)> = terms.iter().map(|(j, m)| (j, *m)).collect();
                LocalOperator(Prepared::Killing {
                    vector: (0..n).map(|mu| rj.get(&[mu]).clone()).collect(),
                    curl: JetMatrix::combine(&self.lg, self.size, &refs),
                })
            }
            OperatorSpec::DiracType(f) => {
                let fj = self.lg.tensor(f)?;
                let mixed = self.lg.raise(&fj, 1)?;
                // f_a^ν = e_a^μ f_μ^ν
                let fa: Vec<Vec<Jet>> = (0..n)
                    .map(|a| {
                        (0..n)
                            .map(|nu| {
                                (0..n).fold(Jet::zero(self.lg.space()), |acc, mu| {
                                    acc.add(&self.inverse[a][mu].mul(mixed.get(&[mu, nu])))
                                })
                            })
                            .collect()
                    })
                    .collect();
                // f_{μν;ρ} = ∇_ρ f_{μν}, stored by covariant_derivative at [ρ, μ, ν]
                let cov = self.lg.covariant_derivative(&fj);
                let frame_cov = self.to_frame(&cov, &[1, 2, 0]);
                let curls = (0..n)
                    .map(|a| {
                        let terms: Vec<(Jet, &CMat)> = (0..n)
                            .flat_map(|b| (0..n).map(move |c| (b, c)))
                            .map(|(b, c)| (frame_cov[(a * n + b) * n + c].scale(-1.0 / 6.0), &self.gamma_pairs[b][c]))
                            .collect();
                        let refs: Vec<(&Jet, &CMat)> = terms.iter().map(|(j, m)| (j, *m)).collect();
                        JetMatrix::combine(&self.lg, self.size, &refs)
                    })
                    .collect();
                LocalOperator(Prepared::DiracType { fa, curls })
            }
        })
    }

    // Converts every slot to frame indices; `order[k]` names the tensor slot
    // that becomes the k-th frame index of the flattened result.
    fn to_frame(&self, t: &JetTensor, order: &[usize]) -> Vec<Jet> {
        let n = self.lg.dim();
        let r = order.len();
        let total = n.pow(r as u32);
        (0..total)
            .map(|k| {
                let frame_idx = crate::manifold::unflatten(k, n, r);
                let mut acc = Jet::zero(self.lg.space());
                for c in 0..total {
                    let coord_idx = crate::manifold::unflatten(c, n, r);
                    let mut slot_idx = vec![0; r];
                    let mut w: Option<Jet> = None;
                    for (pos, &slot) in order.iter().enumerate() {
                        slot_idx[slot] = coord_idx[pos];
                        let e = &self.inverse[frame_idx[pos]][coord_idx[pos]];
                        w = Some(match w {
                            None => e.clone(),
                            Some(w) => w.mul(e),
                        });
                    }
                    let comp = t.get(&slot_idx);
                    if comp.is_zero() {
                        continue;
                    }
                    acc = acc.add(&w.expect("rank at least one").mul(comp));
                }
                acc
            })
            .collect()
    }

    /// Applies a prepared operator to a spinor jet; the result is exact to one
    /// derivative order fewer than the input.
    pub fn apply(&self, op: &LocalOperator, psi: &[CJet]) -> Vec<CJet> {
        let n = self.lg.dim();
        let i = Complex64::new(0.0, 1.0);
        let nabla = self.nabla(psi);
        let zero = || vec![CJet::zero(self.lg.space()); self.size];
        match &op.0 {
            Prepared::Dirac => {
                let mut out = zero();
                for a in 0..n {
                    let mut inner = zero();
                    for mu in 0..n {
                        axpy_spinor(&mut inner, &self.inverse[a][mu], &nabla[mu]);
                    }
                    add_spinor(&mut out, &self.gamma_apply(a, &inner));
                }
                scale_spinor(&out, i)
            }
            Prepared::Killing { vector, curl } => {
                let mut out = curl.apply(psi);
                for mu in 0..n {
                    axpy_spinor(&mut out, &vector[mu], &nabla[mu]);
                }
                scale_spinor(&out, -i)
            }
            Prepared::DiracType { fa, curls } => {
                let mut out = zero();
                for a in 0..n {
                    let mut inner = curls[a].apply(psi);
                    for nu in 0..n {
                        axpy_spinor(&mut inner, &fa[a][nu], &nabla[nu]);
                    }
                    add_spinor(&mut out, &self.gamma_apply(a, &inner));
                }
                scale_spinor(&out, i)
            }
        }
    }
}

/// An operator specialised to one point.
#[derive(Clone, Debug)]
pub struct LocalOperator(Prepared);

#[derive(Clone, Debug)]
enum Prepared {
    Dirac,
    Killing { vector: Vec<Jet>, curl: JetMatrix },
    DiracType { fa: Vec<Vec<Jet>>, curls: Vec<JetMatrix> },
}

fn mat_apply(m: &CMat, psi: &[CJet]) -> Vec<CJet> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(psi)
                .filter(|(z, _)| **z != Complex64::new(0.0, 0.0))
                .fold(CJet::zero(psi[0].re.space()), |acc, (z, p)| acc.add(&p.scale(*z)))
        })
        .collect()
}

fn axpy_spinor(acc: &mut [CJet], c: &Jet, psi: &[CJet]) {
    if c.is_zero() {
        return;
    }
    for (a, p) in acc.iter_mut().zip(psi) {
        *a = a.add(&p.mul_real(c));
    }
}

fn add_spinor(acc: &mut [CJet], psi: &[CJet]) {
    for (a, p) in acc.iter_mut().zip(psi) {
        *a = a.add(p);
    }
}

fn scale_spinor(psi: &[CJet], z: Complex64) -> Vec<CJet> {
    psi.iter().map(|p| p.scale(z)).collect()
}

fn values(psi: &[CJet]) -> Vec<Complex64> {
    psi.iter().map(|p| p.value()).collect()
}

// Hermitian norm, so reports are invariant under unitary changes of representation.
fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Value of `spec ψ` at `x`.
pub fn apply_operator(
    ctx: &SpinContext,
    spec: &OperatorSpec,
    psi: &SpinorField,
    x: &[f64],
) -> Result<Vec<Complex64>, SpinError> {
    check_size(ctx, psi)?;
    let local = ctx.at(x)?;
    let op = local.operator(spec)?;
    Ok(values(&local.apply(&op, &psi.jets(local.geometry())?)))
}

fn check_size(ctx: &SpinContext, psi: &SpinorField) -> Result<(), SpinError> {
    if psi.len() != ctx.spinor_size() {
        return Err(SpinError::SpinorSize {
            expected: ctx.spinor_size(),
            found: psi.len(),
        });
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Combination {
    Anticommutator,
    Commutator,
    SquareVsDirac,
}

fn compare(
    check: &str,
    ctx: &SpinContext,
    a: &OperatorSpec,
    b: &OperatorSpec,
    bank: &[SpinorField],
    opts: &CheckOptions,
    how: Combination,
) -> Result<ResidualReport, SpinError> {
    let target = format!("{},{}", a.kind(), b.kind());
    let mut report = ResidualReport::new(check, &target, opts);
    for psi in bank {
        check_size(ctx, psi)?;
    }
    for x in sample_points(ctx.manifold.chart(), opts.points.max(1), opts.seed) {
        let local = ctx.at(&x)?;
        let (oa, ob) = (local.operator(a)?, local.operator(b)?);
        let dirac = local.operator(&OperatorSpec::StandardDirac)?;
        let mut worst = (0.0f64, 0.0f64);
        for psi in bank {
            let p = psi.jets(local.geometry())?;
            let (u, v) = match how {
                Combination::SquareVsDirac => (
                    values(&local.apply(&oa, &local.apply(&oa, &p))),
                    values(&local.apply(&dirac, &local.apply(&dirac, &p))),
                ),
                _ => (
                    values(&local.apply(&oa, &local.apply(&ob, &p))),
                    values(&local.apply(&ob, &local.apply(&oa, &p))),
                ),
            };
            let combined: Vec<Complex64> = match how {
                Combination::Anticommutator => u.iter().zip(&v).map(|(x, y)| x + y).collect(),
                _ => u.iter().zip(&v).map(|(x, y)| x - y).collect(),
            };
            let (res, scale) = (norm(&combined), norm(&u) + norm(&v));
            if crate::killing::relative(res, scale) >= crate::killing::relative(worst.0, worst.1) {
                worst = (res, scale);
            }
        }
        report.record(&x, worst.0, worst.1);
    }
    Ok(report)
}

/// `|(AB + BA)ψ|` relative to `|ABψ| + |BAψ|`, worst over bank and points.
pub fn anticommutator_residual(
    ctx: &SpinContext,
    a: &OperatorSpec,
    b: &OperatorSpec,
    bank: &[SpinorField],
    opts: &CheckOptions,
) -> Result<ResidualReport, SpinError> {
    compare("anticommutator", ctx, a, b, bank, opts, Combination::Anticommutator)
}

/// `|(AB − BA)ψ|` relative to `|ABψ| + |BAψ|`, worst over bank and points.
pub fn commutator_residual(
    ctx: &SpinContext,
    a: &OperatorSpec,
    b: &OperatorSpec,
    bank: &[SpinorField],
    opts: &CheckOptions,
) -> Result<ResidualReport, SpinError> {
    compare("commutator", ctx, a, b, bank, opts, Combination::Commutator)
}

/// `|(D_f² − D_s²)ψ|` relative to `|D_f²ψ| + |D_s²ψ|`.
pub fn square_compare(
    ctx: &SpinContext,
    f: &OperatorSpec,
    bank: &[SpinorField],
    opts: &CheckOptions,
) -> Result<ResidualReport, SpinError> {
    if !matches!(f, OperatorSpec::DiracType(_)) {
        return Err(SpinError::Payload("square_compare needs a dirac-type operator".into()));
    }
    compare("square-compare", ctx, f, &OperatorSpec::StandardDirac, bank, opts, Combination::SquareVsDirac)
}
