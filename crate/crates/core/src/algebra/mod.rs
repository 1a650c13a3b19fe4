//! Exact graded operator algebra of the Taub-NUT Dirac theory: quaternionic
//! units, the J/K/Q bracket relations with a central indeterminate `B`, and
//! the graded loop algebra obtained by absorbing powers of `B`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exprkit::{rat, Rational};

#[derive(Debug, Error, PartialEq)]
pub enum AlgebraError {
    #[error("generator {0} is not in this table")]
    NotInTable(Generator),
    #[error("bracket [{0}, {1}] is not specified")]
    Unspecified(Generator, Generator),
    #[error("{0} is not an element of the associative quaternion table")]
    NotQuaternion(Generator),
}

/// Basis symbols. `A(i, n)` is `A^i_{2n}` and `Bg(i, n)` is `B^i_{2n+2}`;
/// the central `B` is not a generator but the coefficient indeterminate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Generator {
    I,
    J(u8),
    K(u8),
    Q(u8),
    QY,
    P4,
    A(u8, u32),
    Bg(u8, u32),
}

impl Generator {
    /// Grade of the graded generators.
    pub fn grade(self) -> Option<u32> {
        match self {
            Generator::A(_, n) => Some(2 * n),
            Generator::Bg(_, n) => Some(2 * n + 2),
            _ => None,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::I => write!(f, "I"),
            Generator::J(i) => write!(f, "J{i}"),
            Generator::K(i) => write!(f, "K{i}"),
            Generator::Q(i) => write!(f, "Q{i}"),
            Generator::QY => write!(f, "QY"),
            Generator::P4 => write!(f, "P4"),
            Generator::A(i, n) => write!(f, "A{i}_{}", 2 * n),
            Generator::Bg(i, n) => write!(f, "B{i}_{}", 2 * n + 2),
        }
    }
}

/// Gaussian rational.
pub type GaussQ = Complex<Rational>;

/// Element of `ℚ[i][B]`: map from the power of `B` to its coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Coeff(BTreeMap<u32, GaussQ>);

impl Coeff {
    pub fn zero() -> Coeff {
        Coeff(BTreeMap::new())
    }

    pub fn monomial(c: GaussQ, power: u32) -> Coeff {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(power, c);
        }
        Coeff(m)
    }

    pub fn one() -> Coeff {
        Coeff::monomial(GaussQ::one(), 0)
    }

    /// `i · B^power`.
    pub fn i_b(power: u32) -> Coeff {
        Coeff::monomial(Complex::new(rat(0), rat(1)), power)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &Coeff) -> Coeff {
        let mut m = self.0.clone();
        for (p, c) in &o.0 {
            let v = m.remove(p).unwrap_or_else(GaussQ::zero) + c;
            if !v.is_zero() {
                m.insert(*p, v);
            }
        }
        Coeff(m)
    }

    pub fn neg(&self) -> Coeff {
        Coeff(self.0.iter().map(|(p, c)| (*p, -c)).collect())
    }

    pub fn mul(&self, o: &Coeff) -> Coeff {
        let mut out = Coeff::zero();
        for (p, c) in &self.0 {
            for (q, d) in &o.0 {
                out = out.add(&Coeff::monomial(c * d, p + q));
            }
        }
        out
    }

    /// Multiplies by `B^k`.
    pub fn shift(&self, k: u32) -> Coeff {
        Coeff(self.0.iter().map(|(p, c)| (p + k, c.clone())).collect())
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &GaussQ)> {
        self.0.iter().map(|(p, c)| (*p, c))
    }
}

fn fmt_gauss(c: &GaussQ) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => c.re.to_string(),
        (true, false) if c.im == rat(1) => "i".into(),
        (true, false) if c.im == rat(-1) => "-i".into(),
        (true, false) => format!("{}i", c.im),
        _ => format!("({}{}{}i)", c.re, if c.im > rat(0) { "+" } else { "" }, c.im),
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(p, c)| match p {
                0 => fmt_gauss(c),
                1 => format!("{}*B", fmt_gauss(c)),
                _ => format!("{}*B^{p}", fmt_gauss(c)),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Finite linear combination of generators with `ℚ[i][B]` coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AlgebraElement(BTreeMap<Generator, Coeff>);

impl AlgebraElement {
    pub fn zero() -> AlgebraElement {
        AlgebraElement(BTreeMap::new())
    }

    pub fn gen(g: Generator) -> AlgebraElement {
        AlgebraElement::term(Coeff::one(), g)
    }

    pub fn term(c: Coeff, g: Generator) -> AlgebraElement {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(g, c);
        }
        AlgebraElement(m)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &AlgebraElement) -> AlgebraElement {
        let mut m = self.0.clone();
        for (g, c) in &o.0 {
            let v = m.remove(g).unwrap_or_default().add(c);
            if !v.is_zero() {
                m.insert(*g, v);
            }
        }
        AlgebraElement(m)
    }

    pub fn neg(&self) -> AlgebraElement {
        AlgebraElement(self.0.iter().map(|(g, c)| (*g, c.neg())).collect())
    }

    pub fn scale(&self, s: &Coeff) -> AlgebraElement {
        self.0
            .iter()
            .fold(AlgebraElement::zero(), |acc, (g, c)| acc.add(&AlgebraElement::term(c.mul(s), *g)))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Generator, &Coeff)> {
        self.0.iter()
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.0.iter().map(|(g, c)| format!("({c}) {g}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Levi-Civita symbol on `{1, 2, 3}`: returns `(k, ε_ijk)` for `i ≠ j`.
fn epsilon(i: u8, j: u8) -> Option<(u8, i64)> {
    if i == j {
        return None;
    }
    let k = 6 - i - j;
    let sign = if (i, j) == (1, 2) || (i, j) == (2, 3) || (i, j) == (3, 1) { 1 } else { -1 };
    Some((k, sign))
}

fn i_eps(i: u8, j: u8, b_power: u32, make: impl Fn(u8) -> Generator) -> AlgebraElement {
    match epsilon(i, j) {
        None => AlgebraElement::zero(),
        Some((k, s)) => AlgebraElement::term(Coeff::i_b(b_power).mul(&Coeff::monomial(GaussQ::from(rat(s)), 0)), make(k)),
    }
}

/// Structure constants on basis generators; extended bilinearly by [`bracket`].
pub trait BracketTable {
    fn name(&self) -> &'static str;
    fn bracket_gen(&self, a: Generator, b: Generator) -> Result<AlgebraElement, AlgebraError>;
}

/// The relations among the total angular momentum `J_i`, the Runge-Lenz
/// operators `K_i` and the quaternionic units `Q_i`, with `B` central.
///
/// `[Q_i, Q_j] = 2iε_ijk Q_k` is induced by the associative quaternion table.
/// `Q^Y` and `P_4` are inert: their brackets are not known, and asking for one is an error.
#[derive(Clone, Copy, Debug, Default)]
pub struct JkqTable;

impl BracketTable for JkqTable {
    fn name(&self) -> &'static str {
        "jkq"
    }

    fn bracket_gen(&self, a: Generator, b: Generator) -> Result<AlgebraElement, AlgebraError> {
        use Generator::*;
        Ok(match (a, b) {
            (I, J(_) | K(_) | Q(_)) | (J(_) | K(_) | Q(_), I) => AlgebraElement::zero(),
            (J(i), J(j)) => i_eps(i, j, 0, J),
            (J(i), K(j)) => i_eps(i, j, 0, K),
            (K(i), J(j)) => i_eps(j, i, 0, K).neg(),
            (K(i), K(j)) => i_eps(i, j, 2, J),
            (J(i), Q(j)) => i_eps(i, j, 0, Q),
            (Q(i), J(j)) => i_eps(j, i, 0, Q).neg(),
            (K(i), Q(j)) => i_eps(i, j, 1, Q),
            (Q(i), K(j)) => i_eps(j, i, 1, Q).neg(),
            (Q(i), Q(j)) => i_eps(i, j, 0, Q).scale(&Coeff::monomial(GaussQ::from(rat(2)), 0)),
            (QY | P4, _) | (_, QY | P4) => return Err(AlgebraError::Unspecified(a, b)),
            (x, y) => return Err(AlgebraError::NotInTable(if matches!(x, A(..) | Bg(..) | I) { x } else { y })),
        })
    }
}

/// The graded loop algebra on `A^i_{2n}` and `B^i_{2n+2}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct KacMoodyTable;

impl BracketTable for KacMoodyTable {
    fn name(&self) -> &'static str {
        "kac-moody"
    }

    fn bracket_gen(&self, a: Generator, b: Generator) -> Result<AlgebraElement, AlgebraError> {
        use Generator::*;
        Ok(match (a, b) {
            (A(i, n), A(j, m)) => i_eps(i, j, 0, |k| A(k, n + m)),
            (A(i, n), Bg(j, m)) => i_eps(i, j, 0, |k| Bg(k, n + m)),
            (Bg(i, n), A(j, m)) => i_eps(j, i, 0, |k| Bg(k, n + m)).neg(),
            (Bg(i, n), Bg(j, m)) => i_eps(i, j, 0, |k| A(k, n + m + 2)),
            (A(..) | Bg(..), other) | (other, _) => return Err(AlgebraError::NotInTable(other)),
        })
    }
}

/// Bilinear extension of a table; coefficients commute with everything.
pub fn bracket(a: &AlgebraElement, b: &AlgebraElement, table: &dyn BracketTable) -> Result<AlgebraElement, AlgebraError> {
    let mut out = AlgebraElement::zero();
    for (ga, ca) in a.terms() {
        for (gb, cb) in b.terms() {
            out = out.add(&table.bracket_gen(*ga, *gb)?.scale(&ca.mul(cb)));
        }
    }
    Ok(out)
}

/// Product in the associative table `Q_i Q_j = δ_ij I + iε_ijk Q_k`.
pub fn quaternion_product(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    let mut out = AlgebraElement::zero();
    for (ga, ca) in a.terms() {
        for (gb, cb) in b.terms() {
            let p = match (*ga, *gb) {
                (Generator::I, g) | (g, Generator::I) if matches!(g, Generator::I | Generator::Q(_)) => AlgebraElement::gen(g),
                (Generator::Q(i), Generator::Q(j)) if i == j => AlgebraElement::gen(Generator::I),
                (Generator::Q(i), Generator::Q(j)) => i_eps(i, j, 0, Generator::Q),
                (Generator::I | Generator::Q(_), g) | (g, _) => return Err(AlgebraError::NotQuaternion(g)),
            };
            out = out.add(&p.scale(&ca.mul(cb)));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuaternionReport {
    pub associative_triples: usize,
    pub associativity_failures: Vec<String>,
    pub product_failures: Vec<String>,
    pub commutator_failures: Vec<String>,
    pub pass: bool,
}

/// Verifies associativity of the unit table on all triples over `{I, Q1, Q2, Q3}`
/// and that commutators close as `[Q_i, Q_j] = 2iε_ijk Q_k`.
pub fn quaternion_table_check() -> QuaternionReport {
    let units: Vec<Generator> = [Generator::I, Generator::Q(1), Generator::Q(2), Generator::Q(3)].to_vec();
    let g = AlgebraElement::gen;
    let prod = |a: &AlgebraElement, b: &AlgebraElement| quaternion_product(a, b).expect("closed table");
    let mut assoc = Vec::new();
    let mut count = 0;
    for &a in &units {
        for &b in &units {
            for &c in &units {
                count += 1;
                if prod(&prod(&g(a), &g(b)), &g(c)) != prod(&g(a), &prod(&g(b), &g(c))) {
                    assoc.push(format!("({a}{b}){c}"));
                }
            }
        }
    }
    let mut products = Vec::new();
    let mut commutators = Vec::new();
    for i in 1..=3u8 {
        for j in 1..=3u8 {
            let p = prod(&g(Generator::Q(i)), &g(Generator::Q(j)));
            let expect = if i == j { g(Generator::I) } else { i_eps(i, j, 0, Generator::Q) };
            if p != expect {
                products.push(format!("Q{i}Q{j}"));
            }
            let comm = p.add(&prod(&g(Generator::Q(j)), &g(Generator::Q(i))).neg());
            if comm != JkqTable.bracket_gen(Generator::Q(i), Generator::Q(j)).expect("Q brackets are tabulated") {
                commutators.push(format!("[Q{i},Q{j}]"));
            }
        }
    }
    let pass = assoc.is_empty() && products.is_empty() && commutators.is_empty();
    QuaternionReport {
        associative_triples: count,
        associativity_failures: assoc,
        product_failures: products,
        commutator_failures: commutators,
        pass,
    }
}

/// `A^i_{2n} ↦ J_i B^n`, `B^i_{2n+2} ↦ K_i B^n`; other generators unchanged.
pub fn absorb_image(x: &AlgebraElement) -> AlgebraElement {
    x.terms().fold(AlgebraElement::zero(), |acc, (g, c)| {
        let t = match *g {
            Generator::A(i, n) => AlgebraElement::term(c.shift(n), Generator::J(i)),
            Generator::Bg(i, n) => AlgebraElement::term(c.shift(n), Generator::K(i)),
            other => AlgebraElement::term(c.clone(), other),
        };
        acc.add(&t)
    })
}

/// Graded generators `A^i_{2n}` (grade ≤ 2N) and `B^i_{2n+2}` (grade ≤ 2N).
pub fn graded_generators(cutoff: u32) -> Vec<Generator> {
    let mut out = Vec::new();
    for i in 1..=3u8 {
        for n in 0..=cutoff {
            out.push(Generator::A(i, n));
            if n < cutoff {
                out.push(Generator::Bg(i, n));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbsorptionReport {
    pub cutoff: u32,
    pub pairs: usize,
    pub mismatches: Vec<String>,
    pub pass: bool,
}

/// Checks that the graded table equals the image of the J/K relations under
/// absorption: `absorb([a, b]_graded) = [absorb(a), absorb(b)]_jkq` for all
/// pairs of generators with grade ≤ 2N.
pub fn grade_absorb(cutoff: u32) -> AbsorptionReport {
    let gens = graded_generators(cutoff);
    let mut mismatches = Vec::new();
    let mut pairs = 0;
    for &a in &gens {
        for &b in &gens {
            pairs += 1;
            let graded = KacMoodyTable.bracket_gen(a, b).expect("graded generators");
            let lhs = absorb_image(&graded);
            let rhs = bracket(
                &absorb_image(&AlgebraElement::gen(a)),
                &absorb_image(&AlgebraElement::gen(b)),
                &JkqTable,
            )
            .expect("J/K brackets are tabulated");
            if lhs != rhs {
                mismatches.push(format!("[{a}, {b}]: graded {graded} vs {rhs}"));
            }
        }
    }
    AbsorptionReport {
        cutoff,
        pairs,
        pass: mismatches.is_empty(),
        mismatches,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JacobiReport {
    pub table: String,
    pub cutoff: Option<u32>,
    pub triples: usize,
    pub violations: Vec<String>,
    pub pass: bool,
}

/// `[[a,b],c] + [[b,c],a] + [[c,a],b] = 0` for all ordered triples.
pub fn jacobi_check(table: &dyn BracketTable, generators: &[Generator], cutoff: Option<u32>) -> Result<JacobiReport, AlgebraError> {
    let g = AlgebraElement::gen;
    let mut violations = Vec::new();
    let mut triples = 0;
    for &a in generators {
        for &b in generators {
            for &c in generators {
                if let Some(n) = cutoff {
                    let total: u32 = [a, b, c].iter().map(|x| x.grade().unwrap_or(0)).sum();
                    if total > 2 * n {
                        continue;
                    }
                }
                triples += 1;
                let t1 = bracket(&bracket(&g(a), &g(b), table)?, &g(c), table)?;
                let t2 = bracket(&bracket(&g(b), &g(c), table)?, &g(a), table)?;
                let t3 = bracket(&bracket(&g(c), &g(a), table)?, &g(b), table)?;
                let sum = t1.add(&t2).add(&t3);
                if !sum.is_zero() {
                    violations.push(format!("({a}, {b}, {c}) -> {sum}"));
                }
            }
        }
    }
    Ok(JacobiReport {
        table: table.name().into(),
        cutoff,
        triples,
        pass: violations.is_empty(),
        violations,
    })
}

/// The `J_i`, `K_i`, `Q_i` generators of [`JkqTable`].
pub fn jkq_generators() -> Vec<Generator> {
    (1..=3u8)
        .flat_map(|i| [Generator::J(i), Generator::K(i), Generator::Q(i)])
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureConstant {
    pub left: String,
    pub right: String,
    pub result: String,
}

/// All nonzero brackets of a table over `generators`, for export.
pub fn structure_constants(table: &dyn BracketTable, generators: &[Generator]) -> Result<Vec<StructureConstant>, AlgebraError> {
    let mut out = Vec::new();
    for &a in generators {
        for &b in generators {
            let r = table.bracket_gen(a, b)?;
            if !r.is_zero() {
                out.push(StructureConstant {
                    left: a.to_string(),
                    right: b.to_string(),
                    result: r.to_string(),
                });
            }
        }
    }
    Ok(out)
}
