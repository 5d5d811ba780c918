//! Exact single-mode measurement-color photon algebra on an indefinite
//! metric: color-indexed creation/annihilation generators with the bracket
//! `[a_μ⁽ᵏ⁾, a_ν⁽ʲ⁾†] = (1 − δ^{kj})(−η_μν)`, normal ordering, the photon
//! Hamiltonian, Fock states, inner products, time parity and the weak
//! subsidiary condition.

mod expr;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use expr::{parse_expression, run_script, Env, ScriptLine, ScriptOutcome};

pub type Rational = BigRational;

pub fn rational(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Diagonal metric `η = diag(+1, −1, −1, −1)`.
pub fn eta(mu: u8) -> i64 {
    if mu == 0 {
        1
    } else {
        -1
    }
}

/// `a_μ⁽ᵏ⁾⁽⁻⁾` (annihilator) or its adjoint, for the single mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Generator {
    /// Color `k`, 1-based.
    pub color: u32,
    pub index: u8,
    pub dagger: bool,
}

impl Generator {
    pub fn new(color: u32, index: u8, dagger: bool) -> Result<Self> {
        if color == 0 {
            return Err(Error::domain("colors are numbered from 1"));
        }
        if index > 3 {
            return Err(Error::domain(format!("spacetime index {index} out of range 0..=3")));
        }
        Ok(Generator { color, index, dagger })
    }

    pub fn adjoint(self) -> Self {
        Generator { dagger: !self.dagger, ..self }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", if self.dagger { "ad" } else { "a" }, self.color, self.index)
    }
}

/// `[g1, g2]` for single generators; non-zero only for an annihilator
/// followed by a creator of a different color and the same index.
pub fn base_commutator(g1: Generator, g2: Generator) -> Rational {
    let pair = |a: Generator, b: Generator| -> i64 {
        if !a.dagger && b.dagger && a.index == b.index && a.color != b.color {
            -eta(a.index)
        } else {
            0
        }
    };
    rational(pair(g1, g2) - pair(g2, g1), 1)
}

type Monomial = Vec<Generator>;

/// Finite sum of generator monomials with exact rational coefficients,
/// kept in normal order: creators (sorted) left of annihilators (sorted).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OperatorPolynomial {
    terms: BTreeMap<Monomial, Rational>,
}

fn is_normal(m: &[Generator]) -> bool {
    let split = m.iter().position(|g| !g.dagger).unwrap_or(m.len());
    m[split..].iter().all(|g| !g.dagger) && m[..split].windows(2).all(|w| w[0] <= w[1]) && m[split..].windows(2).all(|w| w[0] <= w[1])
}

impl OperatorPolynomial {
    pub fn zero() -> Self {
        OperatorPolynomial::default()
    }

    pub fn scalar(c: Rational) -> Self {
        let mut p = OperatorPolynomial::zero();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn one() -> Self {
        OperatorPolynomial::scalar(Rational::one())
    }

    pub fn generator(g: Generator) -> Self {
        let mut p = OperatorPolynomial::zero();
        p.add_term(vec![g], Rational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Generator], &Rational)> {
        self.terms.iter().map(|(m, c)| (m.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the identity.
    pub fn constant(&self) -> Rational {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let vanished = {
            let e = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
            *e += c;
            e.is_zero()
        };
        if vanished {
            self.terms.remove(&m);
        }
    }

    /// Adds `c · m` after normal-ordering `m`.
    fn add_ordered(&mut self, m: &[Generator], c: &Rational) {
        if c.is_zero() {
            return;
        }
        if is_normal(m) {
            self.add_term(m.to_vec(), c.clone());
            return;
        }
        // Move the first annihilator-creator pair: a b† = b† a + [a, b†].
        if let Some(i) = (0..m.len().saturating_sub(1)).find(|&i| !m[i].dagger && m[i + 1].dagger) {
            let mut swapped = m.to_vec();
            swapped.swap(i, i + 1);
            self.add_ordered(&swapped, c);
            let bracket = base_commutator(m[i], m[i + 1]);
            if !bracket.is_zero() {
                let mut rest = m[..i].to_vec();
                rest.extend_from_slice(&m[i + 2..]);
                self.add_ordered(&rest, &(c * bracket));
            }
            return;
        }
        // Creators commute among themselves, as do annihilators.
        let split = m.partition_point(|g| g.dagger);
        let mut sorted = m.to_vec();
        sorted[..split].sort();
        sorted[split..].sort();
        self.add_term(sorted, c.clone());
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = OperatorPolynomial::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, v) in &o.terms {
            out.add_term(m.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Rational::one()))
    }

    /// Normal-ordered product.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = OperatorPolynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut m = m1.clone();
                m.extend_from_slice(m2);
                out.add_ordered(&m, &(c1 * c2));
            }
        }
        out
    }

    /// Adjoint; coefficients are real.
    pub fn adjoint(&self) -> Self {
        let mut out = OperatorPolynomial::zero();
        for (m, c) in &self.terms {
            let rev: Vec<Generator> = m.iter().rev().map(|g| g.adjoint()).collect();
            out.add_ordered(&rev, c);
        }
        out
    }

    /// Largest number of generators in a term.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }
}

impl fmt::Display for OperatorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let (sign, mag) = if c.is_negative() { ("-", -c.clone()) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let gens: Vec<String> = m.iter().map(|g| g.to_string()).collect();
            if gens.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", gens.join("*"))?;
            } else {
                write!(f, "{mag}*{}", gens.join("*"))?;
            }
        }
        Ok(())
    }
}

/// `[A, B] = AB − BA`, normal ordered.
pub fn commutator(a: &OperatorPolynomial, b: &OperatorPolynomial) -> OperatorPolynomial {
    a.mul(b).sub(&b.mul(a))
}

fn check_colors(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("the color algebra needs N ≥ 2, got {n}")));
    }
    Ok(())
}

/// `α_μ = Σ_j a_μ⁽ʲ⁾⁽⁻⁾ / (N − 1)`.
pub fn build_alpha(n: u32, mu: u8) -> Result<OperatorPolynomial> {
    check_colors(n)?;
    let c = rational(1, n as i64 - 1);
    let mut out = OperatorPolynomial::zero();
    for j in 1..=n {
        out = out.add(&OperatorPolynomial::generator(Generator::new(j, mu, false)?).scale(&c));
    }
    Ok(out)
}

/// `a_μ⁽ᵏ⁾ = α_μ − a_μ⁽ᵏ⁾⁽⁻⁾`.
pub fn build_a_rad(n: u32, k: u32, mu: u8) -> Result<OperatorPolynomial> {
    check_colors(n)?;
    if k == 0 || k > n {
        return Err(Error::domain(format!("color {k} outside 1..={n}")));
    }
    Ok(build_alpha(n, mu)?.sub(&OperatorPolynomial::generator(Generator::new(k, mu, false)?)))
}

/// `H = −ω Σ_k Σ_μ η^μμ a_μ⁽ᵏ⁾† a_μ⁽ᵏ⁾⁽⁻⁾`.
pub fn build_h_ph(n: u32, omega: &Rational) -> Result<OperatorPolynomial> {
    check_colors(n)?;
    if !omega.is_positive() {
        return Err(Error::domain("ω must be positive"));
    }
    let mut h = OperatorPolynomial::zero();
    for k in 1..=n {
        for mu in 0..4u8 {
            let term = build_a_rad(n, k, mu)?.adjoint().mul(&OperatorPolynomial::generator(Generator::new(k, mu, false)?));
            h = h.add(&term.scale(&(-omega.clone() * rational(eta(mu), 1))));
        }
    }
    Ok(h)
}

/// State `P|0⟩` stored as a polynomial in creators only.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FockState {
    poly: OperatorPolynomial,
}

impl FockState {
    pub fn vacuum() -> Self {
        FockState { poly: OperatorPolynomial::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Creation polynomial that builds the state from the vacuum.
    pub fn creation_polynomial(&self) -> &OperatorPolynomial {
        &self.poly
    }

    /// Photon numbers present in the state.
    pub fn photon_numbers(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.poly.terms().map(|(m, _)| m.len()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn add(&self, o: &FockState) -> FockState {
        FockState { poly: self.poly.add(&o.poly) }
    }

    pub fn scale(&self, c: &Rational) -> FockState {
        FockState { poly: self.poly.scale(c) }
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "({})|0>", self.poly)
        }
    }
}

fn drop_annihilators(p: &OperatorPolynomial) -> FockState {
    let mut out = OperatorPolynomial::zero();
    for (m, c) in p.terms() {
        // Normal order puts annihilators rightmost; any one kills the vacuum.
        if m.last().is_none_or(|g| g.dagger) {
            out.add_term(m.to_vec(), c.clone());
        }
    }
    FockState { poly: out }
}

/// `P|0⟩`.
pub fn apply_to_vacuum(p: &OperatorPolynomial) -> FockState {
    drop_annihilators(p)
}

/// `P|ψ⟩`.
pub fn apply(p: &OperatorPolynomial, s: &FockState) -> FockState {
    drop_annihilators(&p.mul(&s.poly))
}

/// `⟨s1|s2⟩`: vacuum expectation of `P1† P2`.
pub fn inner_product(s1: &FockState, s2: &FockState) -> Rational {
    s1.poly.adjoint().mul(&s2.poly).constant()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeParity {
    Even,
    Odd,
    Mixed,
}

impl TimeParity {
    pub fn label(self) -> &'static str {
        match self {
            TimeParity::Even => "+1",
            TimeParity::Odd => "-1",
            TimeParity::Mixed => "mixed",
        }
    }
}

/// `(−1)^n` for a state of definite photon-number parity; the zero state
/// counts as even.
pub fn time_parity(s: &FockState) -> TimeParity {
    let odd: Vec<bool> = s.photon_numbers().into_iter().map(|n| n % 2 == 1).collect();
    if odd.iter().all(|o| !o) {
        TimeParity::Even
    } else if odd.iter().all(|o| *o) {
        TimeParity::Odd
    } else {
        TimeParity::Mixed
    }
}

/// `λ^μ a_μ⁽ᵏ⁾ |ψ⟩ = 0` for each color `k`; `λ` must be a non-zero null vector.
pub fn subsidiary_check(n: u32, s: &FockState, lambda: &[Rational; 4]) -> Result<Vec<bool>> {
    check_colors(n)?;
    let norm = lambda[0].clone() * &lambda[0] - lambda[1].clone() * &lambda[1] - lambda[2].clone() * &lambda[2] - lambda[3].clone() * &lambda[3];
    if !norm.is_zero() || lambda.iter().all(|c| c.is_zero()) {
        return Err(Error::domain("subsidiary condition needs a non-zero lightlike λ"));
    }
    (1..=n)
        .map(|k| {
            let mut op = OperatorPolynomial::zero();
            for mu in 0..4u8 {
                op = op.add(&build_a_rad(n, k, mu)?.scale(&lambda[mu as usize]));
            }
            Ok(apply(&op, s).is_zero())
        })
        .collect()
}

/// Outcome of the positivity sweep over transverse `α†` states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositivityReport {
    pub states_checked: usize,
    pub physical: usize,
    pub min_norm: Option<Rational>,
    /// Transverse states of a single color-antisymmetric creator that pass the
    /// subsidiary condition yet have negative norm.
    pub negative_color_states: usize,
}

impl PositivityReport {
    pub fn positive(&self) -> bool {
        self.min_norm.as_ref().is_none_or(|m| !m.is_negative())
    }
}

fn monomials_up_to(gens: &[OperatorPolynomial], max: usize) -> Vec<OperatorPolynomial> {
    let mut out = vec![OperatorPolynomial::one()];
    let mut layer: Vec<(usize, OperatorPolynomial)> = vec![(0, OperatorPolynomial::one())];
    for _ in 0..max {
        let mut next = Vec::new();
        for (start, p) in &layer {
            for (i, g) in gens.iter().enumerate().skip(*start) {
                next.push((i, p.mul(g)));
            }
        }
        out.extend(next.iter().map(|(_, p)| p.clone()));
        layer = next;
    }
    out
}

/// Norms of every product of up to `max_photons` transverse `α_i†`
/// (`i ∈ {1, 2}`, `λ ∝ (1, 0, 0, 1)`) and of sums of pairs of them, keeping
/// those that satisfy the subsidiary condition for every color. Also counts
/// color-antisymmetric transverse one-photon states of negative norm.
pub fn positivity_sweep(n: u32, max_photons: usize) -> Result<PositivityReport> {
    check_colors(n)?;
    let lambda = [rational(1, 1), rational(0, 1), rational(0, 1), rational(1, 1)];
    let gens: Vec<OperatorPolynomial> = [1u8, 2].iter().map(|&i| build_alpha(n, i).map(|a| a.adjoint())).collect::<Result<_>>()?;
    let monos = monomials_up_to(&gens, max_photons);
    let mut candidates: Vec<FockState> = monos.iter().map(apply_to_vacuum).collect();
    for i in 0..monos.len() {
        for j in i + 1..monos.len() {
            candidates.push(apply_to_vacuum(&monos[i].add(&monos[j])));
            candidates.push(apply_to_vacuum(&monos[i].sub(&monos[j])));
        }
    }
    let mut report = PositivityReport { states_checked: candidates.len(), physical: 0, min_norm: None, negative_color_states: 0 };
    for s in &candidates {
        if subsidiary_check(n, s, &lambda)?.into_iter().all(|b| b) {
            report.physical += 1;
            let nrm = inner_product(s, s);
            if report.min_norm.as_ref().is_none_or(|m| nrm < *m) {
                report.min_norm = Some(nrm);
            }
        }
    }
    for j in 2..=n {
        for i in [1u8, 2] {
            let p = OperatorPolynomial::generator(Generator::new(1, i, true)?).sub(&OperatorPolynomial::generator(Generator::new(j, i, true)?));
            let s = apply_to_vacuum(&p);
            if subsidiary_check(n, &s, &lambda)?.into_iter().all(|b| b) && inner_product(&s, &s).is_negative() {
                report.negative_color_states += 1;
            }
        }
    }
    Ok(report)
}
