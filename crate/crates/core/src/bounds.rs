//! Exact bookkeeping of power-of-`X` exponents.
//!
//! Every exponent that appears in the sup, second, third and fourth moment
//! estimates is affine in `c`, so they are carried as [`AffineExponent`]s
//! with exact rational coefficients. Arbitrarily small `eta` losses are never
//! represented; all comparisons are on the `eta`-free parts.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("exponent c = {0} outside (1, 3/2)")]
    ExponentRange(Rational),
    #[error("({}, {}) is not an exponent pair", .0.kappa, .0.lambda)]
    NotAdmissible(Box<ExponentPair>),
    #[error("invalid process word {0:?}: use only the letters A and B")]
    Word(String),
    #[error("cannot parse {0:?} as p/q")]
    Parse(String),
    #[error("threshold iteration did not settle")]
    NoFixedPoint,
}

pub type Result<T> = std::result::Result<T, BoundsError>;

/// Exact rational with arbitrary-width numerator and denominator, always reduced.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    /// `num / den`; panics on a zero denominator.
    pub fn new(num: i64, den: i64) -> Self {
        Self(BigRational::new(num.into(), den.into()))
    }

    pub fn integer(n: i64) -> Self {
        Self::new(n, 1)
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    /// Always positive.
    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }
}

impl FromStr for Rational {
    type Err = BoundsError;

    /// Accepts `p/q` or an integer `p`. Decimal points are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || BoundsError::Parse(s.to_string());
        let (p, q) = match s.trim().split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s.trim(), "1"),
        };
        let p: BigInt = p.parse().map_err(|_| bad())?;
        let q: BigInt = q.parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        Ok(Self(BigRational::new(p, q)))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl Serialize for Rational {
    /// `{"num": p, "den": q}`; integers beyond 64 bits are written as strings.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Rational", 2)?;
        match (self.numer().to_i64(), self.denom().to_i64()) {
            (Some(n), Some(d)) => {
                st.serialize_field("num", &n)?;
                st.serialize_field("den", &d)?;
            }
            _ => {
                st.serialize_field("num", &self.numer().to_string())?;
                st.serialize_field("den", &self.denom().to_string())?;
            }
        }
        st.end()
    }
}

macro_rules! rational_op {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}
rational_op!(Add, add);
rational_op!(Sub, sub);
rational_op!(Mul, mul);
rational_op!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

fn q(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// An exponent pair `(kappa, lambda)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ExponentPair {
    pub kappa: Rational,
    pub lambda: Rational,
}

impl ExponentPair {
    pub fn new(kappa: Rational, lambda: Rational) -> Result<Self> {
        let p = Self { kappa, lambda };
        if !p.is_admissible() {
            return Err(BoundsError::NotAdmissible(Box::new(p)));
        }
        Ok(p)
    }

    /// The trivial pair `(0, 1)`.
    pub fn trivial() -> Self {
        Self {
            kappa: Rational::zero(),
            lambda: Rational::one(),
        }
    }

    /// `0 <= kappa <= 1/2 <= lambda <= 1`.
    pub fn is_admissible(&self) -> bool {
        let half = q(1, 2);
        !self.kappa.is_negative() && self.kappa <= half && half <= self.lambda && self.lambda <= Rational::one()
    }
}

/// `A(k, l) = (k / (2k + 2), 1/2 + l / (2k + 2))`.
pub fn ep_a(p: &ExponentPair) -> ExponentPair {
    let denom = &(&Rational::integer(2) * &p.kappa) + &Rational::integer(2);
    ExponentPair {
        kappa: &p.kappa / &denom,
        lambda: &q(1, 2) + &(&p.lambda / &denom),
    }
}

/// `B(k, l) = (l - 1/2, k + 1/2)`.
pub fn ep_b(p: &ExponentPair) -> ExponentPair {
    ExponentPair {
        kappa: &p.lambda - &q(1, 2),
        lambda: &p.kappa + &q(1, 2),
    }
}

/// Apply a word of processes right to left: `"AAB"` is `A(A(B(start)))`.
pub fn apply_word(word: &str, start: &ExponentPair) -> Result<ExponentPair> {
    let mut p = start.clone();
    for ch in word.chars().rev() {
        p = match ch.to_ascii_uppercase() {
            'A' => ep_a(&p),
            'B' => ep_b(&p),
            _ => return Err(BoundsError::Word(word.to_string())),
        };
    }
    Ok(p)
}

/// `Y^kappa X^lambda + 1/Y`.
pub fn ep_bound(p: &ExponentPair, y: f64, xlen: f64) -> f64 {
    y.powf(p.kappa.to_f64()) * xlen.powf(p.lambda.to_f64()) + 1.0 / y
}

/// Exponents `(of F, of M, of L)` of each term of the bilinear Type I bound.
pub const TYPE1_EXPONENTS: [[(i64, i64); 3]; 6] = [
    [(3, 14), (41, 56), (29, 56)],
    [(1, 5), (3, 4), (11, 20)],
    [(1, 8), (13, 16), (11, 16)],
    [(0, 1), (3, 4), (1, 1)],
    [(0, 1), (1, 1), (3, 4)],
    [(-1, 1), (1, 1), (1, 1)],
];

/// Exponents `(of F, of M, of L)` of each term of the bilinear Type II bound.
pub const TYPE2_EXPONENTS: [[(i64, i64); 3]; 11] = [
    [(4, 42), (31, 42), (34, 42)],
    [(6, 66), (53, 66), (51, 66)],
    [(6, 56), (46, 56), (41, 56)],
    [(2, 40), (38, 40), (29, 40)],
    [(3, 46), (43, 46), (32, 46)],
    [(1, 10), (9, 10), (6, 10)],
    [(2, 10), (7, 10), (6, 10)],
    [(1, 8), (6, 8), (6, 8)],
    [(0, 1), (1, 2), (1, 1)],
    [(0, 1), (1, 1), (1, 2)],
    [(-1, 2), (1, 1), (1, 1)],
];

fn monomials<const K: usize>(table: &[[(i64, i64); 3]; K], f: f64, m: f64, l: f64) -> [f64; K] {
    let mut out = [0.0; K];
    for (slot, row) in out.iter_mut().zip(table) {
        let e = |i: usize| row[i].0 as f64 / row[i].1 as f64;
        *slot = f.powf(e(0)) * m.powf(e(1)) * l.powf(e(2));
    }
    out
}

/// The six Type I terms, without the `(ML)^eta` factor.
pub fn type1_terms(f: f64, m: f64, l: f64) -> [f64; 6] {
    monomials(&TYPE1_EXPONENTS, f, m, l)
}

pub fn type1_bound(f: f64, m: f64, l: f64) -> f64 {
    type1_terms(f, m, l).iter().sum()
}

/// The eleven Type II terms, without the `(FML)^eta` factor.
pub fn type2_terms(f: f64, m: f64, l: f64) -> [f64; 11] {
    monomials(&TYPE2_EXPONENTS, f, m, l)
}

pub fn type2_bound(f: f64, m: f64, l: f64) -> f64 {
    type2_terms(f, m, l).iter().sum()
}

/// The exponent `u + v c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AffineExponent {
    pub u: Rational,
    pub v: Rational,
}

impl AffineExponent {
    pub fn new(u: Rational, v: Rational) -> Self {
        Self { u, v }
    }

    pub fn constant(u: Rational) -> Self {
        Self::new(u, Rational::zero())
    }

    pub fn eval(&self, c: &Rational) -> Rational {
        &self.u + &(&self.v * c)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(&self.u * k, &self.v * k)
    }

    /// Order of `self` against `other` throughout `[lo, hi]`, if it does not change.
    pub fn compare_on(&self, other: &Self, lo: &Rational, hi: &Rational) -> Option<Ordering> {
        let a = self.eval(lo).cmp(&other.eval(lo));
        let b = self.eval(hi).cmp(&other.eval(hi));
        (a == b).then_some(a)
    }

    /// The `c` where `self = other`, if the lines are not parallel.
    pub fn crossing(&self, other: &Self) -> Option<Rational> {
        let dv = &self.v - &other.v;
        (!dv.is_zero()).then(|| &(&other.u - &self.u) / &dv)
    }
}

impl Add for AffineExponent {
    type Output = AffineExponent;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.u + rhs.u, self.v + rhs.v)
    }
}

impl Sub for AffineExponent {
    type Output = AffineExponent;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.u - rhs.u, self.v - rhs.v)
    }
}

impl fmt::Display for AffineExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v.is_zero() {
            write!(f, "{}", self.u)
        } else if self.v.is_negative() {
            write!(f, "{} - ({})c", self.u, -self.v.clone())
        } else {
            write!(f, "{} + ({})c", self.u, self.v)
        }
    }
}

/// Pick the largest value at `c`, preferring the earliest candidate with the
/// fewest `c` dependence on ties.
fn dominant(candidates: Vec<AffineExponent>, c: &Rational) -> AffineExponent {
    let mut best: Option<(Rational, AffineExponent)> = None;
    for cand in candidates {
        let val = cand.eval(c);
        let better = match &best {
            None => true,
            Some((bv, be)) => val > *bv || (val == *bv && be.v.is_positive() && cand.v.is_zero()),
        };
        if better {
            best = Some((val, cand));
        }
    }
    best.expect("at least one candidate").1
}

/// A bound term `X^{u + v c + w r + z f}` with `r` a regime variable and
/// `f` the exponent of the phase size `F = |t| X^c`, `1/4 <= f <= c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub label: String,
    pub u: Rational,
    pub v: Rational,
    pub w: Rational,
    pub z: Rational,
    /// Range of the regime variable.
    pub regime: (Rational, Rational),
}

/// One term specialised at a regime endpoint and the worst-case phase size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermValue {
    pub label: String,
    pub regime_point: Rational,
    pub exponent: AffineExponent,
    pub value: Rational,
}

impl Term {
    /// Worst case over the regime endpoints, with `f = c` when `z > 0` and
    /// `f = 1/4` otherwise.
    pub fn evaluate(&self, c: &Rational) -> TermValue {
        let mut best: Option<TermValue> = None;
        for r in [&self.regime.0, &self.regime.1] {
            let (mut u, mut v) = (&self.u + &(&self.w * r), self.v.clone());
            if self.z.is_positive() {
                v = &v + &self.z;
            } else {
                u = &u + &(&self.z * &q(1, 4));
            }
            let exponent = AffineExponent::new(u, v);
            let value = exponent.eval(c);
            if best.as_ref().is_none_or(|b| value > b.value) {
                best = Some(TermValue {
                    label: self.label.clone(),
                    regime_point: r.clone(),
                    exponent,
                    value,
                });
            }
        }
        best.expect("two endpoints")
    }
}

/// `M <= X^{6177/12880}` below, `<= X^{3/5}` above.
pub const TYPE1_SPLIT: (i64, i64) = (6177, 12880);
/// `X^{1/5} <= L <= X^{261/805}` below, `<= X^{1/3}` above.
pub const TYPE2_SPLIT: (i64, i64) = (261, 805);

fn term(label: String, u: Rational, v: Rational, w: Rational, z: Rational, regime: (Rational, Rational)) -> Term {
    Term {
        label,
        u,
        v,
        w,
        z,
        regime,
    }
}

/// Every exponent contributing to the sup bound for `S(t)`, `Delta <= |t| <= H`.
pub fn sup_terms() -> Vec<Term> {
    let zero = Rational::zero;
    let split1 = q(TYPE1_SPLIT.0, TYPE1_SPLIT.1);
    let split2 = q(TYPE2_SPLIT.0, TYPE2_SPLIT.1);
    let mut terms = vec![
        // Prime powers and the smooth part of the identity.
        term("prime powers".into(), q(1, 2), zero(), zero(), zero(), (zero(), zero())),
        // Exponent pair (1/14, 11/14) on the inner sum, r = log_X M.
        term("type I, small M, main".into(), q(5, 7), q(1, 14), q(2, 7), zero(), (zero(), split1.clone())),
        term("type I, small M, 1/Y".into(), q(3, 4), zero(), zero(), zero(), (zero(), split1.clone())),
        // Square-out with Q = X^{1/5} and pair (1/6, 2/3), r = log_X L.
        term("type II, small L, diagonal".into(), q(9, 10), zero(), zero(), zero(), (q(1, 5), split2.clone())),
        term("type II, small L, main".into(), q(23, 30), q(1, 12), q(1, 6), zero(), (q(1, 5), split2.clone())),
        term("type II, small L, 1/Y".into(), q(31, 40), zero(), q(1, 2), zero(), (q(1, 5), split2.clone())),
    ];
    // Bilinear bounds with M = X^r, L = X^{1-r} (Type I) or L = X^r, M = X^{1-r} (Type II).
    for (i, row) in TYPE1_EXPONENTS.iter().enumerate() {
        let (fz, mb, ld) = (q(row[0].0, row[0].1), q(row[1].0, row[1].1), q(row[2].0, row[2].1));
        let w = &mb - &ld;
        terms.push(term(format!("type I, large M, term {}", i + 1), ld, zero(), w, fz, (split1.clone(), q(3, 5))));
    }
    for (i, row) in TYPE2_EXPONENTS.iter().enumerate() {
        let (fz, mb, ld) = (q(row[0].0, row[0].1), q(row[1].0, row[1].1), q(row[2].0, row[2].1));
        let w = &ld - &mb;
        terms.push(term(format!("type II, large L, term {}", i + 1), mb, zero(), w, fz, (split2.clone(), q(1, 3))));
    }
    terms
}

#[derive(Clone, Debug, Serialize)]
pub struct SupReport {
    pub c: Rational,
    pub exponent: AffineExponent,
    pub value: Rational,
    pub terms: Vec<TermValue>,
}

fn check_c(c: &Rational) -> Result<()> {
    if *c <= Rational::one() || *c >= q(3, 2) {
        return Err(BoundsError::ExponentRange(c.clone()));
    }
    Ok(())
}

pub fn sup_s_report(c: &Rational) -> Result<SupReport> {
    check_c(c)?;
    let terms: Vec<TermValue> = sup_terms().iter().map(|t| t.evaluate(c)).collect();
    let exponent = dominant(terms.iter().map(|t| t.exponent.clone()).collect(), c);
    Ok(SupReport {
        c: c.clone(),
        value: exponent.eval(c),
        exponent,
        terms,
    })
}

/// Dominant exponent of `max |S(t)|` over `Delta <= |t| <= H`.
pub fn sup_s_exponent(c: &Rational) -> Result<AffineExponent> {
    Ok(sup_s_report(c)?.exponent)
}

/// The sup exponent at the threshold.
pub fn sup_target() -> Rational {
    q(1207, 1288)
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentChain {
    pub c: Rational,
    pub sup: AffineExponent,
    /// `int |S|^2 |Theta|`.
    pub e2: AffineExponent,
    /// The factor `max |Psi_1|` contributes: `(2 - c + 2s) / 2`.
    pub psi1: AffineExponent,
    /// `int |S|^3 |Theta|`.
    pub e3: AffineExponent,
    /// The factor `max |Psi_2|` contributes: `(2 - c + 3s) / 2`.
    pub psi2: AffineExponent,
    /// `int |S|^4 |Theta|`.
    pub e4: AffineExponent,
}

/// One step of `|int S Psi|^2 <= X^{2-c} max|Psi| int|Psi| + X^{c/2+1} (int|Psi|)^2`
/// with `max |Psi| = X^{k s}` and `int |Psi| = X^{prev}`.
fn moment_step(s: &AffineExponent, k: i64, prev: &AffineExponent, c: &Rational) -> (AffineExponent, AffineExponent) {
    let half = q(1, 2);
    let base = AffineExponent::new(Rational::integer(2), Rational::integer(-1));
    let psi = (base + s.scale(&Rational::integer(k))).scale(&half);
    let first = psi.clone() + prev.scale(&half);
    let second = AffineExponent::new(half.clone(), q(1, 4)) + prev.clone();
    (psi, dominant(vec![first, second], c))
}

pub fn l_moment_chain(c: &Rational) -> Result<MomentChain> {
    let sup = sup_s_exponent(c)?;
    let e2 = AffineExponent::constant(Rational::one());
    let (psi1, e3) = moment_step(&sup, 2, &e2, c);
    let (psi2, e4) = moment_step(&sup, 3, &e3, c);
    Ok(MomentChain {
        c: c.clone(),
        sup,
        e2,
        psi1,
        e3,
        psi2,
        e4,
    })
}

/// Exponent of `max|S| (int |S|^4 |Theta|)^{1/2} (int |K|^2 |Theta|)^{1/2}`, with the
/// last integral `X^1`.
pub fn gamma32_exponent(c: &Rational) -> Result<AffineExponent> {
    let chain = l_moment_chain(c)?;
    let half = q(1, 2);
    Ok(chain.sup + chain.e4.scale(&half) + AffineExponent::constant(half))
}

/// `(4 - c) - gamma32_exponent(c)`; positive exactly when the minor-arc term is
/// smaller than the main term.
pub fn gamma32_margin(c: &Rational) -> Result<Rational> {
    let main = AffineExponent::new(Rational::integer(4), Rational::integer(-1));
    Ok((main - gamma32_exponent(c)?).eval(c))
}

/// The largest `c` allowed by the minor-arc estimate: the solution of
/// `gamma32_exponent(c) = 4 - c`, iterating over the dominant branches.
pub fn c_threshold() -> Result<Rational> {
    let main = AffineExponent::new(Rational::integer(4), Rational::integer(-1));
    let mut c = q(11, 10);
    for _ in 0..32 {
        let lhs = gamma32_exponent(&c)?;
        let next = lhs.crossing(&main).ok_or(BoundsError::NoFixedPoint)?;
        check_c(&next)?;
        if next == c {
            return Ok(c);
        }
        c = next;
    }
    Err(BoundsError::NoFixedPoint)
}

/// `1/2 - e ln 2 / 4`.
pub fn theta0_value() -> f64 {
    0.5 - std::f64::consts::E * std::f64::consts::LN_2 / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(k: (i64, i64), l: (i64, i64)) -> ExponentPair {
        ExponentPair::new(q(k.0, k.1), q(l.0, l.1)).unwrap()
    }

    #[test]
    fn processes_on_known_pairs() {
        let t = ExponentPair::trivial();
        assert_eq!(ep_a(&t), t);
        assert_eq!(ep_b(&t), pair((1, 2), (1, 2)));
        assert_eq!(ep_a(&pair((1, 2), (1, 2))), pair((1, 6), (2, 3)));
        assert_eq!(ep_a(&pair((1, 6), (2, 3))), pair((1, 14), (11, 14)));
        assert_eq!(ep_b(&pair((1, 6), (2, 3))), pair((1, 6), (2, 3)));
        assert_eq!(apply_word("B", &t).unwrap(), pair((1, 2), (1, 2)));
        assert_eq!(apply_word("AB", &t).unwrap(), pair((1, 6), (2, 3)));
        assert_eq!(apply_word("AAB", &t).unwrap(), pair((1, 14), (11, 14)));
        assert!(apply_word("AC", &t).is_err());
        assert!(ExponentPair::new(q(3, 5), q(1, 2)).is_err());
    }

    #[test]
    fn words_stay_admissible() {
        let t = ExponentPair::trivial();
        for len in 0..=6u32 {
            for bits in 0..(1u32 << len) {
                let word: String = (0..len).map(|i| if bits >> i & 1 == 1 { 'A' } else { 'B' }).collect();
                assert!(apply_word(&word, &t).unwrap().is_admissible(), "{word}");
            }
        }
    }

    #[test]
    fn bound_evaluators() {
        let t = ExponentPair::trivial();
        assert_eq!(ep_bound(&t, 4.0, 100.0), 100.25);
        let h = pair((1, 2), (1, 2));
        assert!((ep_bound(&h, 1e4, 1e4) - (1e4 + 1e-4)).abs() < 1e-9);
        assert_eq!(type1_bound(1.0, 1.0, 1.0), 6.0);
        assert_eq!(type2_bound(1.0, 1.0, 1.0), 11.0);
    }

    fn dyadic_check<const K: usize>(table: &[[(i64, i64); 3]; K], terms: [f64; K], exps: [i64; 3]) {
        for (row, v) in table.iter().zip(terms) {
            let e: Rational = (0..3).fold(Rational::zero(), |acc, i| {
                acc + q(row[i].0, row[i].1) * Rational::integer(exps[i])
            });
            let expect = e.to_f64().exp2();
            assert!((v - expect).abs() <= 1e-12 * expect, "{v} vs 2^{e}");
        }
    }

    #[test]
    fn dyadic_evaluations() {
        dyadic_check(&TYPE1_EXPONENTS, type1_terms(2f64.powi(42), 2f64.powi(56), 2f64.powi(56)), [42, 56, 56]);
        let t1 = type1_terms(2f64.powi(42), 2f64.powi(56), 2f64.powi(56));
        assert!((t1[0] / 2f64.powi(9 + 41 + 29) - 1.0).abs() < 1e-14);
        dyadic_check(&TYPE2_EXPONENTS, type2_terms(2f64.powi(84), 2f64.powi(66), 2f64.powi(66)), [84, 66, 66]);
    }

    #[test]
    fn constants() {
        let v = theta0_value();
        assert!(v > 0.0289 && v < 0.0290);
        assert!((v - 0.028_957_653_6).abs() < 1e-9);
        assert!(((0.5 - v) - std::f64::consts::E * 2f64.ln() / 4.0).abs() < 1e-16);
        let c = c_threshold().unwrap();
        assert_eq!(c, q(967, 805));
        assert!((c.to_f64() - 1.201_242).abs() < 1e-6);
    }

    #[test]
    fn sup_exponent_at_threshold() {
        let c = q(967, 805);
        let rep = sup_s_report(&c).unwrap();
        assert_eq!(rep.value, q(1207, 1288));
        assert_eq!(rep.exponent, AffineExponent::constant(q(1207, 1288)));
        // The type I boundary term lands exactly on the target.
        let boundary = &(&(&c + &Rational::integer(10)) / &Rational::integer(14))
            + &(&q(2, 7) * &q(6177, 12880));
        assert_eq!(boundary, q(1207, 1288));
        assert!(q(3, 4) < q(1207, 1288));
        for t in &rep.terms {
            assert!(t.value <= q(1207, 1288), "{}: {}", t.label, t.value);
        }
        for c in [q(101, 100), q(11, 10), q(6, 5)] {
            assert_eq!(sup_s_exponent(&c).unwrap().eval(&c), q(1207, 1288));
        }
        assert!(sup_s_exponent(&q(5, 4)).unwrap().eval(&q(5, 4)) > q(1207, 1288));
        assert!(sup_s_exponent(&q(3, 2)).is_err());
        assert!(sup_s_exponent(&Rational::one()).is_err());
    }

    #[test]
    fn moment_chain_rationals() {
        let c = q(967, 805);
        let ch = l_moment_chain(&c).unwrap();
        assert_eq!(ch.e2, AffineExponent::constant(Rational::one()));
        assert_eq!(ch.psi1, AffineExponent::new(q(2495, 1288), q(-1, 2)));
        assert_eq!(ch.e3, AffineExponent::new(q(3139, 1288), q(-1, 2)));
        assert_eq!(ch.psi2, AffineExponent::new(q(6197, 2576), q(-1, 2)));
        assert_eq!(ch.e4, AffineExponent::new(q(1167, 322), q(-3, 4)));
        assert_eq!(q(9336, 2576), q(1167, 322));
        assert_eq!(q(2576 + 3621, 1288) / Rational::integer(2), q(6197, 2576));
    }

    #[test]
    fn threshold_is_sharp() {
        let c = q(967, 805);
        assert!(gamma32_margin(&c).unwrap().is_zero());
        let below = &c - &q(1, 1000);
        assert!(gamma32_margin(&below).unwrap().is_positive());
        let above = &c + &q(1, 1000);
        assert!(gamma32_margin(&above).unwrap().is_negative());
    }

    #[test]
    fn parsing_and_display() {
        assert_eq!("967/805".parse::<Rational>().unwrap(), q(967, 805));
        assert_eq!("-4/6".parse::<Rational>().unwrap(), q(-2, 3));
        assert_eq!("7".parse::<Rational>().unwrap(), Rational::integer(7));
        assert!("1.2".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
        assert_eq!(q(6, 4).to_string(), "3/2");
        let s = serde_json::to_string(&pair((1, 14), (11, 14))).unwrap();
        assert_eq!(s, r#"{"kappa":{"num":1,"den":14},"lambda":{"num":11,"den":14}}"#);
    }

    fn small() -> impl Strategy<Value = Rational> {
        (-50i64..50, 1i64..50).prop_map(|(n, d)| q(n, d))
    }

    proptest! {
        #[test]
        fn rational_field_laws(a in small(), b in small(), c in small()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            let sum = &a + &b;
            prop_assert!(num_integer::Integer::gcd(sum.numer(), sum.denom()).is_one());
            prop_assert!(sum.denom().is_positive());
        }

        #[test]
        fn b_is_an_involution(k in 0i64..=50, l in 50i64..=100) {
            let p = pair((k, 100), (l, 100));
            prop_assert_eq!(ep_b(&ep_b(&p)), p);
        }

        #[test]
        fn bounds_monotone(f in 1.0f64..1e6, m in 1.0f64..1e6, l in 1.0f64..1e6, k in 1.0f64..10.0) {
            for (a, b) in type1_terms(f, m, l).iter().zip(type1_terms(f, m * k, l)) {
                prop_assert!(b >= *a * (1.0 - 1e-12));
            }
            for (a, b) in type1_terms(f, m, l).iter().zip(type1_terms(f, m, l * k)) {
                prop_assert!(b >= *a * (1.0 - 1e-12));
            }
            for (a, b) in type2_terms(f, m, l).iter().zip(type2_terms(f, m * k, l)) {
                prop_assert!(b >= *a * (1.0 - 1e-12));
            }
            for (a, b) in type2_terms(f, m, l).iter().zip(type2_terms(f, m, l * k)) {
                prop_assert!(b >= *a * (1.0 - 1e-12));
            }
            // Only the last term of each list decreases in F.
            let (a1, b1) = (type1_terms(f, m, l), type1_terms(f * k, m, l));
            for i in 0..5 {
                prop_assert!(b1[i] >= a1[i] * (1.0 - 1e-12));
            }
            let (a2, b2) = (type2_terms(f, m, l), type2_terms(f * k, m, l));
            for i in 0..10 {
                prop_assert!(b2[i] >= a2[i] * (1.0 - 1e-12));
            }
        }
    }
}
