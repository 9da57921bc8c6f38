//! Exponential sums over primes and the matching oscillatory integrals.
//!
//! `e(x) = exp(2 pi i x)`. Frequencies `n^c` are computed as `exp(c ln n)`,
//! so a phase `t n^c` carries an absolute error near `|t| n^c 1e-16`. Every
//! checked evaluation refuses when that budget exceeds `1e-6`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{chi4, ArithError, PrimeTable};
use crate::gamma::RunParams;
use crate::par;
use crate::quad;
use crate::smoothing::SmoothingKernel;

/// Value of any sum or integral at a given `t`.
pub type ComplexAmp = Complex64;

/// Largest tolerated phase error.
pub const PHASE_BUDGET: f64 = 1e-6;
const UNIT_ROUNDOFF: f64 = 1e-16;

#[derive(Debug, Error)]
pub enum ExpSumError {
    #[error("interval end {hi} exceeds the prime table limit {limit}")]
    TableTooSmall { hi: f64, limit: u64 },
    #[error("phase error budget {budget:e} exceeds {PHASE_BUDGET:e} (|t| = {t}, top frequency {top:e})")]
    PhaseBudget { budget: f64, t: f64, top: f64 },
    #[error("residue {a} is not coprime to modulus {d}")]
    NotCoprime { a: i64, d: u64 },
    #[error("invalid interval ({lo}, {hi}]")]
    Interval { lo: f64, hi: f64 },
    #[error("exponent c = {0} outside the admissible range")]
    Exponent(f64),
    #[error("|t| = {t} exceeds the major-arc radius {delta}")]
    OutsideArc { t: f64, delta: f64 },
    #[error("modulus bound {dmax} exceeds sqrt(X) = {root}")]
    ModulusBound { dmax: u64, root: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Quadrature(#[from] quad::NoConvergence),
}

pub type Result<T> = std::result::Result<T, ExpSumError>;

/// `e(x)`, reducing `x` to `[-1/2, 1/2]` before the trigonometric call.
pub fn e(x: f64) -> Complex64 {
    let r = x - x.round();
    let (s, c) = (TAU * r).sin_cos();
    Complex64::new(c, s)
}

pub fn phase_error_budget(t: f64, top_frequency: f64) -> f64 {
    t.abs() * top_frequency * UNIT_ROUNDOFF
}

fn check_phase(t: f64, top: f64) -> Result<()> {
    let budget = phase_error_budget(t, top);
    if budget > PHASE_BUDGET {
        return Err(ExpSumError::PhaseBudget { budget, t, top });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Weight {
    /// `log p` over primes.
    LogPrime,
    /// `Lambda(n)` over all integers.
    VonMangoldt,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpSumSpec {
    pub c: f64,
    pub lo: f64,
    pub hi: f64,
    /// Residue, reduced to `0..d`.
    pub l: u64,
    pub d: u64,
    pub weight: Weight,
}

impl ExpSumSpec {
    pub fn new(c: f64, lo: f64, hi: f64, l: i64, d: u64, weight: Weight) -> Result<Self> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(ExpSumError::Exponent(c));
        }
        if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
            return Err(ExpSumError::Interval { lo, hi });
        }
        if d == 0 {
            return Err(ExpSumError::NotCoprime { a: l, d });
        }
        let reduced = l.rem_euclid(d as i64) as u64;
        if reduced.gcd(&d) != 1 {
            return Err(ExpSumError::NotCoprime { a: l, d });
        }
        Ok(Self {
            c,
            lo,
            hi,
            l: reduced,
            d,
            weight,
        })
    }

    /// All primes in `(lo, hi]`, `log p` weights.
    pub fn primes(c: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(c, lo, hi, 1, 1, Weight::LogPrime)
    }
}

/// A fixed trigonometric polynomial `sum_j w_j e(t f_j)`.
#[derive(Clone, Debug, Default)]
pub struct PhaseSum {
    freq: Vec<f64>,
    weight: Vec<f64>,
    top: f64,
}

impl PhaseSum {
    pub fn new(freq: Vec<f64>, weight: Vec<f64>) -> Self {
        assert_eq!(freq.len(), weight.len());
        let top = freq.iter().fold(0.0f64, |m, f| m.max(f.abs()));
        Self { freq, weight, top }
    }

    pub fn from_spec(spec: &ExpSumSpec, table: &PrimeTable) -> Result<Self> {
        let terms = support(spec.lo, spec.hi, spec.weight, table)?;
        let (freq, weight) = terms
            .into_iter()
            .filter(|&(n, _)| n % spec.d == spec.l)
            .map(|(n, w)| (power(n, spec.c), w))
            .unzip();
        Ok(Self::new(freq, weight))
    }

    pub fn len(&self) -> usize {
        self.freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.freq
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn top_frequency(&self) -> f64 {
        self.top
    }

    /// Unchecked evaluation; deterministic for any thread count.
    pub fn eval(&self, t: f64) -> Complex64 {
        par::block_sum(self.len(), |r| {
            r.fold(Complex64::new(0.0, 0.0), |acc, j| {
                acc + e(t * self.freq[j]) * self.weight[j]
            })
        })
    }

    pub fn checked_eval(&self, t: f64) -> Result<Complex64> {
        check_phase(t, self.top)?;
        Ok(self.eval(t))
    }

    /// `int_{-delta}^{delta} |sum|^2 dt`, summed in closed form over pairs.
    pub fn mean_square_symmetric(&self, delta: f64) -> f64 {
        self.pair_sum(|gap| 2.0 * delta * sinc(TAU * delta * gap))
    }

    /// `int_n^{n+1} |sum|^2 dt`, summed in closed form over pairs.
    pub fn mean_square_unit(&self, n: f64) -> f64 {
        self.pair_sum(|gap| (TAU * (n + 0.5) * gap).cos() * sinc(PI * gap))
    }

    fn pair_sum<F: Fn(f64) -> f64 + Sync + Send>(&self, kernel: F) -> f64 {
        let m = self.len();
        par::sum_by(m, |j| {
            let (fj, wj) = (self.freq[j], self.weight[j]);
            let mut acc = 0.0;
            for k in 0..m {
                acc += self.weight[k] * kernel(fj - self.freq[k]);
            }
            wj * acc
        })
    }
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// `n^c` as `exp(c ln n)`.
pub fn power(n: u64, c: f64) -> f64 {
    (c * (n as f64).ln()).exp()
}

fn check_table(hi: f64, table: &PrimeTable) -> Result<()> {
    if hi > table.limit() as f64 {
        return Err(ExpSumError::TableTooSmall {
            hi,
            limit: table.limit(),
        });
    }
    Ok(())
}

/// `(n, weight)` in ascending `n` over `(lo, hi]`.
fn support(lo: f64, hi: f64, weight: Weight, table: &PrimeTable) -> Result<Vec<(u64, f64)>> {
    check_table(hi, table)?;
    let range = table.index_range(lo, hi);
    let primes = &table.primes()[range.clone()];
    let logs = &table.logp()[range];
    match weight {
        Weight::LogPrime => Ok(primes.iter().copied().zip(logs.iter().copied()).collect()),
        Weight::VonMangoldt => Ok(prime_powers(lo, hi, table)),
    }
}

/// Prime powers `p^k` in `(lo, hi]` with `Lambda = ln p`, ascending.
pub fn prime_powers(lo: f64, hi: f64, table: &PrimeTable) -> Vec<(u64, f64)> {
    let top = table.index_range(0.0, hi);
    let mut out = Vec::new();
    for (&p, &lp) in table.primes()[top.clone()].iter().zip(&table.logp()[top]) {
        let mut q = p;
        loop {
            if q as f64 > lo {
                out.push((q, lp));
            }
            match q.checked_mul(p) {
                Some(next) if next as f64 <= hi => q = next,
                _ => break,
            }
        }
    }
    out.sort_unstable_by_key(|&(n, _)| n);
    out
}

/// `S_{l,d;J}(t)`.
pub fn eval_s(spec: &ExpSumSpec, t: f64, table: &PrimeTable) -> Result<ComplexAmp> {
    check_phase(t, spec.hi.powf(spec.c))?;
    Ok(PhaseSum::from_spec(spec, table)?.eval(t))
}

/// The sum over `(lo, hi]` split by residue class mod `d`: entry `l` holds
/// the sum over `n = l (mod d)`, coprime or not.
pub fn residue_sums(
    c: f64,
    lo: f64,
    hi: f64,
    d: u64,
    weight: Weight,
    t: f64,
    table: &PrimeTable,
) -> Result<Vec<ComplexAmp>> {
    if d == 0 {
        return Err(ExpSumError::Parameter("modulus must be positive".into()));
    }
    check_phase(t, hi.powf(c))?;
    let terms = support(lo, hi, weight, table)?;
    let mut out = vec![Complex64::new(0.0, 0.0); d as usize];
    for (n, w) in terms {
        out[(n % d) as usize] += e(t * power(n, c)) * w;
    }
    Ok(out)
}

/// `I_J(t) = int_lo^hi e(t y^c) dy`.
pub fn eval_i(c: f64, lo: f64, hi: f64, t: f64) -> Result<ComplexAmp> {
    if !(c > 1.0) {
        return Err(ExpSumError::Exponent(c));
    }
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(ExpSumError::Interval { lo, hi });
    }
    check_phase(t, hi.powf(c))?;
    Ok(integral_unchecked(c, lo, hi, t))
}

/// Beyond this many periods the tail is summed asymptotically.
const ASYMPTOTIC_PERIODS: f64 = 1e5;
/// `2 pi |t| u` where the asymptotic tail starts; later terms shrink like `k / 400`.
const ASYMPTOTIC_SCALE: f64 = 400.0;

fn integral_unchecked(c: f64, lo: f64, hi: f64, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(hi - lo, 0.0);
    }
    let (ulo, uhi) = (lo.powf(c), hi.powf(c));
    let ustar = ASYMPTOTIC_SCALE / (2.0 * PI * t.abs());
    if t.abs() * (uhi - ulo) <= ASYMPTOTIC_PERIODS || ustar >= uhi {
        return integral_quadrature(c, lo, hi, t);
    }
    if ustar <= ulo {
        return integral_asymptotic(c, lo, hi, t);
    }
    let split = ustar.powf(1.0 / c);
    integral_quadrature(c, lo, split, t) + integral_asymptotic(c, split, hi, t)
}

fn integral_quadrature(c: f64, lo: f64, hi: f64, t: f64) -> Complex64 {
    // Panels of at most an eighth of the shortest local wavelength.
    let width = 1.0 / (8.0 * t.abs() * c * hi.powf(c - 1.0));
    let n = quad::panel_count(hi - lo, width);
    let h = (hi - lo) / n as f64;
    let f = |y: f64| e(t * y.powf(c));
    par::sum_by(n, |i| {
        let a = lo + h * i as f64;
        let b = if i + 1 == n { hi } else { a + h };
        quad::gl_panel(&f, a, b)
    })
}

/// With `u = y^c` the integral is `int g(u) e(t u) du`, `g = u^{1/c - 1} / c`;
/// repeated integration by parts gives
/// `sum_k (-1)^k g^(k)(u) e(t u) / (2 pi i t)^{k+1}` at the endpoints.
/// Requires `2 pi |t| lo^c >= ASYMPTOTIC_SCALE`.
fn integral_asymptotic(c: f64, lo: f64, hi: f64, t: f64) -> Complex64 {
    let alpha = 1.0 / c - 1.0;
    let w = Complex64::new(0.0, 2.0 * PI * t);
    let at = |y: f64| {
        let u = y.powf(c);
        let mut term = u.powf(alpha) / c / w;
        let mut sum = term;
        for k in 1..64 {
            term *= -(alpha - (k - 1) as f64) / (u * w);
            sum += term;
            if term.norm() <= 1e-18 * sum.norm() {
                break;
            }
        }
        sum * e(t * u)
    };
    at(hi) - at(lo)
}

/// `E(y, t, d, a)`: the `Lambda`-weighted sum over `mu y < n <= y`,
/// `n = a (mod d)`, minus `I_{(mu y, y]}(t) / phi(d)`.
#[allow(clippy::too_many_arguments)]
pub fn eval_e(
    y: f64,
    t: f64,
    d: u64,
    a: i64,
    mu: f64,
    c: f64,
    table: &PrimeTable,
) -> Result<ComplexAmp> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(ExpSumError::Parameter(format!("mu = {mu} outside (0, 1)")));
    }
    let spec = ExpSumSpec::new(c, mu * y, y, a, d, Weight::VonMangoldt)?;
    let sum = eval_s(&spec, t, table)?;
    let phi = table.factorize_unbounded(d)?.euler_phi() as f64;
    Ok(sum - eval_i(c, mu * y, y, t)? / phi)
}

#[derive(Clone, Debug, Serialize)]
pub struct BvReport {
    /// Sum over moduli of the sampled maxima of `|E|`.
    pub value: f64,
    /// `value / (X / ln^A X)`.
    pub ratio: f64,
    pub log_power: f64,
    /// False when `|t|` lies outside the range where the average is expected small.
    pub t_in_range: bool,
    pub y_grid: Vec<f64>,
}

/// Sampling of the cutoff `y`: `points` geometric steps from 2 to `X` (at least 16).
#[derive(Clone, Copy, Debug)]
pub struct YGrid {
    pub points: usize,
}

impl Default for YGrid {
    fn default() -> Self {
        Self { points: 16 }
    }
}

impl YGrid {
    pub fn sample(&self, x: f64) -> Vec<f64> {
        let n = self.points.max(16);
        let ratio = (x / 2.0).ln() / (n - 1) as f64;
        (0..n)
            .map(|i| if i + 1 == n { x } else { 2.0 * (ratio * i as f64).exp() })
            .collect()
    }
}

/// `sum_{d <= dmax} max_y max_{(a,d)=1} |E(y, t, d, a)|` over a sampled grid of `y`.
#[allow(clippy::too_many_arguments)]
pub fn bv_statistic(
    x: f64,
    t: f64,
    dmax: u64,
    c: f64,
    mu: f64,
    log_power: f64,
    table: &PrimeTable,
    grid: YGrid,
) -> Result<BvReport> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(ExpSumError::Parameter(format!("mu = {mu} outside (0, 1)")));
    }
    if !(c > 1.0) {
        return Err(ExpSumError::Exponent(c));
    }
    if dmax as f64 > x.sqrt() {
        return Err(ExpSumError::ModulusBound {
            dmax,
            root: x.sqrt(),
        });
    }
    check_table(x, table)?;
    check_phase(t, x.powf(c))?;
    let ys = grid.sample(x);
    let powers = prime_powers(0.0, x, table);
    let terms: Vec<Complex64> = powers.iter().map(|&(n, w)| e(t * power(n, c)) * w).collect();
    let phis: Vec<f64> = (1..=dmax)
        .map(|d| table.factorize_unbounded(d).map(|f| f.euler_phi() as f64))
        .collect::<std::result::Result<_, _>>()?;

    // per_y[i][d - 1] = max over coprime a of |E(y_i, t, d, a)|
    let per_y: Vec<Vec<f64>> = par::map_collect(ys.len(), |i| {
        let y = ys[i];
        let lo = mu * y;
        let start = powers.partition_point(|&(n, _)| n as f64 <= lo);
        let end = powers.partition_point(|&(n, _)| n as f64 <= y);
        let main = if lo > 0.0 && lo < y {
            integral_unchecked(c, lo, y, t)
        } else {
            Complex64::new(0.0, 0.0)
        };
        (1..=dmax)
            .map(|d| {
                let mut acc = vec![Complex64::new(0.0, 0.0); d as usize];
                for j in start..end {
                    acc[(powers[j].0 % d) as usize] += terms[j];
                }
                let expected = main / phis[d as usize - 1];
                (0..d)
                    .filter(|a| a.gcd(&d) == 1)
                    .map(|a| (acc[a as usize] - expected).norm())
                    .fold(0.0, f64::max)
            })
            .collect()
    });
    let value: f64 = (0..dmax as usize)
        .map(|k| per_y.iter().map(|row| row[k]).fold(0.0, f64::max))
        .sum();
    let delta = x.powf(0.25 - c);
    Ok(BvReport {
        value,
        ratio: value / (x / x.ln().powf(log_power)),
        log_power,
        t_in_range: t.abs() < delta,
        y_grid: ys,
    })
}

/// The sum `K(t)` over shifted residue classes, stored as one weight per prime:
/// `w(p) = ln p * sum chi_4((p - 1)/m)` over even `m < D` dividing `p - 1`
/// with `p > 1 + m X / D`.
#[derive(Clone, Debug)]
pub struct KSum {
    sum: PhaseSum,
}

impl KSum {
    pub fn new(x: f64, d_cut: f64, c: f64, table: &PrimeTable) -> Result<Self> {
        check_table(x, table)?;
        let range = table.index_range(x / 2.0, x);
        let primes = &table.primes()[range.clone()];
        let logs = &table.logp()[range];
        let weights: Vec<f64> = par::map_collect(primes.len(), |i| {
            let p = primes[i];
            let divisors = match table.factorize(p - 1) {
                Ok(f) => f.divisors(),
                Err(_) => return Err(()),
            };
            let s: i64 = divisors
                .into_iter()
                .filter(|&m| m % 2 == 0 && (m as f64) < d_cut && p as f64 > 1.0 + m as f64 * x / d_cut)
                .map(|m| chi4((p - 1) / m) as i64)
                .sum();
            Ok(s as f64 * logs[i])
        })
        .into_iter()
        .collect::<std::result::Result<_, ()>>()
        .map_err(|_| ExpSumError::TableTooSmall {
            hi: x,
            limit: table.limit(),
        })?;
        let (freq, weight) = primes
            .iter()
            .zip(weights)
            .filter(|(_, w)| *w != 0.0)
            .map(|(&p, w)| (power(p, c), w))
            .unzip();
        Ok(Self {
            sum: PhaseSum::new(freq, weight),
        })
    }

    pub fn phase_sum(&self) -> &PhaseSum {
        &self.sum
    }

    pub fn eval(&self, t: f64) -> Result<ComplexAmp> {
        self.sum.checked_eval(t)
    }

    /// `int_lo^hi |K(t)|^2 |Theta(t)| dt` by composite Simpson on a uniform
    /// grid with at least 16 points per period of the fastest beat in `|K|^2`.
    pub fn weighted_square_integral(&self, kernel: &SmoothingKernel, lo: f64, hi: f64) -> Result<f64> {
        if hi <= lo || self.sum.is_empty() {
            return Ok(0.0);
        }
        check_phase(hi, self.sum.top_frequency())?;
        let f = self.sum.frequencies();
        let w = self.sum.weights();
        let (fmin, fmax) = f
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let spread = (fmax - fmin).max(kernel.support());
        let mut steps = ((hi - lo) * spread * 16.0).ceil() as usize;
        steps = steps.max(2);
        steps += steps % 2;
        let h = (hi - lo) / steps as f64;
        let rotation: Vec<Complex64> = f.iter().map(|&fj| e(h * fj)).collect();
        const CHUNK: usize = 1024;
        let chunks = (steps + 1).div_ceil(CHUNK);
        let total: f64 = par::sum_by(chunks, |ci| {
            let first = ci * CHUNK;
            let last = ((ci + 1) * CHUNK).min(steps + 1);
            let t0 = lo + h * first as f64;
            let mut z: Vec<Complex64> = f.iter().zip(w).map(|(&fj, &wj)| e(t0 * fj) * wj).collect();
            let mut acc = 0.0;
            for i in first..last {
                let t = lo + h * i as f64;
                let k: Complex64 = z.iter().sum();
                let simpson = if i == 0 || i == steps {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += simpson * k.norm_sqr() * kernel.theta_fourier(t).abs();
                for (zj, rj) in z.iter_mut().zip(&rotation) {
                    *zj *= rj;
                }
            }
            acc
        });
        Ok(total * h / 3.0)
    }
}

/// `K(t)` for the parameters of a run.
pub fn eval_k(t: f64, params: &RunParams, table: &PrimeTable) -> Result<ComplexAmp> {
    if params.d() < 2.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    KSum::new(params.x(), params.d(), params.c(), table)?.eval(t)
}

#[derive(Clone, Debug, Serialize)]
pub struct KMoment {
    /// `int_Delta^H |K|^2 |Theta| dt`.
    pub value: f64,
    /// `value / (X ln^7 X)`.
    pub ratio: f64,
}

pub fn k_moment(params: &RunParams, table: &PrimeTable) -> Result<KMoment> {
    let x = params.x();
    let value = if params.d() < 2.0 {
        0.0
    } else {
        KSum::new(x, params.d(), params.c(), table)?.weighted_square_integral(
            params.kernel(),
            params.delta(),
            params.h(),
        )?
    };
    Ok(KMoment {
        value,
        ratio: value / (x * x.ln().powi(7)),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub gap: f64,
    /// `gap / (X / exp(ln^{1/5} X))`.
    pub ratio: f64,
}

/// `|S(t) - I(t)|` over `(X/2, X]` for `|t| <= X^{1/4 - c}`.
pub fn sl_gap(x: f64, c: f64, t: f64, table: &PrimeTable) -> Result<GapReport> {
    if !(c > 1.0 && c < 3.0) || c == 2.0 {
        return Err(ExpSumError::Exponent(c));
    }
    let delta = x.powf(0.25 - c);
    if t.abs() > delta {
        return Err(ExpSumError::OutsideArc { t, delta });
    }
    let s = eval_s(&ExpSumSpec::primes(c, x / 2.0, x)?, t, table)?;
    let i = eval_i(c, x / 2.0, x, t)?;
    let gap = (s - i).norm();
    Ok(GapReport {
        gap,
        ratio: gap / (x / x.ln().powf(0.2).exp()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    /// `int_{-Delta}^{Delta} |S|^2`.
    pub l2_s: f64,
    /// `int_{-Delta}^{Delta} |I|^2`.
    pub l2_i: f64,
    /// `int_n^{n+1} |S|^2`.
    pub unit_l2_s: f64,
    pub unit_start: f64,
    /// `l2_s / (X^{2-c} ln^3 X)`.
    pub l2_s_ratio: f64,
    /// `l2_i / (X^{2-c} ln X)`.
    pub l2_i_ratio: f64,
    /// `unit_l2_s / (X ln^3 X)`.
    pub unit_l2_s_ratio: f64,
}

/// Second moments of `S` and `I` over `(X/2, X]`. `|S|^2` integrals are summed
/// in closed form over prime pairs; `|I|^2` is integrated numerically.
pub fn moment_integrals(params: &RunParams, unit_start: f64, table: &PrimeTable) -> Result<MomentReport> {
    let (x, c, delta) = (params.x(), params.c(), params.delta());
    let sum = PhaseSum::from_spec(&ExpSumSpec::primes(c, x / 2.0, x)?, table)?;
    check_phase(unit_start.abs() + 1.0, sum.top_frequency())?;
    let l2_s = sum.mean_square_symmetric(delta);
    let unit_l2_s = sum.mean_square_unit(unit_start);
    let beat = x.powf(c) - (x / 2.0).powf(c);
    let l2_i = 2.0 * quad::gl_panels(
        |t: f64| integral_unchecked(c, x / 2.0, x, t).norm_sqr(),
        0.0,
        delta,
        1.0 / (8.0 * beat),
    );
    let lx = x.ln();
    Ok(MomentReport {
        l2_s,
        l2_i,
        unit_l2_s,
        unit_start,
        l2_s_ratio: l2_s / (x.powf(2.0 - c) * lx.powi(3)),
        l2_i_ratio: l2_i / (x.powf(2.0 - c) * lx),
        unit_l2_s_ratio: unit_l2_s / (x * lx.powi(3)),
    })
}

/// Both sides of the square-out inequality for `a(n)`, `n` running over
/// `values` consecutively: `(|sum a|^2, (1 + len/Q) sum_{|q|<=Q} (1 - |q|/Q) sum_n a(n+q) conj a(n))`.
pub fn square_out(values: &[Complex64], q: usize) -> (f64, f64) {
    assert!(q >= 1);
    let n = values.len();
    let lhs = values.iter().sum::<Complex64>().norm_sqr();
    let mut rhs = Complex64::new(0.0, 0.0);
    for shift in -(q as i64)..=(q as i64) {
        let taper = 1.0 - shift.unsigned_abs() as f64 / q as f64;
        let mut corr = Complex64::new(0.0, 0.0);
        for i in 0..n as i64 {
            let j = i + shift;
            if (0..n as i64).contains(&j) {
                corr += values[j as usize] * values[i as usize].conj();
            }
        }
        rhs += corr * taper;
    }
    (lhs, (1.0 + n as f64 / q as f64) * rhs.re)
}
