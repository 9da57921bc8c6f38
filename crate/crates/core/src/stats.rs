//! Arithmetic statistics: sums of `r(p - 1)`, the singular product, partial
//! sums of `chi_4(d) / phi(d)` and divisors of `p - 1` near `sqrt X`.

use serde::Serialize;
use thiserror::Error;

use crate::arith::{chi4, ArithError, PrimeTable};
use crate::bounds::theta0_value;
use crate::par;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("{x} exceeds the prime table limit {limit}")]
    Range { x: f64, limit: u64 },
    #[error("omega must be positive and finite, got {0}")]
    Omega(f64),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

pub type Result<T> = std::result::Result<T, StatsError>;

fn check_x(x: f64, table: &PrimeTable) -> Result<u64> {
    if !(x.is_finite() && x >= 1.0) || x > table.limit() as f64 {
        return Err(StatsError::Range { x, limit: table.limit() });
    }
    Ok(x.floor() as u64)
}

#[derive(Clone, Debug, Serialize)]
pub struct LinnikPartial {
    pub x: f64,
    pub sum: u64,
    pub main: f64,
    pub ratio: f64,
}

/// `sum_{p <= X} r(p - 1)` against `pi prod_{p>2} (1 + chi_4(p)/(p(p-1))) X / ln X`,
/// with the product taken over the whole table.
pub fn linnik_partial(x: f64, table: &PrimeTable) -> Result<LinnikPartial> {
    let xi = check_x(x, table)?;
    let primes = &table.primes()[..table.pi(xi)];
    let sum: u64 = par::sum_by(primes.len(), |i| table.r2(primes[i] - 1).unwrap_or(0));
    let main = singular_product(table.limit(), table)?.value * x / x.ln();
    Ok(LinnikPartial {
        x,
        sum,
        main,
        ratio: sum as f64 / main,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularProduct {
    pub plimit: u64,
    pub value: f64,
    /// Bound on `|value - value(infinity)|` from `sum_{n > plimit} 1/(n(n-1)) = 1/plimit`.
    pub tail_bound: f64,
}

/// `ln(1 + chi_4(p) / (p (p - 1)))`.
fn local_factor(p: u64) -> f64 {
    let pf = p as f64;
    (chi4(p) as f64 / (pf * (pf - 1.0))).ln_1p()
}

/// `pi prod_{2 < p <= plimit} (1 + chi_4(p) / (p(p-1)))`.
pub fn singular_product(plimit: u64, table: &PrimeTable) -> Result<SingularProduct> {
    if plimit > table.limit() {
        return Err(StatsError::Range {
            x: plimit as f64,
            limit: table.limit(),
        });
    }
    let primes = &table.primes()[..table.pi(plimit)];
    // Logs summed in fixed blocks keep the product reproducible.
    let log: f64 = par::sum_by(primes.len(), |i| if primes[i] == 2 { 0.0 } else { local_factor(primes[i]) });
    let value = std::f64::consts::PI * log.exp();
    let tail = 1.0 / plimit.max(2) as f64;
    Ok(SingularProduct {
        plimit,
        value,
        tail_bound: value * tail.exp_m1(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Chi4PhiSum {
    pub dcut: f64,
    pub sum: f64,
    pub limit: f64,
    pub gap: f64,
}

/// `sum_{d <= Dcut} chi_4(d) / phi(d)` against its limit `(pi/4) prod_p (...)`.
pub fn chi4_phi_sum(dcut: f64, table: &PrimeTable) -> Result<Chi4PhiSum> {
    let n = check_x(dcut, table)?;
    // Odd d only; even d have chi_4 = 0.
    let odd = n.div_ceil(2) as usize;
    let sum: f64 = par::sum_by(odd, |i| {
        let d = 2 * i as u64 + 1;
        chi4(d) as f64 / table.euler_phi(d).unwrap_or(1) as f64
    });
    let limit = singular_product(table.limit(), table)?.value / 4.0;
    Ok(Chi4PhiSum {
        dcut,
        sum,
        limit,
        gap: (sum - limit).abs(),
    })
}

/// Open divisor window `(lo, hi)` around `sqrt X`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HooleyRange {
    pub x: f64,
    pub omega: f64,
    pub lo: f64,
    pub hi: f64,
}

impl HooleyRange {
    /// `(sqrt X (ln X)^-omega, sqrt X (ln X)^omega)`.
    pub fn new(x: f64, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(StatsError::Omega(omega));
        }
        if !(x.is_finite() && x >= 1.0) {
            return Err(StatsError::Range { x, limit: 0 });
        }
        let (r, l) = (x.sqrt(), x.ln());
        Ok(Self {
            x,
            omega,
            lo: r * l.powf(-omega),
            hi: r * l.powf(omega),
        })
    }

    /// A window with explicit ends; `lo = 0, hi > X` admits every divisor.
    pub fn with_bounds(x: f64, lo: f64, hi: f64) -> Self {
        Self { x, omega: f64::NAN, lo, hi }
    }

    /// Every divisor of `p - 1` for `p <= X`.
    pub fn full(x: f64) -> Self {
        Self::with_bounds(x, 0.0, x + 1.0)
    }

    /// Whether no integer lies strictly inside.
    pub fn is_empty(&self) -> bool {
        !(self.lo.floor() + 1.0 < self.hi)
    }

    pub fn contains(&self, d: u64) -> bool {
        let d = d as f64;
        self.lo < d && d < self.hi
    }
}

/// Per-prime `sum_{d | p - 1, d in range} chi_4(d)`.
fn window_sum(p: u64, range: &HooleyRange, table: &PrimeTable) -> i64 {
    if p < 3 {
        return if range.contains(1) { 1 } else { 0 };
    }
    let f = table.factorize(p - 1).expect("p - 1 within table");
    f.divisors()
        .into_iter()
        .filter(|&d| range.contains(d))
        .map(|d| chi4(d) as i64)
        .sum()
}

/// `sum_{p <= X} |sum_{d | p-1, lo < d < hi} chi_4(d)|^2`.
pub fn hooley_variance(range: &HooleyRange, table: &PrimeTable) -> Result<u64> {
    let xi = check_x(range.x, table)?;
    if range.is_empty() {
        return Ok(0);
    }
    let primes = &table.primes()[..table.pi(xi)];
    Ok(par::sum_by(primes.len(), |i| {
        let s = window_sum(primes[i], range, table);
        (s * s) as u64
    }))
}

/// Primes `p <= X` with some divisor of `p - 1` in `(lo, hi)`.
pub fn hooley_count(range: &HooleyRange, table: &PrimeTable) -> Result<u64> {
    let xi = check_x(range.x, table)?;
    if range.is_empty() {
        return Ok(0);
    }
    let primes = &table.primes()[..table.pi(xi)];
    Ok(par::sum_by(primes.len(), |i| {
        let p = primes[i];
        let hit = if p < 3 {
            range.contains(1)
        } else {
            table
                .factorize(p - 1)
                .expect("p - 1 within table")
                .divisors()
                .into_iter()
                .any(|d| range.contains(d))
        };
        hit as u64
    }))
}

/// `X (ln ln X)^7 / ln X`.
pub fn variance_scale(x: f64) -> f64 {
    x * x.ln().ln().powi(7) / x.ln()
}

/// `X (ln ln X)^3 / (ln X)^{1 + 2 theta_0}`.
pub fn count_scale(x: f64) -> f64 {
    x * x.ln().ln().powi(3) / x.ln().powf(1.0 + 2.0 * theta0_value())
}

#[derive(Clone, Debug, Serialize)]
pub struct HooleyReport {
    pub range: HooleyRange,
    pub variance: u64,
    pub variance_ratio: f64,
    pub count: u64,
    pub count_ratio: f64,
}

pub fn hooley_report(range: &HooleyRange, table: &PrimeTable) -> Result<HooleyReport> {
    let variance = hooley_variance(range, table)?;
    let count = hooley_count(range, table)?;
    Ok(HooleyReport {
        range: *range,
        variance,
        variance_ratio: variance as f64 / variance_scale(range.x),
        count,
        count_ratio: count as f64 / count_scale(range.x),
    })
}
