//! Integer arithmetic: a segmented prime sieve with a smallest-prime-factor
//! index, factorization, the multiplicative functions used throughout the
//! crate, and sums of two squares.

pub mod cache;

use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::par;

/// Largest sieve limit accepted.
pub const MAX_LIMIT: u64 = 1 << 32;

/// Above this limit the smallest-prime-factor index is never built.
pub const SPF_MAX_LIMIT: u64 = 1 << 31;

#[derive(Debug, Error)]
pub enum ArithError {
    #[error("sieve limit {0} is below 2")]
    LimitTooSmall(u64),
    #[error("sieve limit {0} exceeds the maximum 2^32")]
    LimitTooLarge(u64),
    #[error("sieve limit {limit} needs about {needed} bytes, over the {budget}-byte memory budget")]
    OverBudget { limit: u64, needed: u64, budget: u64 },
    #[error("{n} is outside the table range 1..={limit}")]
    OutOfRange { n: u64, limit: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ArithError>;

#[derive(Clone, Copy, Debug)]
pub struct SieveConfig {
    /// Integers per sieve segment.
    pub segment_len: usize,
    /// Upper bound on the bytes the table may occupy.
    pub memory_budget: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            segment_len: 1 << 20,
            memory_budget: 4 << 30,
        }
    }
}

/// Primes up to `limit` with their logarithms and, when it fits, a
/// smallest-prime-factor index covering `2..=limit`.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
    logp: Vec<f64>,
    spf: Option<Vec<u32>>,
}

/// Prime factorization as ascending `(prime, exponent)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub n: u64,
    pub pairs: Vec<(u64, u32)>,
}

fn estimated_prime_count(limit: u64) -> u64 {
    if limit < 20 {
        return 8;
    }
    let x = limit as f64;
    (1.26 * x / x.ln()) as u64
}

fn primes_bytes(limit: u64) -> u64 {
    estimated_prime_count(limit) * 16
}

fn spf_bytes(limit: u64) -> u64 {
    4 * (limit + 1)
}

fn small_sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn first_multiple_at_least(p: u64, lo: u64) -> u64 {
    (p * p).max(lo.div_ceil(p) * p)
}

impl PrimeTable {
    /// Sieve with the default configuration.
    pub fn sieve(limit: u64) -> Result<Self> {
        Self::sieve_with(limit, &SieveConfig::default())
    }

    pub fn sieve_with(limit: u64, config: &SieveConfig) -> Result<Self> {
        check_limit(limit, config)?;
        let base = small_sieve(limit.isqrt());
        Ok(Self::from_base(limit, &base, config))
    }

    /// Rebuild a table from an already known prime list (e.g. a cache file).
    pub fn from_primes(limit: u64, primes: Vec<u64>, config: &SieveConfig) -> Result<Self> {
        check_limit(limit, config)?;
        if primes.windows(2).any(|w| w[0] >= w[1]) || primes.last().is_some_and(|&p| p > limit)
        {
            return Err(ArithError::Cache("prime list is not ascending within the limit".into()));
        }
        let spf = if wants_spf(limit, config) {
            let root = limit.isqrt();
            let cut = primes.partition_point(|&p| p <= root);
            Some(spf_segments(limit, &primes[..cut], config.segment_len).0)
        } else {
            None
        };
        let logp = primes.iter().map(|&p| (p as f64).ln()).collect();
        Ok(Self {
            limit,
            primes,
            logp,
            spf,
        })
    }

    fn from_base(limit: u64, base: &[u64], config: &SieveConfig) -> Self {
        let seg = config.segment_len.max(64);
        let (spf, primes) = if wants_spf(limit, config) {
            let (spf, primes) = spf_segments(limit, base, seg);
            (Some(spf), primes)
        } else {
            (None, bool_segments(limit, base, seg))
        };
        let logp = primes.iter().map(|&p| (p as f64).ln()).collect();
        Self {
            limit,
            primes,
            logp,
            spf,
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn logp(&self) -> &[f64] {
        &self.logp
    }

    pub fn has_spf(&self) -> bool {
        self.spf.is_some()
    }

    /// Smallest prime factor of `n`, for `2 <= n <= limit`.
    pub fn spf(&self, n: u64) -> Result<u64> {
        self.check(n)?;
        if n < 2 {
            return Err(ArithError::OutOfRange { n, limit: self.limit });
        }
        Ok(match &self.spf {
            Some(spf) => spf[n as usize] as u64,
            None => self.trial_spf(n),
        })
    }

    fn trial_spf(&self, n: u64) -> u64 {
        for &p in &self.primes {
            if p * p > n {
                break;
            }
            if n % p == 0 {
                return p;
            }
        }
        n
    }

    fn check(&self, n: u64) -> Result<()> {
        if n == 0 || n > self.limit {
            Err(ArithError::OutOfRange { n, limit: self.limit })
        } else {
            Ok(())
        }
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        self.check(n)?;
        Ok(match &self.spf {
            Some(spf) => n >= 2 && spf[n as usize] as u64 == n,
            None => self.primes.binary_search(&n).is_ok(),
        })
    }

    /// Index range of the primes `p` with `lo < p <= hi`.
    pub fn index_range(&self, lo: f64, hi: f64) -> Range<usize> {
        let a = self.primes.partition_point(|&p| p as f64 <= lo);
        let b = self.primes.partition_point(|&p| p as f64 <= hi);
        a..b.max(a)
    }

    /// Number of primes not exceeding `x`.
    pub fn pi(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }

    /// Factor `n` (1 <= n <= limit).
    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        self.check(n)?;
        Ok(self.factorize_unchecked(n))
    }

    /// Factor any `n <= limit^2` by trial division over the table.
    pub fn factorize_unbounded(&self, n: u64) -> Result<Factorization> {
        if n == 0 || (n as u128) > (self.limit as u128).pow(2) {
            return Err(ArithError::OutOfRange {
                n,
                limit: self.limit.saturating_mul(self.limit),
            });
        }
        if n <= self.limit {
            return Ok(self.factorize_unchecked(n));
        }
        let mut pairs = Vec::new();
        let mut m = n;
        for &p in &self.primes {
            if p * p > m {
                break;
            }
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            if e > 0 {
                pairs.push((p, e));
            }
        }
        if m > 1 {
            pairs.push((m, 1));
        }
        Ok(Factorization { n, pairs })
    }

    fn factorize_unchecked(&self, n: u64) -> Factorization {
        let mut pairs: Vec<(u64, u32)> = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = match &self.spf {
                Some(spf) => spf[m as usize] as u64,
                None => self.trial_spf(m),
            };
            m /= p;
            match pairs.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => pairs.push((p, 1)),
            }
        }
        Factorization { n, pairs }
    }

    pub fn euler_phi(&self, n: u64) -> Result<u64> {
        Ok(self.factorize(n)?.euler_phi())
    }

    pub fn von_mangoldt(&self, n: u64) -> Result<f64> {
        let f = self.factorize(n)?;
        Ok(match f.pairs.as_slice() {
            [(p, _)] => (*p as f64).ln(),
            _ => 0.0,
        })
    }

    /// Ordered signed representations `k = x^2 + y^2`.
    pub fn r2(&self, k: u64) -> Result<u64> {
        let f = self.factorize(k)?;
        let by_formula = f.r2();
        debug_assert_eq!(by_formula, f.r2_divisor_sum());
        Ok(by_formula)
    }

    /// `r2` through `4 * sum_{d | k} chi4(d)`, enumerating divisors.
    pub fn r2_divisor_sum(&self, k: u64) -> Result<u64> {
        Ok(self.factorize(k)?.r2_divisor_sum())
    }

    /// Whether the prime `p` is of the form `x^2 + y^2 + 1`.
    pub fn is_linnik(&self, p: u64) -> Result<bool> {
        if !self.is_prime(p)? {
            return Err(ArithError::NotPrime(p));
        }
        Ok(self.factorize_unchecked(p - 1).r2() > 0)
    }
}

fn check_limit(limit: u64, config: &SieveConfig) -> Result<()> {
    if limit < 2 {
        return Err(ArithError::LimitTooSmall(limit));
    }
    if limit > MAX_LIMIT {
        return Err(ArithError::LimitTooLarge(limit));
    }
    let needed = primes_bytes(limit);
    if needed > config.memory_budget {
        return Err(ArithError::OverBudget {
            limit,
            needed,
            budget: config.memory_budget,
        });
    }
    Ok(())
}

fn wants_spf(limit: u64, config: &SieveConfig) -> bool {
    limit <= SPF_MAX_LIMIT && primes_bytes(limit) + spf_bytes(limit) <= config.memory_budget
}

/// Fill the smallest-prime-factor array segment by segment; the unmarked
/// entries of each segment are its primes.
fn spf_segments(limit: u64, base: &[u64], seg: usize) -> (Vec<u32>, Vec<u64>) {
    let mut spf = vec![0u32; limit as usize + 1];
    let per_segment: Vec<Vec<u64>> = par::map_chunks_mut(&mut spf, seg, |i, chunk| {
        let lo = (i * seg) as u64;
        let hi = lo + chunk.len() as u64;
        for &p in base {
            let mut m = first_multiple_at_least(p, lo);
            while m < hi {
                let slot = &mut chunk[(m - lo) as usize];
                if *slot == 0 {
                    *slot = p as u32;
                }
                m += p;
            }
        }
        let mut found = Vec::new();
        for (off, slot) in chunk.iter_mut().enumerate() {
            let n = lo + off as u64;
            if n >= 2 && *slot == 0 {
                *slot = n as u32;
                found.push(n);
            }
        }
        found
    });
    (spf, per_segment.concat())
}

fn bool_segments(limit: u64, base: &[u64], seg: usize) -> Vec<u64> {
    let n_segments = (limit as usize + 1).div_ceil(seg);
    let per_segment = par::map_collect(n_segments, |i| {
        let lo = (i * seg) as u64;
        let hi = (lo + seg as u64).min(limit + 1);
        let mut composite = vec![false; (hi - lo) as usize];
        for &p in base {
            let mut m = first_multiple_at_least(p, lo);
            while m < hi {
                composite[(m - lo) as usize] = true;
                m += p;
            }
        }
        composite
            .iter()
            .enumerate()
            .filter_map(|(off, &c)| {
                let n = lo + off as u64;
                (n >= 2 && !c).then_some(n)
            })
            .collect::<Vec<_>>()
    });
    per_segment.concat()
}

impl Factorization {
    pub fn euler_phi(&self) -> u64 {
        self.pairs
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    /// All divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.pairs {
            let len = out.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// `r(n)` from the prime-power criterion: zero if a prime `3 mod 4`
    /// divides `n` to an odd power, else `4 * prod (e + 1)` over primes `1 mod 4`.
    pub fn r2(&self) -> u64 {
        let mut r = 4;
        for &(p, e) in &self.pairs {
            match p % 4 {
                1 => r *= e as u64 + 1,
                3 if e % 2 == 1 => return 0,
                _ => {}
            }
        }
        r
    }

    /// `r(n) = 4 * sum_{d | n} chi4(d)`.
    pub fn r2_divisor_sum(&self) -> u64 {
        let s: i64 = self.divisors().into_iter().map(|d| chi4(d) as i64).sum();
        debug_assert!(s >= 0);
        4 * s as u64
    }
}

/// The non-principal character modulo 4.
pub fn chi4(n: u64) -> i32 {
    match n % 4 {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

/// A representation `p - 1 = x^2 + y^2` with `0 <= x <= y`, if one exists.
pub fn two_squares(n: u64) -> Option<(u64, u64)> {
    let mut x = 0u64;
    while 2 * x * x <= n {
        let rest = n - x * x;
        let y = rest.isqrt();
        if y * y == rest {
            return Some((x, y));
        }
        x += 1;
    }
    None
}
