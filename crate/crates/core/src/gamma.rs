//! Counting prime quadruples with `|p1^c + p2^c + p3^c + p4^c - N| < eps`.
//!
//! All counts run over a sorted table of pair sums `q^c + r^c`: for each
//! `(p1, p2)` the complementary window is located by binary search and its
//! weight read from prefix sums, so a full scan costs `O(P^2 log P)`.

use std::cell::Cell;
use std::ops::Range;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;
use twofloat::TwoFloat;

use crate::arith::{chi4, two_squares, ArithError, PrimeTable};
use crate::expsum::power;
use crate::par;
use crate::quad::{self, Tolerance};
use crate::smoothing::{KernelError, SmoothingKernel};

#[derive(Debug, Error)]
pub enum GammaError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("divisor ranges not ordered: need 1 < D < X/D (D = {d}, X = {x})")]
    DivisorRange { d: f64, x: f64 },
    #[error("window below precision floor: epsilon {epsilon:e} < {floor:e}")]
    PrecisionFloor { epsilon: f64, floor: f64 },
    #[error("prime range up to {needed} exceeds the table limit {limit}")]
    TableTooSmall { needed: f64, limit: u64 },
    #[error("pair table for {primes} primes needs {bytes} bytes, over the budget {budget}")]
    PairBudget { primes: usize, bytes: u64, budget: u64 },
    #[error("no primes in the search range")]
    NoPrimes,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("{0}")]
    Quadrature(#[from] quad::NoConvergence),
}

pub type Result<T> = std::result::Result<T, GammaError>;

/// Relative spacing of doubles used by the window guard.
const PRECISION: f64 = 1e-16;
const GUARD_FACTOR: f64 = 1e3;

pub fn precision_floor(n: f64) -> f64 {
    GUARD_FACTOR * n.abs() * PRECISION
}

pub fn check_window(epsilon: f64, n: f64) -> Result<()> {
    let floor = precision_floor(n);
    if !(epsilon >= floor) {
        return Err(GammaError::PrecisionFloor { epsilon, floor });
    }
    Ok(())
}

/// `sqrt(X) / ln^A X`.
pub fn default_d(x: f64, a: f64) -> f64 {
    x.sqrt() / x.ln().powf(a)
}

/// `(ln ln X)^6 / (ln X)^theta0`.
pub fn default_epsilon(x: f64) -> f64 {
    x.ln().ln().powi(6) / x.ln().powf(crate::bounds::theta0_value())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunParams {
    n: f64,
    c: f64,
    epsilon: f64,
    x: f64,
    a: f64,
    d: f64,
    delta: f64,
    h: f64,
    kernel: SmoothingKernel,
}

impl RunParams {
    /// Parameters for target `N`. `d = None` uses `sqrt(X) / ln^A X`.
    pub fn new(n: f64, c: f64, epsilon: f64, a: f64, d: Option<f64>) -> Result<Self> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(GammaError::Parameter(format!("c = {c} must exceed 1")));
        }
        if !(n > 0.0) || !n.is_finite() {
            return Err(GammaError::Parameter(format!("N = {n} must be positive")));
        }
        if !(epsilon > 0.0) {
            return Err(GammaError::Parameter(format!("epsilon = {epsilon} must be positive")));
        }
        if !(a > 0.0) {
            return Err(GammaError::Parameter(format!("A = {a} must be positive")));
        }
        let x = (n / 3.0).powf(1.0 / c);
        if x < 3.0 {
            return Err(GammaError::Parameter(format!("X = {x} must be at least 3")));
        }
        let d = d.unwrap_or_else(|| default_d(x, a));
        if !(d > 1.0 && d < x / d) {
            return Err(GammaError::DivisorRange { d, x });
        }
        let kernel = SmoothingKernel::for_run(epsilon, x)?;
        Ok(Self {
            n,
            c,
            epsilon,
            x,
            a,
            d,
            delta: x.powf(0.25 - c),
            h: x.ln().powi(2) / epsilon,
            kernel,
        })
    }

    /// Parameters with `N = 3 X^c`.
    pub fn from_x(x: f64, c: f64, epsilon: f64, a: f64, d: Option<f64>) -> Result<Self> {
        Self::new(3.0 * x.powf(c), c, epsilon, a, d)
    }

    pub fn n(&self) -> f64 {
        self.n
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn kernel(&self) -> &SmoothingKernel {
        &self.kernel
    }
}

/// Memory caps for pair tables.
#[derive(Clone, Copy, Debug)]
pub struct PairBudget {
    pub max_primes: usize,
    pub max_bytes: u64,
}

impl Default for PairBudget {
    fn default() -> Self {
        Self {
            max_primes: 200_000,
            max_bytes: 2 << 30,
        }
    }
}

const BYTES_PER_PAIR: u64 = 24;

/// All ordered pairs `(q, r)` of a prime list, sorted by `q^c + r^c`, ties by
/// index, with prefix sums of `ln q ln r`.
#[derive(Clone, Debug)]
pub struct PairSumTable {
    primes: Vec<u64>,
    logs: Vec<f64>,
    powc: Vec<f64>,
    sums: Vec<f64>,
    index: Vec<(u32, u32)>,
    prefix: Vec<f64>,
}

impl PairSumTable {
    pub fn over(primes: &[u64], logs: &[f64], c: f64, budget: &PairBudget) -> Result<Self> {
        let m = primes.len();
        let bytes = (m as u64).pow(2) * BYTES_PER_PAIR;
        if m > budget.max_primes || bytes > budget.max_bytes {
            return Err(GammaError::PairBudget {
                primes: m,
                bytes,
                budget: budget.max_bytes,
            });
        }
        let powc: Vec<f64> = primes.iter().map(|&p| power(p, c)).collect();
        let mut entries: Vec<(f64, u32, u32)> = par::map_collect(m, |i| {
            (0..m)
                .map(|j| (powc[i] + powc[j], i as u32, j as u32))
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect();
        par::sort_by(&mut entries, |a, b| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
        });
        let mut prefix = Vec::with_capacity(entries.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &(_, i, j) in &entries {
            acc += logs[i as usize] * logs[j as usize];
            prefix.push(acc);
        }
        let sums = entries.iter().map(|e| e.0).collect();
        let index = entries.iter().map(|e| (e.1, e.2)).collect();
        Ok(Self {
            primes: primes.to_vec(),
            logs: logs.to_vec(),
            powc,
            sums,
            index,
            prefix,
        })
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn logs(&self) -> &[f64] {
        &self.logs
    }

    /// `p^c` for each prime of the table.
    pub fn powers(&self) -> &[f64] {
        &self.powc
    }

    /// Pair sums, ascending.
    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    /// `prefix[i]` is the total weight of the first `i` entries.
    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    /// The primes `(q, r)` of entry `i`.
    pub fn pair(&self, i: usize) -> (u64, u64) {
        let (a, b) = self.index[i];
        (self.primes[a as usize], self.primes[b as usize])
    }

    /// Weight `ln q ln r` of entry `i`.
    pub fn weight_of(&self, i: usize) -> f64 {
        let (a, b) = self.index[i];
        self.logs[a as usize] * self.logs[b as usize]
    }

    /// Entries with `lo < s < hi`.
    pub fn open_window(&self, lo: f64, hi: f64) -> Range<usize> {
        let a = self.sums.partition_point(|&s| s <= lo);
        let b = self.sums.partition_point(|&s| s < hi);
        a..b.max(a)
    }

    /// Entries with `lo <= s <= hi`.
    pub fn closed_window(&self, lo: f64, hi: f64) -> Range<usize> {
        let a = self.sums.partition_point(|&s| s < lo);
        let b = self.sums.partition_point(|&s| s <= hi);
        a..b.max(a)
    }

    pub fn weight(&self, r: Range<usize>) -> f64 {
        self.prefix[r.end] - self.prefix[r.start]
    }

    /// `sum theta(s - target) w` over entries within the kernel support.
    pub fn smoothed_weight(&self, target: f64, kernel: &SmoothingKernel) -> f64 {
        let (pl, sup) = (kernel.plateau(), kernel.support());
        let flat = self.closed_window(target - pl, target + pl);
        let outer = self.open_window(target - sup, target + sup);
        let mut acc = self.weight(flat.clone());
        for i in (outer.start..flat.start).chain(flat.end..outer.end) {
            acc += kernel.theta(self.sums[i] - target) * self.weight_of(i);
        }
        acc
    }
}

/// Pair table over the primes in `(X/2, X]`.
pub fn build_pair_table(x: f64, c: f64, table: &PrimeTable, budget: &PairBudget) -> Result<PairSumTable> {
    let range = prime_range(x / 2.0, x, table)?;
    PairSumTable::over(&table.primes()[range.clone()], &table.logp()[range], c, budget)
}

fn prime_range(lo: f64, hi: f64, table: &PrimeTable) -> Result<Range<usize>> {
    if hi > table.limit() as f64 {
        return Err(GammaError::TableTooSmall {
            needed: hi,
            limit: table.limit(),
        });
    }
    Ok(table.index_range(lo, hi))
}

/// `gamma0 = 4 (g1 + g2 + g3)`, the factor coming from `r(m) = 4 sum chi_4(d)`.
#[derive(Clone, Debug, Serialize)]
pub struct GammaReport {
    pub gamma_raw: f64,
    /// Quadruples in the window whose `p1` is a shifted sum of two squares.
    pub raw_count: u64,
    pub gamma0: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub params: RunParams,
}

/// Window sums for one `p1`, over all `p2`.
#[derive(Clone, Copy, Default)]
struct Inner {
    raw: f64,
    count: u64,
    smooth: f64,
}

fn inner_sums(pt: &PairSumTable, p1c: f64, n: f64, epsilon: f64, kernel: Option<&SmoothingKernel>) -> Inner {
    let mut out = Inner::default();
    for (j, &p2c) in pt.powers().iter().enumerate() {
        let target = n - p1c - p2c;
        let lp2 = pt.logs()[j];
        let r = pt.open_window(target - epsilon, target + epsilon);
        out.count += r.len() as u64;
        out.raw += lp2 * pt.weight(r);
        if let Some(k) = kernel {
            out.smooth += lp2 * pt.smoothed_weight(target, k);
        }
    }
    out
}

/// `(sum_{d <= D}, sum_{D < d < X/D}, sum_{d >= X/D})` of `chi_4(d)` over `d | m`.
pub fn divisor_range_weights(m: u64, d_cut: f64, x: f64, table: &PrimeTable) -> Result<[i64; 3]> {
    let mut w = [0i64; 3];
    for d in table.factorize(m)?.divisors() {
        let df = d as f64;
        let slot = if df <= d_cut {
            0
        } else if df < x / d_cut {
            1
        } else {
            2
        };
        w[slot] += chi4(d) as i64;
    }
    Ok(w)
}

fn setup(params: &RunParams, table: &PrimeTable, budget: &PairBudget) -> Result<PairSumTable> {
    check_window(params.epsilon(), params.n())?;
    build_pair_table(params.x(), params.c(), table, budget)
}

/// `Gamma(X)` and the number of quadruples it counts.
pub fn gamma_raw(params: &RunParams, table: &PrimeTable) -> Result<(f64, u64)> {
    gamma_raw_with(params, table, &PairBudget::default())
}

pub fn gamma_raw_with(params: &RunParams, table: &PrimeTable, budget: &PairBudget) -> Result<(f64, u64)> {
    let pt = setup(params, table, budget)?;
    let rows: Vec<Result<(f64, u64)>> = par::map_collect(pt.primes().len(), |i| {
        let p1 = pt.primes()[i];
        let r = table.r2(p1 - 1)?;
        if r == 0 {
            return Ok((0.0, 0));
        }
        let s = inner_sums(&pt, pt.powers()[i], params.n(), params.epsilon(), None);
        Ok((r as f64 * pt.logs()[i] * s.raw, s.count))
    });
    let mut total = (0.0, 0);
    for row in rows {
        let (w, n) = row?;
        total.0 += w;
        total.1 += n;
    }
    Ok(total)
}

/// `Gamma_0(X)`, the count smoothed by the run kernel.
pub fn gamma0(params: &RunParams, table: &PrimeTable) -> Result<f64> {
    Ok(gamma_parts(params, table)?.gamma0)
}

/// `Gamma`, `Gamma_0` and the divisor-range split of `Gamma_0` in one scan.
pub fn gamma_parts(params: &RunParams, table: &PrimeTable) -> Result<GammaReport> {
    gamma_parts_with(params, table, &PairBudget::default())
}

pub fn gamma_parts_with(params: &RunParams, table: &PrimeTable, budget: &PairBudget) -> Result<GammaReport> {
    let pt = setup(params, table, budget)?;
    let rows: Vec<Result<(u64, [i64; 3], Inner)>> = par::map_collect(pt.primes().len(), |i| {
        let p1 = pt.primes()[i];
        let w = divisor_range_weights(p1 - 1, params.d(), params.x(), table)?;
        let r = 4 * (w[0] + w[1] + w[2]) as u64;
        let s = inner_sums(&pt, pt.powers()[i], params.n(), params.epsilon(), Some(params.kernel()));
        Ok((r, w, s))
    });
    let mut rep = GammaReport {
        gamma_raw: 0.0,
        raw_count: 0,
        gamma0: 0.0,
        g1: 0.0,
        g2: 0.0,
        g3: 0.0,
        params: params.clone(),
    };
    for (i, row) in rows.into_iter().enumerate() {
        let (r, w, s) = row?;
        let lp1 = pt.logs()[i];
        rep.gamma_raw += r as f64 * lp1 * s.raw;
        if r > 0 {
            rep.raw_count += s.count;
        }
        rep.gamma0 += r as f64 * lp1 * s.smooth;
        rep.g1 += w[0] as f64 * lp1 * s.smooth;
        rep.g2 += w[1] as f64 * lp1 * s.smooth;
        rep.g3 += w[2] as f64 * lp1 * s.smooth;
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchRange {
    /// All four primes in `(X/2, X]` with `X = (N/3)^{1/c}`.
    Theorem,
    /// All four primes in `[2, (N + eps)^{1/c}]`, clipped to the table.
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    pub primes: [u64; 4],
    /// `(x, y)` with `p1 = x^2 + y^2 + 1`.
    pub witness: (u64, u64),
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found {
        solution: Solution,
        lo: f64,
        hi: f64,
    },
    /// Exhaustive over the primes in `(lo, hi]`.
    NotFound { lo: f64, hi: f64 },
}

impl SearchOutcome {
    pub fn solution(&self) -> Option<&Solution> {
        match self {
            SearchOutcome::Found { solution, .. } => Some(solution),
            SearchOutcome::NotFound { .. } => None,
        }
    }
}

fn residual(primes: [u64; 4], c: f64, n: f64) -> f64 {
    (primes.iter().map(|&p| power(p, c)).sum::<f64>() - n).abs()
}

/// First solution in ascending `(p1, p2)` order, taking the closest `(p3, p4)`.
pub fn find_solution(n: f64, c: f64, epsilon: f64, range: SearchRange, table: &PrimeTable) -> Result<SearchOutcome> {
    find_solution_with(n, c, epsilon, range, table, &PairBudget::default())
}

pub fn find_solution_with(
    n: f64,
    c: f64,
    epsilon: f64,
    range: SearchRange,
    table: &PrimeTable,
    budget: &PairBudget,
) -> Result<SearchOutcome> {
    if !(c > 1.0) || !(n > 0.0) {
        return Err(GammaError::Parameter(format!("need c > 1 and N > 0 (c = {c}, N = {n})")));
    }
    check_window(epsilon, n)?;
    let (lo, hi) = match range {
        SearchRange::Theorem => {
            let x = (n / 3.0).powf(1.0 / c);
            if x > table.limit() as f64 {
                return Err(GammaError::TableTooSmall {
                    needed: x,
                    limit: table.limit(),
                });
            }
            (x / 2.0, x)
        }
        SearchRange::Full => (1.0, (n + epsilon).powf(1.0 / c).min(table.limit() as f64)),
    };
    let idx = table.index_range(lo, hi);
    if idx.is_empty() {
        return Err(GammaError::NoPrimes);
    }
    let pt = PairSumTable::over(&table.primes()[idx.clone()], &table.logp()[idx], c, budget)?;
    let hits: Vec<Option<Solution>> = par::map_collect(pt.primes().len(), |i| {
        let p1 = pt.primes()[i];
        let (x, y) = two_squares(p1 - 1)?;
        for (j, &p2c) in pt.powers().iter().enumerate() {
            let target = n - pt.powers()[i] - p2c;
            let r = pt.open_window(target - epsilon, target + epsilon);
            let best = r.min_by(|&a, &b| {
                (pt.sums()[a] - target)
                    .abs()
                    .total_cmp(&(pt.sums()[b] - target).abs())
            });
            if let Some(k) = best {
                let (p3, p4) = pt.pair(k);
                let primes = [p1, pt.primes()[j], p3, p4];
                let res = residual(primes, c, n);
                if res < epsilon {
                    return Some(Solution {
                        primes,
                        witness: (x, y),
                        residual: res,
                    });
                }
            }
        }
        None
    });
    Ok(match hits.into_iter().flatten().next() {
        Some(solution) => SearchOutcome::Found { solution, lo, hi },
        None => SearchOutcome::NotFound { lo, hi },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TernaryReport {
    /// Weighted count `B(X0)`.
    pub b: f64,
    pub count: u64,
    pub x0: f64,
    /// `B / (eps X0^{3-c})`.
    pub ratio: f64,
    /// `B / (eps N0^{3/c - 1} / ln^3 N0)`.
    pub ratio_log3: f64,
    /// `B / (eps N0^{3/c - 1} / ln^2 N0)`.
    pub ratio_log2: f64,
}

/// Prime triples in `(X0/2, X0]`, `X0 = (N0/2)^{1/c}`, with
/// `|p1^c + p2^c + p3^c - N0| < eps`.
pub fn ternary_count(n0: f64, c: f64, epsilon: f64, table: &PrimeTable) -> Result<TernaryReport> {
    ternary_count_with(n0, c, epsilon, table, &PairBudget::default())
}

pub fn ternary_count_with(
    n0: f64,
    c: f64,
    epsilon: f64,
    table: &PrimeTable,
    budget: &PairBudget,
) -> Result<TernaryReport> {
    if !(c > 1.0 && c < 3.0) || c == 2.0 {
        return Err(GammaError::Parameter(format!("c = {c} outside (1, 3) minus {{2}}")));
    }
    if !(n0 > 0.0) {
        return Err(GammaError::Parameter(format!("N0 = {n0} must be positive")));
    }
    check_window(epsilon, n0)?;
    let x0 = (n0 / 2.0).powf(1.0 / c);
    let pt = build_pair_table(x0, c, table, budget)?;
    let rows: Vec<(f64, u64)> = par::map_collect(pt.primes().len(), |i| {
        let target = n0 - pt.powers()[i];
        let r = pt.open_window(target - epsilon, target + epsilon);
        (pt.logs()[i] * pt.weight(r.clone()), r.len() as u64)
    });
    let (b, count) = rows.iter().fold((0.0, 0), |acc, r| (acc.0 + r.0, acc.1 + r.1));
    let main = epsilon * n0.powf(3.0 / c - 1.0);
    let ln = n0.ln();
    Ok(TernaryReport {
        b,
        count,
        x0,
        ratio: b / (epsilon * x0.powf(3.0 - c)),
        ratio_log3: b / (main / ln.powi(3)),
        ratio_log2: b / (main / ln.powi(2)),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiReport {
    pub value: f64,
    pub error: f64,
    /// `value / (eps X^{4-c})`.
    pub ratio: f64,
}

/// The smoothed volume `(1/phi(d)) int theta(y1^c + y2^c + y3^c + y4^c - N) dy`
/// over `y1, y2, y3 in (X/2, X]` and `y4 in J` (default `(X/2, X]`).
///
/// After `u = y^c` each coordinate has density `u^{1/c - 1}/c`; the volume is
/// the kernel integrated against the four-fold convolution of those
/// densities, computed by nested adaptive quadrature.
pub fn phi_integral(params: &RunParams, d: u64, j: Option<(f64, f64)>, table: &PrimeTable) -> Result<PhiReport> {
    if d == 0 {
        return Err(GammaError::Parameter("d must be positive".into()));
    }
    let (x, c, n) = (params.x(), params.c(), params.n());
    let (jlo, jhi) = j.unwrap_or((x / 2.0, x));
    if !(jlo > 0.0 && jlo < jhi) {
        return Err(GammaError::Parameter(format!("invalid interval ({jlo}, {jhi}]")));
    }
    let phi = table.factorize_unbounded(d)?.euler_phi() as f64;
    let kernel = params.kernel();
    let (l, u) = ((x / 2.0).powf(c), x.powf(c));
    let (lj, uj) = (jlo.powf(c), jhi.powf(c));
    let sup = kernel.support();
    if n - sup >= 3.0 * u + uj || n + sup <= 3.0 * l + lj {
        return Ok(PhiReport {
            value: 0.0,
            error: 0.0,
            ratio: 0.0,
        });
    }

    let failed = Cell::new(0.0f64);
    let integrate = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, cuts: &[f64], rel: f64| -> f64 {
        let tol = Tolerance {
            abs: 0.0,
            rel,
            max_intervals: 4000,
        };
        match quad::adaptive(f, a, b, cuts, tol) {
            Ok(est) => est.value,
            Err(e) => {
                failed.set(failed.get().max(e.error / e.value.abs().max(f64::MIN_POSITIVE)));
                e.value
            }
        }
    };
    let density = |v: f64| v.powf(1.0 / c - 1.0) / c;
    // Convolution of the densities on [l1, u1] and [l2, u2].
    let pair = |w: f64, l1: f64, u1: f64, l2: f64, u2: f64| -> f64 {
        let a = l1.max(w - u2);
        let b = u1.min(w - l2);
        if b <= a {
            return 0.0;
        }
        integrate(&|s| density(s) * density(w - s), a, b, &[], 1e-11)
    };
    let quad4 = |v: f64| -> f64 {
        let a = (2.0 * l).max(v - (u + uj));
        let b = (2.0 * u).min(v - (l + lj));
        if b <= a {
            return 0.0;
        }
        let cuts = [l + u, v - (l + uj), v - (u + lj)];
        integrate(
            &|w| pair(w, l, u, l, u) * pair(v - w, l, u, lj, uj),
            a,
            b,
            &cuts,
            1e-10,
        )
    };
    let mut cuts = Vec::new();
    for m in 0..16u32 {
        let pick = |bit: u32, lo: f64, hi: f64| if m & (1 << bit) == 0 { lo } else { hi };
        cuts.push(pick(0, l, u) + pick(1, l, u) + pick(2, l, u) + pick(3, lj, uj) - n);
    }
    let band = 2.0 * kernel.delta() / kernel.k() as f64;
    for m in 0..=kernel.k() {
        let knot = kernel.plateau() + band * m as f64;
        cuts.push(knot);
        cuts.push(-knot);
    }
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-8,
        max_intervals: 4000,
    };
    let est = quad::adaptive(|y| kernel.theta(y) * quad4(n + y), -sup, sup, &cuts, tol)?;
    if failed.get() > 1e-6 {
        return Err(GammaError::Quadrature(quad::NoConvergence {
            value: est.value / phi,
            error: failed.get() * est.value.abs() / phi,
        }));
    }
    let value = est.value / phi;
    Ok(PhiReport {
        value,
        error: est.error / phi,
        ratio: value / (params.epsilon() * x.powf(4.0 - c)),
    })
}

/// Complex double-double, enough to keep the cancelling terms below exact.
#[derive(Clone, Copy)]
struct Dd {
    re: TwoFloat,
    im: TwoFloat,
}

impl Dd {
    fn from(z: Complex64) -> Self {
        Self {
            re: TwoFloat::from(z.re),
            im: TwoFloat::from(z.im),
        }
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(f64::from(self.re), f64::from(self.im))
    }

    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    fn sub(self, o: Self) -> Self {
        Self {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

/// Both sides of
/// `S1^3 S2 = I1^3 I2 + (S2 - I2) I1^3 + S2 (S1 - I1) I1^2 + S1 S2 (S1 - I1) I1 + S1^2 S2 (S1 - I1)`,
/// each evaluated in double-double and rounded once.
pub fn five_term_identity(s1: Complex64, s2: Complex64, i1: Complex64, i2: Complex64) -> (Complex64, Complex64) {
    let (s1, s2, i1, i2) = (Dd::from(s1), Dd::from(s2), Dd::from(i1), Dd::from(i2));
    let lhs = s1.mul(s1).mul(s1).mul(s2);
    let d = s1.sub(i1);
    let i1sq = i1.mul(i1);
    let rhs = i1sq
        .mul(i1)
        .mul(i2)
        .add(s2.sub(i2).mul(i1sq).mul(i1))
        .add(s2.mul(d).mul(i1sq))
        .add(s1.mul(s2).mul(d).mul(i1))
        .add(s1.mul(s1).mul(s2).mul(d));
    (lhs.to_complex(), rhs.to_complex())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table() -> PrimeTable {
        PrimeTable::sieve(2000).unwrap()
    }

    #[test]
    fn params_follow_definitions() {
        let p = RunParams::new(3.0 * 1000f64.powf(1.1), 1.1, 0.5, 1.0, None).unwrap();
        assert!((p.x() - 1000.0).abs() < 1e-9);
        assert!((p.delta() - 1000f64.powf(0.25 - 1.1)).abs() < 1e-15);
        assert!((p.h() - 1000f64.ln().powi(2) / 0.5).abs() < 1e-12);
        assert!((p.d() - 1000f64.sqrt() / 1000f64.ln()).abs() < 1e-12);
        assert_eq!(p.kernel().k(), 6);
        assert!(matches!(
            RunParams::from_x(1000.0, 1.1, 0.5, 1.0, Some(40.0)),
            Err(GammaError::DivisorRange { .. })
        ));
        assert!(RunParams::from_x(1000.0, 1.1, 0.5, 1.0, Some(1.0)).is_err());
    }

    #[test]
    fn default_epsilon_values() {
        let e = default_epsilon(1e5);
        let expect = 1e5f64.ln().ln().powi(6) / 1e5f64.ln().powf(0.028_957_653_6);
        assert!((e - expect).abs() < 1e-6 * expect);
    }

    #[test]
    fn pair_table_examples() {
        let t = table();
        let one = build_pair_table(10.0, 1.5, &t, &PairBudget::default()).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.pair(0), (7, 7));
        assert!((one.sums()[0] - 2.0 * 7f64.powf(1.5)).abs() < 1e-12);
        assert!((one.prefix()[1] - 7f64.ln().powi(2)).abs() < 1e-14);

        let four = build_pair_table(20.0, 1.3, &t, &PairBudget::default()).unwrap();
        assert_eq!(four.len(), 16);
        assert!(four.sums().windows(2).all(|w| w[0] <= w[1]));
        let total: f64 = [11f64, 13.0, 17.0, 19.0].iter().map(|p| p.ln()).sum();
        assert!((four.prefix()[16] - total * total).abs() < 1e-12);

        let tiny = PairBudget {
            max_primes: 3,
            max_bytes: 1 << 30,
        };
        assert!(matches!(
            build_pair_table(20.0, 1.3, &t, &tiny),
            Err(GammaError::PairBudget { .. })
        ));
    }

    #[test]
    fn constructed_instance_is_counted() {
        let t = table();
        let c = 1.05;
        let n = [53u64, 59, 61, 67].iter().map(|&p| power(p, c)).sum::<f64>();
        let p = RunParams::new(n, c, 1e-6, 1.0, None).unwrap();
        assert!(p.x() / 2.0 < 53.0 && p.x() >= 67.0);
        let (g, count) = gamma_raw(&p, &t).unwrap();
        assert!(count >= 1);
        let floor = t.r2(52).unwrap() as f64 * [53f64, 59.0, 61.0, 67.0].iter().map(|p| p.ln()).product::<f64>();
        assert!(g >= floor * (1.0 - 1e-12));
    }

    #[test]
    fn precision_guard() {
        let t = table();
        let n = 1e6;
        let p = RunParams::new(n, 1.1, 1e3 * n * 1e-17, 1.0, None).unwrap();
        assert!(matches!(gamma_raw(&p, &t), Err(GammaError::PrecisionFloor { .. })));
    }

    #[test]
    fn five_term_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut z = || Complex64::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        for _ in 0..1000 {
            let zs = [z(), z(), z(), z()];
            let (l, r) = five_term_identity(zs[0], zs[1], zs[2], zs[3]);
            // Terms of size |z|^4 cancel.
            let scale = zs.iter().map(|w| w.norm()).fold(1.0, f64::max).powi(4);
            assert!((l - r).norm() <= 1e-13 * scale);
        }
    }

    #[test]
    fn phi_vanishes_off_range_and_scales_with_phi() {
        let t = table();
        let p = RunParams::from_x(1000.0, 1.1, 2.0, 1.0, None).unwrap();
        let full = phi_integral(&p, 1, None, &t).unwrap();
        assert!(full.value > 0.0);
        let same = phi_integral(&p, 1, Some((500.0, 1000.0)), &t).unwrap();
        assert!((full.value - same.value).abs() <= 1e-14 * full.value);
        let third = phi_integral(&p, 7, None, &t).unwrap();
        assert!((third.value * 6.0 - full.value).abs() < 1e-12 * full.value);

        // Every sum exceeds N + eps when the last variable lives in (2X, 3X].
        let x = p.x();
        let off = phi_integral(&p, 1, Some((2.0 * x, 3.0 * x)), &t).unwrap();
        assert_eq!(off.value, 0.0);
    }

    #[test]
    fn phi_matches_monte_carlo_volume() {
        let t = table();
        // A wide window makes the volume easy to sample.
        let p = RunParams::from_x(20.0, 1.5, 30.0, 1.0, None).unwrap();
        let v = phi_integral(&p, 1, None, &t).unwrap().value;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let samples = 400_000;
        let (x, c, n) = (p.x(), p.c(), p.n());
        let mut acc = 0.0;
        for _ in 0..samples {
            let s: f64 = (0..4).map(|_| rng.random_range(x / 2.0..x).powf(c)).sum();
            acc += p.kernel().theta(s - n);
        }
        let mc = acc / samples as f64 * (x / 2.0).powi(4);
        assert!((v - mc).abs() < 0.02 * v, "{v} vs {mc}");
    }
}
