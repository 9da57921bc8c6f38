//! Brute-force oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use ps4::arith::chi4;
use ps4::gamma::RunParams;
use ps4::PrimeTable;

pub fn trial_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Primes in `(lo, hi]` by trial division.
pub fn primes_in(lo: f64, hi: f64) -> Vec<u64> {
    (2..=hi.floor() as u64).filter(|&p| p as f64 > lo && trial_prime(p)).collect()
}

/// `4 * #{d | m, d = 1 mod 4} - 4 * #{d | m, d = 3 mod 4}` by trial division.
pub fn r2_trial(m: u64) -> u64 {
    let s: i64 = (1..=m).filter(|d| m % d == 0).map(|d| chi4(d) as i64).sum();
    4 * s as u64
}

/// `r(k)` for `0 <= k <= limit` by counting lattice points.
pub fn lattice_r2(limit: u64) -> Vec<u64> {
    let mut r = vec![0u64; limit as usize + 1];
    let m = (limit as f64).sqrt() as i64 + 1;
    for x in -m..=m {
        for y in -m..=m {
            let k = (x * x + y * y) as u64;
            if k <= limit {
                r[k as usize] += 1;
            }
        }
    }
    r
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct BruteGamma {
    pub raw: f64,
    pub count: u64,
    pub gamma0: f64,
    pub g: [f64; 3],
}

/// Every ordered quadruple from `(X/2, X]`, classified directly.
pub fn brute_gamma(params: &RunParams) -> BruteGamma {
    let (x, c, n, eps) = (params.x(), params.c(), params.n(), params.epsilon());
    let ps = primes_in(x / 2.0, x);
    let pw: Vec<f64> = ps.iter().map(|&p| (p as f64).powf(c)).collect();
    let lg: Vec<f64> = ps.iter().map(|&p| (p as f64).ln()).collect();
    let kernel = params.kernel();
    let d_cut = params.d();
    let mut out = BruteGamma::default();
    for (i, &p1) in ps.iter().enumerate() {
        let m = p1 - 1;
        let mut w = [0i64; 3];
        for d in (1..=m).filter(|d| m % d == 0) {
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
        let r = 4 * (w[0] + w[1] + w[2]);
        assert_eq!(r as u64, r2_trial(m));
        for j in 0..ps.len() {
            for k in 0..ps.len() {
                for l in 0..ps.len() {
                    let s = pw[i] + pw[j] + pw[k] + pw[l] - n;
                    let logs = lg[i] * lg[j] * lg[k] * lg[l];
                    if s.abs() < eps && r > 0 {
                        out.raw += r as f64 * logs;
                        out.count += 1;
                    }
                    let th = kernel.theta(s);
                    if th != 0.0 {
                        out.gamma0 += r as f64 * logs * th;
                        for (g, wi) in out.g.iter_mut().zip(w) {
                            *g += wi as f64 * logs * th;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Weighted and plain counts of triples from `(X0/2, X0]`, `X0 = (N0/2)^{1/c}`.
pub fn brute_ternary(n0: f64, c: f64, eps: f64) -> (f64, u64) {
    let x0 = (n0 / 2.0).powf(1.0 / c);
    let ps = primes_in(x0 / 2.0, x0);
    let pw: Vec<f64> = ps.iter().map(|&p| (p as f64).powf(c)).collect();
    let lg: Vec<f64> = ps.iter().map(|&p| (p as f64).ln()).collect();
    let (mut b, mut count) = (0.0, 0);
    for i in 0..ps.len() {
        for j in 0..ps.len() {
            for k in 0..ps.len() {
                if (pw[i] + pw[j] + pw[k] - n0).abs() < eps {
                    b += lg[i] * lg[j] * lg[k];
                    count += 1;
                }
            }
        }
    }
    (b, count)
}

/// Whether any quadruple from `(lo, hi]` with Linnik `p1` lies in the window.
pub fn brute_solution_exists(n: f64, c: f64, eps: f64, lo: f64, hi: f64) -> bool {
    let ps = primes_in(lo, hi);
    let pw: Vec<f64> = ps.iter().map(|&p| (p as f64).powf(c)).collect();
    let linnik: Vec<bool> = ps.iter().map(|&p| r2_trial(p - 1) > 0).collect();
    (0..ps.len()).filter(|&i| linnik[i]).any(|i| {
        pw.iter().any(|&b| {
            pw.iter()
                .any(|&cc| pw.iter().any(|&d| (pw[i] + b + cc + d - n).abs() < eps))
        })
    })
}

pub fn table(limit: u64) -> PrimeTable {
    PrimeTable::sieve(limit).expect("sieve")
}
