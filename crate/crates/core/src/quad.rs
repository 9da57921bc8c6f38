//! Numerical integration: fixed-width Gauss-Legendre panels for oscillatory
//! integrands and an adaptive Gauss-Kronrod (7/15) integrator with
//! user-supplied breakpoints.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul};
use std::sync::OnceLock;

use thiserror::Error;

/// Nodes per Gauss-Legendre panel.
pub const GL_ORDER: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("quadrature did not converge: value {value}, estimated error {error}")]
pub struct NoConvergence {
    pub value: f64,
    pub error: f64,
}

struct GaussLegendre {
    nodes: [f64; GL_ORDER],
    weights: [f64; GL_ORDER],
}

fn gauss_legendre() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    })
}

/// One Gauss-Legendre panel on `[a, b]`.
pub fn gl_panel<T, F>(f: &F, a: f64, b: f64) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    let rule = gauss_legendre();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = T::default();
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc = acc + f(mid + half * x) * (w * half);
    }
    acc
}

/// Integrate over `[a, b]` with equal panels no wider than `max_width`.
pub fn gl_panels<T, F>(f: F, a: f64, b: f64, max_width: f64) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    if b <= a {
        return T::default();
    }
    let n = panel_count(b - a, max_width);
    let h = (b - a) / n as f64;
    let mut acc = T::default();
    for i in 0..n {
        let lo = a + h * i as f64;
        let hi = if i + 1 == n { b } else { lo + h };
        acc = acc + gl_panel(&f, lo, hi);
    }
    acc
}

pub fn panel_count(len: f64, max_width: f64) -> usize {
    if !(max_width > 0.0) || !max_width.is_finite() {
        return 1;
    }
    ((len / max_width).ceil() as usize).max(1)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Gauss-Kronrod 15-point estimate and its difference from the embedded
/// 7-point Gauss rule.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 0.0,
            rel: 1e-10,
            max_intervals: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integration of `f` over `[a, b]`, first splitting at every
/// breakpoint strictly inside the interval. Bisects the piece with the
/// largest error until `error <= max(abs, rel * |value|)`.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<Estimate, NoConvergence> {
    if b <= a {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = vec![a];
    edges.extend(cuts);
    edges.push(b);

    let mut heap = BinaryHeap::new();
    let (mut value, mut error) = (0.0, 0.0);
    for w in edges.windows(2) {
        let (v, e) = gk15(&f, w[0], w[1]);
        value += v;
        error += e;
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    while error > tol.abs.max(tol.rel * value.abs()) {
        if heap.len() >= tol.max_intervals {
            return Err(NoConvergence { value, error });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval no longer splittable in floating point.
            return Err(NoConvergence { value, error });
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Resum to shed the drift of the running totals.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(Estimate { value, error })
}
