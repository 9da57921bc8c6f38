//! The smoothing kernel: a bump `theta` equal to 1 on `|y| <= a - delta`,
//! vanishing for `|y| >= a + delta`, with an explicit Fourier transform.
//!
//! The bump is the indicator of `[-a, a]` convolved with `k` uniform
//! densities on `[-delta/k, delta/k]`. Its transform is therefore the finite
//! product
//!
//! ```text
//! Theta(x) = sin(2 pi a x) / (pi x) * (sin(u) / u)^k,   u = 2 pi delta x / k
//! ```
//!
//! and obeys `|Theta(x)| <= min(2a, 1/(pi|x|), (1/(pi|x|)) (k/(2 pi |x| delta))^k)`.
//!
//! Inside the transition band the bump is one minus the distribution
//! function of a sum of `k` uniforms, evaluated through the nonnegative
//! B-spline recurrence. [`theta_by_inversion`] recomputes the same value by
//! Fourier inversion of `Theta`.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::quad;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel needs 0 < delta < a/4 (got a = {a}, delta = {delta})")]
    Width { a: f64, delta: f64 },
    #[error("kernel smoothness order must be at least 1")]
    Order,
    #[error("kernel for a run needs epsilon > 0 and X >= 3 (got epsilon = {epsilon}, X = {x})")]
    Run { epsilon: f64, x: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmoothingKernel {
    a: f64,
    delta: f64,
    k: u32,
}

impl SmoothingKernel {
    pub fn new(a: f64, delta: f64, k: u32) -> Result<Self, KernelError> {
        if !(delta > 0.0 && delta < a / 4.0) || !a.is_finite() {
            return Err(KernelError::Width { a, delta });
        }
        if k == 0 {
            return Err(KernelError::Order);
        }
        Ok(Self { a, delta, k })
    }

    /// The instantiation used for the quaternary count:
    /// `a = 9 eps / 10`, `delta = eps / 10`, `k = floor(ln X)`.
    pub fn for_run(epsilon: f64, x: f64) -> Result<Self, KernelError> {
        Self::scaled(epsilon, x, 0.9, 0.1)
    }

    /// The ternary instantiation `a = 5 eps / 4`, `delta = eps / 4`,
    /// `k = floor(ln X0)`: pass region `|y| <= eps`, support `|y| < 3 eps / 2`.
    pub fn for_ternary(epsilon: f64, x0: f64) -> Result<Self, KernelError> {
        Self::scaled(epsilon, x0, 1.25, 0.25)
    }

    fn scaled(epsilon: f64, x: f64, a: f64, delta: f64) -> Result<Self, KernelError> {
        if !(epsilon > 0.0) || !(x >= 3.0) {
            return Err(KernelError::Run { epsilon, x });
        }
        Self::new(a * epsilon, delta * epsilon, x.ln().floor() as u32)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `a + delta`: `theta` vanishes outside this radius.
    pub fn support(&self) -> f64 {
        self.a + self.delta
    }

    /// `a - delta`: `theta` is identically 1 inside this radius.
    pub fn plateau(&self) -> f64 {
        self.a - self.delta
    }

    pub fn theta(&self, y: f64) -> f64 {
        let y = y.abs();
        if y <= self.plateau() {
            1.0
        } else if y >= self.support() {
            0.0
        } else {
            // For y in the band the upper tail is inactive (delta < a/4), so
            // theta(y) = P(Z <= a - y) with Z a sum of k uniforms.
            let h = self.delta / self.k as f64;
            let s = 0.5 * ((self.a - y) / h + self.k as f64);
            irwin_hall_cdf(self.k, s)
        }
    }

    pub fn theta_fourier(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 2.0 * self.a;
        }
        let u = 2.0 * PI * self.delta * x / self.k as f64;
        (2.0 * PI * self.a * x).sin() / (PI * x) * sinc(u).powi(self.k as i32)
    }

    pub fn envelope(&self, x: f64) -> f64 {
        let two_a = 2.0 * self.a;
        if x == 0.0 {
            return two_a;
        }
        let ax = x.abs();
        let decay = 1.0 / (PI * ax);
        let smooth = decay * (self.k as f64 / (2.0 * PI * ax * self.delta)).powi(self.k as i32);
        two_a.min(decay).min(smooth)
    }

    /// Smallest `x > 0` (up to a factor 2) beyond which the envelope stays below `floor`.
    pub fn envelope_cutoff(&self, floor: f64) -> f64 {
        let mut x = 1.0 / self.a;
        while self.envelope(x) >= floor {
            x *= 2.0;
        }
        x
    }

    /// `(y, theta(y))` on `n` equally spaced points of `[0, a + 2 delta]`.
    pub fn theta_grid(&self, n: usize) -> Vec<(f64, f64)> {
        let hi = self.a + 2.0 * self.delta;
        grid(0.0, hi, n).map(|y| (y, self.theta(y))).collect()
    }

    /// `(x, Theta(x), envelope(x))` on `n` equally spaced points of `[0, x_max]`.
    pub fn fourier_grid(&self, x_max: f64, n: usize) -> Vec<(f64, f64, f64)> {
        grid(0.0, x_max, n)
            .map(|x| (x, self.theta_fourier(x), self.envelope(x)))
            .collect()
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| lo + step * i as f64)
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Distribution function of a sum of `k` independent uniforms on `[0, 1]`.
///
/// Uses `F_k(s) = sum_{m=0}^{floor s} M_{k+1}(frac(s) + m)` with the cardinal
/// B-spline `M_n`, built level by level from nonnegative terms only.
pub fn irwin_hall_cdf(k: u32, s: f64) -> f64 {
    let k = k as usize;
    if s <= 0.0 {
        return 0.0;
    }
    if s >= k as f64 {
        return 1.0;
    }
    let whole = s.floor();
    let t = s - whole;
    let order = k + 1;
    // spline[m] = M_n(t + m), m = 0..n
    let mut spline = vec![0.0; order];
    spline[0] = 1.0;
    for n in 2..=order {
        for m in (0..n).rev() {
            let x = t + m as f64;
            let here = if m < n - 1 { spline[m] } else { 0.0 };
            let left = if m > 0 { spline[m - 1] } else { 0.0 };
            spline[m] = (x * here + (n as f64 - x) * left) / (n - 1) as f64;
        }
    }
    let upto = whole as usize;
    spline[..=upto].iter().sum::<f64>().min(1.0)
}

/// `theta(y)` recomputed as `2 * int_0^T Theta(x) cos(2 pi x y) dx`, truncated
/// where the envelope falls below `1e-13`. Accurate to about `1e-10` once
/// `k >= 3`; slower and independent of [`SmoothingKernel::theta`].
pub fn theta_by_inversion(kernel: &SmoothingKernel, y: f64) -> f64 {
    let cutoff = kernel.envelope_cutoff(1e-13);
    let top_freq = kernel.support() + y.abs();
    let width = 1.0 / (8.0 * top_freq);
    let integrand = |x: f64| kernel.theta_fourier(x) * (2.0 * PI * x * y).cos();
    2.0 * quad::gl_panels(integrand, 0.0, cutoff, width)
}
