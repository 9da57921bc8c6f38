//! Numerics for counting and locating solutions of `p1^c + p2^c + p3^c + p4^c`
//! near a target `N`, with the first prime restricted to shifted sums of two
//! squares (`p - 1 = x^2 + y^2`).
//!
//! Modules, bottom up:
//!
//! * [`arith`]: segmented sieve, factorization, `chi_4`, `phi`, `Lambda`, `r`.
//! * [`smoothing`]: the compactly supported bump `theta` and its transform.
//! * [`expsum`]: the exponential sums `S`, `I`, `E`, `K` and their moments.
//! * [`gamma`]: smoothed and raw quadruple counts, searches and the ternary count.
//! * [`bounds`]: exact rational bookkeeping of exponent pairs and exponents.
//! * [`stats`]: singular series, divisor statistics and normalized counts.
//!
//! Parallel loops go through [`par`]; build with `--no-default-features` for
//! a single-threaded library with identical results.

// `!(x > 0.0)` is the NaN-rejecting form used by every validator.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod bounds;
pub mod expsum;
pub mod gamma;
pub mod par;
pub mod quad;
pub mod smoothing;
pub mod stats;

pub use arith::{ArithError, Factorization, PrimeTable, SieveConfig};
pub use smoothing::SmoothingKernel;
