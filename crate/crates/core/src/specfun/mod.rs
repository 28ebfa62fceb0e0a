//! Complex special functions: log-gamma, reciprocal gamma, digamma and the
//! Gauss hypergeometric function on the cut plane.
//!
//! Branch convention, used by every module in the crate: fractional powers
//! and logarithms take the principal branch, with the cut along the negative
//! real axis of their argument.

mod gamma;
mod hyp2f1;

pub use gamma::{cospi, digamma, gamma, log_gamma, recip_gamma, sinpi};
pub use hyp2f1::{hyp2f1, hyp2f1_side, HypParams, Side};

use num_complex::Complex64;

pub type C = Complex64;

/// Nearest integer when `z` lies within `tol` of a non-positive integer.
pub(crate) fn nonpositive_integer(z: C, tol: f64) -> Option<i64> {
    let n = z.re.round();
    (n <= 0.0 && (z.re - n).abs() <= tol && z.im.abs() <= tol).then_some(n as i64)
}

/// Nearest integer when `z` lies within `tol` of any integer.
pub(crate) fn near_integer(z: C, tol: f64) -> Option<i64> {
    let n = z.re.round();
    ((z.re - n).abs() <= tol && z.im.abs() <= tol).then_some(n as i64)
}
