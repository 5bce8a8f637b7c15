//! Floating point abstraction shared by every numerical routine in the crate.

use std::fmt;

use nalgebra as na;
use num_traits as nt;

/// Real scalar usable by the solvers: `f32` and `f64` out of the box.
pub trait Real:
    Copy
    + na::RealField
    + nt::FloatConst
    + nt::FromPrimitive
    + nt::ToPrimitive
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(x).expect("f64 literal must be representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        nt::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Unit roundoff `u = eps / 2`.
    fn unit_roundoff() -> Self;
}

impl Real for f32 {
    fn unit_roundoff() -> Self {
        f32::EPSILON / 2.0
    }
}

impl Real for f64 {
    fn unit_roundoff() -> Self {
        f64::EPSILON / 2.0
    }
}

/// Numerically stable logistic function `1 / (1 + exp(-m))`.
pub fn sigmoid<T: Real>(m: T) -> T {
    if m >= T::zero() {
        T::one() / (T::one() + (-m).exp())
    } else {
        let e = m.exp();
        e / (T::one() + e)
    }
}

/// Numerically stable `log(1 + exp(-m))`.
pub fn log1p_exp_neg<T: Real>(m: T) -> T {
    if m > T::zero() {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_symmetric_and_stable() {
        for &m in &[-800.0f64, -30.0, -1.0, 0.0, 1.0, 30.0, 800.0] {
            let s = sigmoid(m) + sigmoid(-m);
            assert!((s - 1.0).abs() < 1e-15, "m = {m}");
            assert!(sigmoid(m).is_finite());
        }
        assert_eq!(sigmoid(0.0f64), 0.5);
    }

    #[test]
    fn softplus_matches_naive_where_safe() {
        for &m in &[-5.0f64, -0.5, 0.0, 0.5, 5.0] {
            let naive = (1.0 + (-m).exp()).ln();
            assert!((log1p_exp_neg(m) - naive).abs() < 1e-14);
        }
        assert!((log1p_exp_neg(-800.0f64) - 800.0).abs() < 1e-12);
        assert!(log1p_exp_neg(800.0f64) >= 0.0);
    }

    #[test]
    fn f32_literals_round_trip() {
        assert_eq!(<f32 as Real>::lit(0.25), 0.25f32);
        assert_eq!(<f64 as Real>::unit_roundoff(), f64::EPSILON / 2.0);
    }
}
