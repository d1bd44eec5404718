//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All operator builders and analyses are written against [`Scalar`], so the
//! same pipeline runs in `f32`, `f64` or double-double ([`DoubleDouble`]).
//! The double-double path exists for operators whose singular values fall far
//! below the `f64` rounding floor, such as moment operators composed with
//! integration.

use std::fmt::Debug;
use std::ops::Neg;

use ndarray::ArrayView2;
use num_traits::{Num, NumAssign};

use crate::error::Result;
use crate::linalg::{jacobi, Svd, SvdJob};

/// Double-double precision real (about 31 significant decimal digits).
pub type DoubleDouble = qd::Quad;

/// Real field used for matrix entries and singular values.
pub trait Scalar:
    Num + NumAssign + Neg<Output = Self> + Copy + PartialOrd + Debug + Send + Sync + 'static
{
    /// Short type name, echoed in reports.
    const NAME: &'static str;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    /// Unit roundoff of the type.
    fn epsilon() -> Self;
    fn is_finite(self) -> bool;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    /// Integer power by repeated squaring.
    fn powi(self, mut exp: u64) -> Self {
        let mut base = self;
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Dense singular value decomposition.
    ///
    /// The default kernel is a one-sided Jacobi iteration carried out in the
    /// scalar's own arithmetic; native floats override it with faer.
    fn svd(a: ArrayView2<'_, Self>, job: SvdJob) -> Result<Svd<Self>> {
        jacobi::svd(a, job)
    }
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn svd(a: ArrayView2<'_, Self>, job: SvdJob) -> Result<Svd<Self>> {
        crate::linalg::native::svd(a, job)
    }
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";

    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn sqrt(self) -> Self {
        f32::sqrt(self)
    }
    fn abs(self) -> Self {
        f32::abs(self)
    }
    fn epsilon() -> Self {
        f32::EPSILON
    }
    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
    fn svd(a: ArrayView2<'_, Self>, job: SvdJob) -> Result<Svd<Self>> {
        crate::linalg::native::svd(a, job)
    }
}

impl Scalar for DoubleDouble {
    const NAME: &'static str = "double-double";

    fn from_f64(x: f64) -> Self {
        qd::Quad::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        self.0 + self.1
    }
    fn sqrt(self) -> Self {
        qd::Quad::sqrt(self)
    }
    fn abs(self) -> Self {
        qd::Quad::abs(self)
    }
    fn epsilon() -> Self {
        qd::Quad::EPSILON
    }
    fn is_finite(self) -> bool {
        qd::Quad::is_finite(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_matches_repeated_multiplication() {
        assert_eq!(3.0f64.powi(0), 1.0);
        assert_eq!(<f64 as Scalar>::powi(3.0, 5), 243.0);
        let x = DoubleDouble::from_f64(1.5);
        assert_eq!(x.powi(4).to_f64(), 5.0625);
    }

    #[test]
    fn double_double_carries_extra_digits() {
        let third = DoubleDouble::from_f64(1.0) / DoubleDouble::from_f64(3.0);
        let back = third * DoubleDouble::from_f64(3.0) - DoubleDouble::from_f64(1.0);
        assert!(back.abs().to_f64() < 1e-30);
        assert!(DoubleDouble::epsilon().to_f64() < 1e-30);
    }
}
