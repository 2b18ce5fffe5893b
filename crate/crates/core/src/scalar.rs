//! Scalar abstraction for the numeric pipeline.
//!
//! Count tables stay integral everywhere; everything probabilistic (topic
//! weights, estimators, perplexity, regression) is generic over [`Real`]
//! so the same code runs in `f32` or `f64`. The crate root exports `f64`
//! aliases, which is what the command-line tools use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used by the samplers and estimators.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum<Self> + Debug + Display + Send + Sync + 'static
{
    /// Natural log of the gamma function.
    fn ln_gamma(self) -> Self;

    /// Error function, used for normal-approximation p-values.
    fn erf(self) -> Self;

    /// Lossy conversion from `f64`; counts and hyperparameters are always
    /// representable, so this never fails in practice.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 value not representable in scalar type")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize value not representable in scalar type")
    }
}

impl Real for f64 {
    fn ln_gamma(self) -> f64 {
        libm::lgamma(self)
    }

    fn erf(self) -> f64 {
        libm::erf(self)
    }
}

impl Real for f32 {
    fn ln_gamma(self) -> f32 {
        libm::lgammaf(self)
    }

    fn erf(self) -> f32 {
        libm::erff(self)
    }
}
