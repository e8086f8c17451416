//! Floating-point scalar abstraction shared by the inference code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A real scalar usable for probabilities and log-probabilities.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance within which a probability row must sum to one.
    fn row_tolerance() -> Self;

    /// Relative gap below which two path scores count as tied. Paths that
    /// are exact ties can differ by a few ulps once summed in another order.
    fn tie_tolerance() -> Self;

    /// Converts an `f64` literal. Infallible for the IEEE float types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    #[inline]
    fn row_tolerance() -> Self {
        1e-9
    }

    #[inline]
    fn tie_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    // single precision cannot resolve 1e-9 around 1.0
    #[inline]
    fn row_tolerance() -> Self {
        1e-5
    }

    #[inline]
    fn tie_tolerance() -> Self {
        1e-6
    }
}

/// `ln(exp(a) + exp(b))`, tolerant of `-inf` operands.
#[inline]
pub fn log_add<T: Scalar>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln(sum(exp(x)))` over a slice; `-inf` for an empty slice or all `-inf`.
pub fn log_sum_exp<T: Scalar>(xs: &[T]) -> T {
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    let s = xs.iter().fold(T::zero(), |acc, &x| acc + (x - m).exp());
    m + s.ln()
}

/// True when log-score `candidate` beats `incumbent` by more than the tie
/// tolerance.
#[inline]
pub fn strictly_better<T: Scalar>(candidate: T, incumbent: T) -> bool {
    if incumbent == T::neg_infinity() || candidate == T::neg_infinity() {
        return candidate > incumbent;
    }
    candidate - incumbent > T::tie_tolerance() * T::one().max(incumbent.abs())
}

/// Natural log mapping zero to `-inf` without warnings or NaN.
#[inline]
pub fn safe_ln<T: Scalar>(p: T) -> T {
    if p <= T::zero() {
        T::neg_infinity()
    } else {
        p.ln()
    }
}
