//! Nonnegative results that are exact when the inputs allow it.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::dyadic::DyadicRational;

#[derive(Clone, Debug, PartialEq)]
pub enum Real {
    Exact(BigRational),
    Approx(f64),
}

impl Real {
    pub fn zero() -> Self {
        Real::Exact(BigRational::zero())
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Real::Exact(r) => Some(r),
            Real::Approx(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(r) => rational_to_f64(r),
            Real::Approx(x) => *x,
        }
    }

    /// Exact comparison when both sides are exact.
    pub fn compare(&self, other: &Real) -> Ordering {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }

    /// `"p/2^k"` (or `"p/q"` when the denominator is not a power of two) for
    /// exact values, a 15-significant-digit decimal otherwise.
    pub fn render(&self) -> String {
        match self {
            Real::Exact(r) => render_rational(r),
            Real::Approx(x) => decimal(*x),
        }
    }
}

impl From<DyadicRational> for Real {
    fn from(d: DyadicRational) -> Self {
        Real::Exact(d.to_rational())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn render_rational(r: &BigRational) -> String {
    let den = r.denom();
    let bits = den.bits();
    if bits > 0 && *den == BigInt::from(1) << (bits - 1) {
        format!("{}/2^{}", r.numer(), bits - 1)
    } else {
        format!("{}/{}", r.numer(), den)
    }
}

/// 15 significant digits in scientific notation.
pub fn decimal(x: f64) -> String {
    format!("{x:.14e}")
}
