//! Integer carriers for the exact hot loops.
//!
//! Kernels run on scaled integer numerators. When the worst-case magnitude
//! of a kernel fits comfortably in 128 bits they run on `i128`; otherwise on
//! `BigInt`. Both paths produce identical results.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

/// Bits of headroom below `i128::MAX` that we are willing to use.
pub(crate) const I128_BUDGET: u64 = 124;

pub(crate) trait Lane: Signed + Ord + Clone + Send + Sync + From<i64> + 'static {
    fn from_big(v: &BigInt) -> Self;
    fn to_big(&self) -> BigInt;
    fn to_f64(&self) -> f64;
}

impl Lane for i128 {
    fn from_big(v: &BigInt) -> Self {
        v.to_i128()
            .expect("magnitude checked before lowering to i128")
    }

    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Lane for BigInt {
    fn from_big(v: &BigInt) -> Self {
        v.clone()
    }

    fn to_big(&self) -> BigInt {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Largest bit length among the integers.
pub(crate) fn max_bits(ints: &[BigInt]) -> u64 {
    ints.iter().map(|v| v.bits()).max().unwrap_or(0)
}

/// Whether integers of `bits` bits may grow by `growth` further bits on `i128`.
pub(crate) fn fits_i128(bits: u64, growth: u64) -> bool {
    bits + growth <= I128_BUDGET
}

/// In-place unnormalized Walsh–Hadamard butterfly over natural index order.
pub(crate) fn fwht<T: Lane>(a: &mut [T]) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let sum = x.clone() + y.clone();
                let diff = x.clone() - y.clone();
                *x = sum;
                *y = diff;
            }
        }
        h *= 2;
    }
}

/// Reverses the low `bits` bits of `i`.
#[inline]
pub(crate) fn reverse_bits(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}
