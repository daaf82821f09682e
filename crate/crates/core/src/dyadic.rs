//! Exact dyadic rationals `m / 2^k`.
//!
//! Every Haar integral of a step function at resolution `N` is an integer
//! multiple of `2^-N`, so this is the only number type the `p = 1` pipeline
//! needs. Values are kept canonical: the numerator is odd, or the value is
//! zero with exponent zero.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest exponent accepted when parsing text input.
pub const MAX_PARSED_EXPONENT: u32 = 4096;
/// Longest numerator (in characters) accepted when parsing text input.
pub const MAX_PARSED_DIGITS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DyadicRational {
    num: BigInt,
    exp: u32,
}

impl DyadicRational {
    pub fn new(num: impl Into<BigInt>, exp: u32) -> Self {
        let mut value = DyadicRational {
            num: num.into(),
            exp,
        };
        value.normalize();
        value
    }

    pub fn zero() -> Self {
        DyadicRational::default()
    }

    pub fn one() -> Self {
        DyadicRational::from_integer(1)
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        DyadicRational::new(n, 0)
    }

    /// `2^k` for any signed `k`.
    pub fn pow2(k: i64) -> Self {
        if k >= 0 {
            DyadicRational::from_integer(BigInt::one() << (k as u64))
        } else {
            DyadicRational::new(1, (-k) as u32)
        }
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exp as u64);
        if shift > 0 {
            self.num >>= shift;
            self.exp -= shift as u32;
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn abs(&self) -> Self {
        DyadicRational {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    pub fn signum(&self) -> i32 {
        match self.num.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Multiplies by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if k >= 0 {
            let k = k as u64;
            let cancel = k.min(self.exp as u64);
            DyadicRational::new(&self.num << (k - cancel), self.exp - cancel as u32)
        } else {
            DyadicRational::new(self.num.clone(), self.exp + (-k) as u32)
        }
    }

    /// Numerator rescaled to the common exponent `exp >= self.exponent()`.
    pub fn scaled_numerator(&self, exp: u32) -> BigInt {
        debug_assert!(exp >= self.exp);
        &self.num << (exp - self.exp)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), BigInt::one() << self.exp)
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.num.bits();
        // Keep the mantissa within f64 range before scaling.
        if bits > 1000 {
            let drop = bits - 64;
            let head = (&self.num >> drop).to_f64().unwrap_or(f64::NAN);
            head * 2f64.powi(drop as i32 - self.exp as i32)
        } else {
            self.num.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-(self.exp as i32))
        }
    }
}

impl From<i64> for DyadicRational {
    fn from(n: i64) -> Self {
        DyadicRational::from_integer(n)
    }
}

impl From<BigInt> for DyadicRational {
    fn from(n: BigInt) -> Self {
        DyadicRational::from_integer(n)
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exp == other.exp {
            return self.num.cmp(&other.num);
        }
        let exp = self.exp.max(other.exp);
        self.scaled_numerator(exp).cmp(&other.scaled_numerator(exp))
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let exp = self.exp.max(rhs.exp);
        DyadicRational::new(self.scaled_numerator(exp) + rhs.scaled_numerator(exp), exp)
    }
}

impl Add for DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: DyadicRational) -> DyadicRational {
        &self + &rhs
    }
}

impl AddAssign<&DyadicRational> for DyadicRational {
    fn add_assign(&mut self, rhs: &DyadicRational) {
        *self = &*self + rhs;
    }
}

impl<'a> Sub<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;

    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        let exp = self.exp.max(rhs.exp);
        DyadicRational::new(self.scaled_numerator(exp) - rhs.scaled_numerator(exp), exp)
    }
}

impl Sub for DyadicRational {
    type Output = DyadicRational;

    fn sub(self, rhs: DyadicRational) -> DyadicRational {
        &self - &rhs
    }
}

impl SubAssign<&DyadicRational> for DyadicRational {
    fn sub_assign(&mut self, rhs: &DyadicRational) {
        *self = &*self - rhs;
    }
}

impl<'a> Mul<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;

    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        DyadicRational::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Mul for DyadicRational {
    type Output = DyadicRational;

    fn mul(self, rhs: DyadicRational) -> DyadicRational {
        &self * &rhs
    }
}

impl Neg for DyadicRational {
    type Output = DyadicRational;

    fn neg(self) -> DyadicRational {
        DyadicRational {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;

    fn neg(self) -> DyadicRational {
        -(self.clone())
    }
}

impl Sum for DyadicRational {
    fn sum<I: Iterator<Item = DyadicRational>>(iter: I) -> Self {
        iter.fold(DyadicRational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a DyadicRational> for DyadicRational {
    fn sum<I: Iterator<Item = &'a DyadicRational>>(iter: I) -> Self {
        let mut acc = DyadicRational::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// Renders as `<numerator>/2^<exponent>`, the form used by fixture files and CSV.
impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

/// Accepts `m/2^k`, `m/d` with `d` a power of two, or a plain integer `m`.
impl FromStr for DyadicRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::RationalLiteral(s.chars().take(64).collect());
        let s = s.trim();
        let (num_text, exp) = match s.split_once('/') {
            None => (s, 0),
            Some((num, den)) => {
                let den = den.trim();
                let exp = if let Some(k) = den.strip_prefix("2^") {
                    if k.is_empty() || !k.bytes().all(|b| b.is_ascii_digit()) || k.len() > 6 {
                        return Err(bad());
                    }
                    k.parse::<u32>().map_err(|_| bad())?
                } else {
                    if den.is_empty() || !den.bytes().all(|b| b.is_ascii_digit()) || den.len() > 20
                    {
                        return Err(bad());
                    }
                    let d = den.parse::<u64>().map_err(|_| bad())?;
                    if d == 0 || !d.is_power_of_two() {
                        return Err(bad());
                    }
                    d.trailing_zeros()
                };
                (num.trim(), exp)
            }
        };
        if exp > MAX_PARSED_EXPONENT {
            return Err(bad());
        }
        let digits = num_text.strip_prefix(['-', '+']).unwrap_or(num_text);
        if digits.is_empty()
            || digits.len() > MAX_PARSED_DIGITS
            || !digits.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let num: BigInt = num_text.parse().map_err(|_| bad())?;
        Ok(DyadicRational::new(num, exp))
    }
}
