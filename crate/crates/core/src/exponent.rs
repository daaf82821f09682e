use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// A positive rational exponent `p`, as used by `L_p`, `H_p` and the weight families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Exponent(Ratio<u64>);

impl Exponent {
    pub const ONE: Exponent = Exponent(Ratio::new_raw(1, 1));

    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidExponent(format!("{num}/{den}")));
        }
        Ok(Exponent(Ratio::new(num, den)))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn is_one(&self) -> bool {
        self.numer() == self.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// `1/p - 1` as an exact rational (may be negative for `p > 1`).
    pub fn dual_gap(&self) -> Ratio<i64> {
        Ratio::new(
            self.denom() as i64 - self.numer() as i64,
            self.numer() as i64,
        )
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

/// Accepts `a`, `a/b` or a finite decimal such as `0.5`.
impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidExponent(s.chars().take(32).collect());
        let s = s.trim();
        let digits =
            |t: &str| !t.is_empty() && t.len() <= 9 && t.bytes().all(|b| b.is_ascii_digit());
        if let Some((a, b)) = s.split_once('/') {
            if !digits(a) || !digits(b) {
                return Err(bad());
            }
            return Exponent::new(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        }
        if let Some((int, frac)) = s.split_once('.') {
            let int = if int.is_empty() { "0" } else { int };
            if !digits(int) || !digits(frac) {
                return Err(bad());
            }
            let scale = 10u64.pow(frac.len() as u32);
            let num = int.parse::<u64>().map_err(|_| bad())? * scale
                + frac.parse::<u64>().map_err(|_| bad())?;
            return Exponent::new(num, scale);
        }
        if !digits(s) {
            return Err(bad());
        }
        Exponent::new(s.parse().map_err(|_| bad())?, 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!("1".parse::<Exponent>().unwrap(), Exponent::ONE);
        assert_eq!(
            "1/2".parse::<Exponent>().unwrap(),
            Exponent::new(1, 2).unwrap()
        );
        assert_eq!(
            "0.5".parse::<Exponent>().unwrap(),
            Exponent::new(1, 2).unwrap()
        );
        assert_eq!(
            ".25".parse::<Exponent>().unwrap(),
            Exponent::new(1, 4).unwrap()
        );
        assert_eq!("2/4".parse::<Exponent>().unwrap().to_string(), "1/2");
        for bad in ["0", "0/1", "1/0", "-1", "", "a", "1.", "1/2/3"] {
            assert!(bad.parse::<Exponent>().is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn dual_gap() {
        assert_eq!(
            Exponent::new(1, 2).unwrap().dual_gap(),
            Ratio::from_integer(1)
        );
        assert_eq!(Exponent::ONE.dual_gap(), Ratio::from_integer(0));
        assert_eq!(Exponent::new(2, 3).unwrap().dual_gap(), Ratio::new(1, 2));
    }
}
