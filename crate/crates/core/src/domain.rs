//! Step functions on the dyadic group at finite resolution.
//!
//! A point `x = (x_0, x_1, ...)` of the group is seen through its first `N`
//! coordinates. Coset index `i` stores them with `x_0` as the most
//! significant bit, so every coset `I_n(x)` with `n <= N` is a contiguous
//! range of indices and conditional expectations are block averages.

use std::ops::Range;

use num_bigint::BigInt;

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::MAX_RESOLUTION;

pub(crate) fn check_resolution(resolution: u32) -> Result<()> {
    if resolution > MAX_RESOLUTION {
        Err(Error::ResolutionTooLarge(resolution))
    } else {
        Ok(())
    }
}

/// A `ζ_N`-measurable function: one exact value per depth-`N` coset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StepFunction {
    resolution: u32,
    values: Vec<DyadicRational>,
}

impl StepFunction {
    pub fn new(resolution: u32, values: Vec<DyadicRational>) -> Result<Self> {
        check_resolution(resolution)?;
        if values.len() != 1usize << resolution {
            return Err(Error::LengthMismatch {
                resolution,
                got: values.len(),
            });
        }
        Ok(StepFunction { resolution, values })
    }

    pub fn from_integers(resolution: u32, values: &[i64]) -> Result<Self> {
        StepFunction::new(
            resolution,
            values.iter().map(|&v| DyadicRational::from(v)).collect(),
        )
    }

    pub fn from_fn(resolution: u32, f: impl FnMut(usize) -> DyadicRational) -> Result<Self> {
        check_resolution(resolution)?;
        Ok(StepFunction {
            resolution,
            values: (0..1usize << resolution).map(f).collect(),
        })
    }

    pub fn constant(resolution: u32, c: DyadicRational) -> Result<Self> {
        check_resolution(resolution)?;
        Ok(StepFunction {
            resolution,
            values: vec![c; 1 << resolution],
        })
    }

    pub fn zero(resolution: u32) -> Result<Self> {
        StepFunction::constant(resolution, DyadicRational::zero())
    }

    /// Indicator of a coset (or its complement).
    pub fn indicator(selector: &CosetSelector, resolution: u32) -> Result<Self> {
        selector.check_fits(resolution)?;
        StepFunction::from_fn(resolution, |i| {
            if selector.contains(i, resolution) {
                DyadicRational::one()
            } else {
                DyadicRational::zero()
            }
        })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[DyadicRational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<DyadicRational> {
        self.values
    }

    pub fn value_at(&self, index: usize) -> &DyadicRational {
        &self.values[index]
    }

    /// The same function seen at resolution `resolution + extra`.
    pub fn refine(&self, extra: u32) -> Result<Self> {
        let resolution = self.resolution + extra;
        check_resolution(resolution)?;
        let copies = 1usize << extra;
        let values = self
            .values
            .iter()
            .flat_map(|v| std::iter::repeat_n(v.clone(), copies))
            .collect();
        Ok(StepFunction { resolution, values })
    }

    pub fn refine_to(&self, resolution: u32) -> Result<Self> {
        if resolution < self.resolution {
            return Err(Error::ResolutionTooSmall {
                what: "refinement",
                needed: self.resolution,
                got: resolution,
            });
        }
        self.refine(resolution - self.resolution)
    }

    /// Conditional expectation on `ζ_m`, returned at resolution `m`.
    pub fn block_average(&self, m: u32) -> Result<Self> {
        if m > self.resolution {
            return Err(Error::ResolutionTooSmall {
                what: "block average",
                needed: m,
                got: self.resolution,
            });
        }
        let width = 1usize << (self.resolution - m);
        let shift = (self.resolution - m) as i64;
        let values = self
            .values
            .chunks(width)
            .map(|block| block.iter().sum::<DyadicRational>().mul_pow2(-shift))
            .collect();
        Ok(StepFunction {
            resolution: m,
            values,
        })
    }

    pub fn map(&self, f: impl FnMut(&DyadicRational) -> DyadicRational) -> Self {
        StepFunction {
            resolution: self.resolution,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        self.map(DyadicRational::abs)
    }

    pub fn scale(&self, c: &DyadicRational) -> Self {
        self.map(|v| v * c)
    }

    fn zip_with(
        &self,
        other: &StepFunction,
        f: impl Fn(&DyadicRational, &DyadicRational) -> DyadicRational,
    ) -> Result<Self> {
        let resolution = self.resolution.max(other.resolution);
        let a = self.refine_to(resolution)?;
        let b = other.refine_to(resolution)?;
        Ok(StepFunction {
            resolution,
            values: a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| f(x, y))
                .collect(),
        })
    }

    /// Sum at the finer of the two resolutions.
    pub fn add(&self, other: &StepFunction) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &StepFunction) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    /// Pointwise maximum of absolute values.
    pub fn max_abs(&self, other: &StepFunction) -> Result<Self> {
        self.zip_with(other, |x, y| x.abs().max(y.abs()))
    }

    /// `sup |f|`.
    pub fn sup_norm(&self) -> DyadicRational {
        self.values
            .iter()
            .map(DyadicRational::abs)
            .max()
            .unwrap_or_default()
    }

    /// Translation by a group element: `x ↦ f(x + h)`, where `h` is given by its
    /// first `N` coordinates as a coset index.
    pub fn translate(&self, by: usize) -> Self {
        StepFunction {
            resolution: self.resolution,
            values: (0..self.values.len())
                .map(|i| self.values[i ^ by].clone())
                .collect(),
        }
    }

    /// Common exponent `E` and integer numerators `m_i` with `f_i = m_i / 2^E`.
    pub fn scaled_integers(&self) -> (u32, Vec<BigInt>) {
        let exp = self
            .values
            .iter()
            .map(DyadicRational::exponent)
            .max()
            .unwrap_or(0);
        (
            exp,
            self.values
                .iter()
                .map(|v| v.scaled_numerator(exp))
                .collect(),
        )
    }

    /// Inverse of [`StepFunction::scaled_integers`].
    pub fn from_scaled_integers(resolution: u32, exp: u32, ints: Vec<BigInt>) -> Result<Self> {
        StepFunction::new(
            resolution,
            ints.into_iter()
                .map(|m| DyadicRational::new(m, exp))
                .collect(),
        )
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.values.iter().map(DyadicRational::to_f64).collect()
    }
}

/// A dyadic coset `I_n(x)` or its complement `G \ I_n(x)`.
///
/// `anchor` holds the prefix `x_0 ... x_{n-1}` as an `n`-bit number with
/// `x_0` most significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CosetSelector {
    pub depth: u32,
    pub anchor: u64,
    pub complement: bool,
}

impl CosetSelector {
    pub fn coset(depth: u32, anchor: u64) -> Result<Self> {
        check_resolution(depth)?;
        if depth < 64 && anchor >> depth != 0 {
            return Err(Error::AnchorOutOfRange { anchor, depth });
        }
        Ok(CosetSelector {
            depth,
            anchor,
            complement: false,
        })
    }

    /// `I_n = I_n(0)`.
    pub fn origin(depth: u32) -> Result<Self> {
        CosetSelector::coset(depth, 0)
    }

    pub fn complement(self) -> Self {
        CosetSelector {
            complement: !self.complement,
            ..self
        }
    }

    /// The shell `I_s \ I_{s+1} = I_{s+1}(e_s)`.
    pub fn shell(s: u32) -> Result<Self> {
        CosetSelector::coset(s + 1, 1)
    }

    /// `μ(I_n(x)) = 2^-n`, or `1 - 2^-n` for the complement.
    pub fn measure(&self) -> DyadicRational {
        let m = DyadicRational::pow2(-(self.depth as i64));
        if self.complement {
            &DyadicRational::one() - &m
        } else {
            m
        }
    }

    fn check_fits(&self, resolution: u32) -> Result<()> {
        if self.depth > resolution {
            return Err(Error::CosetTooDeep {
                depth: self.depth,
                resolution,
            });
        }
        Ok(())
    }

    /// Index range of the underlying coset (ignoring the complement flag).
    pub fn index_range(&self, resolution: u32) -> Result<Range<usize>> {
        self.check_fits(resolution)?;
        let width = resolution - self.depth;
        let start = (self.anchor as usize) << width;
        Ok(start..start + (1usize << width))
    }

    pub fn contains(&self, index: usize, resolution: u32) -> bool {
        let inside = if self.depth > resolution {
            false
        } else {
            (index >> (resolution - self.depth)) as u64 == self.anchor
        };
        inside != self.complement
    }
}

/// The shells `I_s \ I_{s+1}`, `0 <= s < M`, which partition `G \ I_M`.
pub fn shell_decompose(m: u32) -> Result<Vec<CosetSelector>> {
    if m == 0 {
        return Err(Error::EmptyShellDecomposition);
    }
    check_resolution(m)?;
    (0..m).map(CosetSelector::shell).collect()
}

/// Coset index of `e_s`, the point with coordinate 1 at position `s` and 0 elsewhere.
pub fn unit_point(s: u32, resolution: u32) -> Result<usize> {
    check_resolution(resolution)?;
    if s >= resolution {
        return Err(Error::UnitPointOutOfRange { s, resolution });
    }
    Ok(1usize << (resolution - 1 - s))
}

/// A functional value: exact for `p = 1`, binary64 otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum NormValue {
    Exact(DyadicRational),
    Approx(f64),
}

impl NormValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            NormValue::Exact(v) => v.to_f64(),
            NormValue::Approx(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&DyadicRational> {
        match self {
            NormValue::Exact(v) => Some(v),
            NormValue::Approx(_) => None,
        }
    }
}

/// `∫_G f dμ`, exact.
pub fn haar_integral(f: &StepFunction) -> DyadicRational {
    let (exp, ints) = f.scaled_integers();
    let total: BigInt = ints.iter().sum();
    DyadicRational::new(total, exp + f.resolution())
}

/// `(∫ |f|^p dμ)^{1/p}`.
pub fn lp_norm(f: &StepFunction, p: Exponent) -> NormValue {
    if p.is_one() {
        return NormValue::Exact(haar_integral(&f.abs()));
    }
    let pf = p.to_f64();
    let cell = (-(f.resolution() as f64)).exp2();
    let total: f64 = f.values().iter().map(|v| v.to_f64().abs().powf(pf)).sum();
    NormValue::Approx((total * cell).powf(1.0 / pf))
}

/// Distinct values in descending order, each paired with how many entries are `>=` it.
pub(crate) fn upper_level_counts<T: Ord + Clone>(mut values: Vec<T>) -> Vec<(T, usize)> {
    values.sort_unstable_by(|a, b| b.cmp(a));
    let mut out: Vec<(T, usize)> = Vec::new();
    for (i, v) in values.into_iter().enumerate() {
        match out.last_mut() {
            Some((last, count)) if *last == v => *count = i + 1,
            _ => out.push((v, i + 1)),
        }
    }
    out
}

/// `sup_{t>0} t · μ{x ∈ D : |f(x)| >= t}^{1/p}` over the domain `D` picked by
/// `selector` (all of `G` when absent). The event is the non-strict one; the
/// supremum is attained at a value of `|f|`.
pub fn weak_lp(f: &StepFunction, p: Exponent, selector: Option<&CosetSelector>) -> NormValue {
    let n = f.resolution();
    let levels = upper_level_counts(
        f.values()
            .iter()
            .enumerate()
            .filter(|(i, _)| selector.is_none_or(|s| s.contains(*i, n)))
            .map(|(_, v)| v.abs())
            .filter(|v| !v.is_zero())
            .collect(),
    );
    if p.is_one() {
        let best = levels
            .iter()
            .map(|(t, count)| t * &DyadicRational::from(*count as i64))
            .max()
            .unwrap_or_default();
        return NormValue::Exact(best.mul_pow2(-(n as i64)));
    }
    let inv_p = 1.0 / p.to_f64();
    let cell = (-(n as f64)).exp2();
    let best = levels
        .iter()
        .map(|(t, count)| t.to_f64() * (*count as f64 * cell).powf(inv_p))
        .fold(0.0, f64::max);
    NormValue::Approx(best)
}
