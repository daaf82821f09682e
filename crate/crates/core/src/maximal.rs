//! Weighted maximal operators `sup_n |S_n f| / w(n)` and the weight catalog.
//!
//! At resolution `N` the partial sums stabilise (`S_n f = f` for `n >= 2^N`),
//! so the supremum over an unbounded index set is the maximum of a finite part
//! and the tail term `|f| / inf_{n >= 2^N} w(n)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::domain::{upper_level_counts, CosetSelector, StepFunction};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::index::{
    block_count, boundary_set, gap, high_bit, variation, window_profile, WindowProfile,
};
use crate::lane::{fits_i128, Lane};
use crate::martingale::{validate_atom, Atom};
use crate::value::Real;
use crate::walsh::{
    coordinates, scaled_spectrum, walsh_sign, wht, DirichletAccumulator, PartialSums, Scaled,
};

/// Largest resolution for a sweep over every `n <= 2^N` (cost `4^N`).
pub const MAX_SWEEP_RESOLUTION: u32 = 16;
/// Largest resolution for evaluation over a sparse explicit index list.
pub const MAX_SPARSE_RESOLUTION: u32 = 22;

/// A weight value: exact naturals where the formula gives one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    Integer(u64),
    Real(f64),
}

impl Weight {
    pub fn to_f64(self) -> f64 {
        match self {
            Weight::Integer(w) => w as f64,
            Weight::Real(w) => w,
        }
    }

    fn smaller(self, other: Weight) -> Weight {
        match (self, other) {
            (Weight::Integer(a), Weight::Integer(b)) => Weight::Integer(a.min(b)),
            _ if other.to_f64() < self.to_f64() => other,
            _ => self,
        }
    }
}

impl std::fmt::Display for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Weight::Integer(w) => write!(f, "{w}"),
            Weight::Real(w) => write!(f, "{}", crate::value::decimal(*w)),
        }
    }
}

/// One window `[2^s, 2^{s+1})` of a declared index family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub profile: WindowProfile,
    /// `|A_s|`.
    pub boundary_cardinality: usize,
}

/// Per-window index lists, at most one window per `s`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WindowFamily {
    windows: BTreeMap<u32, Window>,
}

impl WindowFamily {
    pub fn new(windows: impl IntoIterator<Item = (u32, Vec<u64>)>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (s, indices) in windows {
            let boundary = boundary_set(&indices, s)?;
            let mut profile = window_profile(&indices, s)?;
            profile.indices.dedup();
            let window = Window {
                profile,
                boundary_cardinality: boundary.cardinality(),
            };
            if out.insert(s, window).is_some() {
                return Err(Error::InadmissibleIndexSet {
                    family: "window",
                    reason: format!("window s={s} declared twice"),
                });
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        Ok(WindowFamily { windows: out })
    }

    pub fn windows(&self) -> impl Iterator<Item = &Window> {
        self.windows.values()
    }

    /// The window that declares `n`, if any.
    pub fn locate(&self, n: u64) -> Option<&Window> {
        if n == 0 {
            return None;
        }
        self.windows
            .get(&high_bit(n))
            .filter(|w| w.profile.indices.binary_search(&n).is_ok())
    }

    pub fn members(&self) -> Vec<u64> {
        self.windows()
            .flat_map(|w| w.profile.indices.iter().copied())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightFamily {
    /// `V(n)`.
    Variation,
    /// `(n+1)^{1/p-1}`.
    Polynomial {
        p: Exponent,
    },
    /// `2^{ρ(n)(1/p-1)}`.
    DyadicGap {
        p: Exponent,
    },
    /// `2^{ρ(n)(1/p-1)} (ρ(n)+1)^α`.
    GapPhi {
        p: Exponent,
        alpha: u32,
    },
    /// `2^{ρ(n)(1/p-1)} (ρ(n) log₂^{1+ε} ρ(n))^{1/p}`, defined for `ρ(n) >= 2`.
    EpsLog {
        p: Exponent,
        eps: f64,
    },
    /// `2^{ρ_s(1/p-1)}` on each declared window.
    WindowGap {
        p: Exponent,
        windows: WindowFamily,
    },
    /// `|A_s|` on each declared window.
    BoundaryCard {
        windows: WindowFamily,
    },
    Custom(BTreeMap<u64, Weight>),
}

fn check_p(p: Exponent) -> Result<()> {
    if p.numer() > p.denom() {
        return Err(Error::InvalidExponent(format!(
            "{p} (weights need 0 < p <= 1)"
        )));
    }
    Ok(())
}

/// `2^{k(1/p-1)}`, exact when the exponent is a small natural.
fn power_of_two_weight(k: u64, p: Exponent) -> Weight {
    let (r, q) = (p.numer(), p.denom());
    let top = k * (q - r);
    if top % r == 0 && top / r < 63 {
        Weight::Integer(1 << (top / r))
    } else {
        Weight::Real((top as f64 / r as f64).exp2())
    }
}

fn times(a: Weight, b: Weight) -> Weight {
    match (a, b) {
        (Weight::Integer(x), Weight::Integer(y)) => match x.checked_mul(y) {
            Some(v) if v < 1 << 62 => Weight::Integer(v),
            _ => Weight::Real(x as f64 * y as f64),
        },
        _ => Weight::Real(a.to_f64() * b.to_f64()),
    }
}

impl WeightFamily {
    pub fn name(&self) -> &'static str {
        match self {
            WeightFamily::Variation => "variation",
            WeightFamily::Polynomial { .. } => "polynomial",
            WeightFamily::DyadicGap { .. } => "dyadicGap",
            WeightFamily::GapPhi { .. } => "gapPhi",
            WeightFamily::EpsLog { .. } => "epsLog",
            WeightFamily::WindowGap { .. } => "windowGap",
            WeightFamily::BoundaryCard { .. } => "boundaryCard",
            WeightFamily::Custom(_) => "custom",
        }
    }

    /// Checks the family parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightFamily::Variation | WeightFamily::BoundaryCard { .. } => Ok(()),
            WeightFamily::Polynomial { p }
            | WeightFamily::DyadicGap { p }
            | WeightFamily::GapPhi { p, .. }
            | WeightFamily::WindowGap { p, .. } => check_p(*p),
            WeightFamily::EpsLog { p, eps } => {
                check_p(*p)?;
                if !(eps.is_finite() && *eps > 0.0) {
                    return Err(Error::InvalidExponent(format!(
                        "eps = {eps} (must be positive)"
                    )));
                }
                Ok(())
            }
            WeightFamily::Custom(table) => {
                for (&n, &w) in table {
                    let positive = match w {
                        Weight::Integer(v) => v > 0 && v < 1 << 62,
                        Weight::Real(v) => v.is_finite() && v > 0.0,
                    };
                    if n == 0 || !positive {
                        return Err(Error::UndefinedWeight {
                            family: "custom",
                            n,
                            reason: "custom weights must be positive and indexed from 1",
                        });
                    }
                }
                Ok(())
            }
        }
    }

    /// Whether the family is defined for every `n` (so it admits the full range).
    fn is_global(&self) -> bool {
        !matches!(
            self,
            WeightFamily::WindowGap { .. }
                | WeightFamily::BoundaryCard { .. }
                | WeightFamily::Custom(_)
        )
    }

    /// `w(n)`.
    pub fn weight(&self, n: u64) -> Result<Weight> {
        if n == 0 {
            return Err(Error::ZeroIndex);
        }
        let undefined = |reason| Error::UndefinedWeight {
            family: self.name(),
            n,
            reason,
        };
        match self {
            WeightFamily::Variation => Ok(Weight::Integer(variation(n) as u64)),
            WeightFamily::Polynomial { p } => {
                let (r, q) = (p.numer(), p.denom());
                let base = n.saturating_add(1);
                if r == q {
                    return Ok(Weight::Integer(1));
                }
                if r == 1 {
                    if let Some(v) = base.checked_pow((q - 1) as u32).filter(|v| *v < 1 << 62) {
                        return Ok(Weight::Integer(v));
                    }
                }
                Ok(Weight::Real((base as f64).powf((q - r) as f64 / r as f64)))
            }
            WeightFamily::DyadicGap { p } => Ok(power_of_two_weight(gap(n) as u64, *p)),
            WeightFamily::GapPhi { p, alpha } => {
                let rho = gap(n) as u64;
                let phi = match (rho + 1).checked_pow(*alpha) {
                    Some(v) => Weight::Integer(v),
                    None => Weight::Real(((rho + 1) as f64).powf(*alpha as f64)),
                };
                Ok(times(power_of_two_weight(rho, *p), phi))
            }
            WeightFamily::EpsLog { p, eps } => {
                let rho = gap(n) as u64;
                if rho < 2 {
                    return Err(undefined("the logarithmic factor needs rho(n) >= 2"));
                }
                Ok(Weight::Real(eps_log_value(rho, *p, *eps)))
            }
            WeightFamily::WindowGap { p, windows } => windows
                .locate(n)
                .map(|w| power_of_two_weight(w.profile.rho_s as u64, *p))
                .ok_or_else(|| undefined("n is not in any declared window")),
            WeightFamily::BoundaryCard { windows } => windows
                .locate(n)
                .map(|w| Weight::Integer(w.boundary_cardinality as u64))
                .ok_or_else(|| undefined("n is not in any declared window")),
            WeightFamily::Custom(table) => table
                .get(&n)
                .copied()
                .ok_or_else(|| undefined("n has no entry in the custom table")),
        }
    }

    /// `inf_{n >= 2^N} w(n)` over the full range, in closed form.
    pub fn tail_infimum(&self, resolution: u32) -> Result<Weight> {
        match self {
            // V(2^m) = 2 is the least value of V.
            WeightFamily::Variation => Ok(Weight::Integer(2)),
            // Increasing in n.
            WeightFamily::Polynomial { .. } => self.weight(1u64 << resolution),
            // Attained at powers of two, where ρ = 0.
            WeightFamily::DyadicGap { .. } | WeightFamily::GapPhi { .. } => self.weight(1u64 << resolution),
            // Increasing in ρ on ρ >= 2.
            WeightFamily::EpsLog { p, eps } => Ok(Weight::Real(eps_log_value(2, *p, *eps))),
            _ => Err(Error::InadmissibleIndexSet {
                family: self.name(),
                reason: "the family is defined only on declared indices; use an explicit or window index set".into(),
            }),
        }
    }
}

fn eps_log_value(rho: u64, p: Exponent, eps: f64) -> f64 {
    let rho_f = rho as f64;
    let gap_part = power_of_two_weight(rho, p).to_f64();
    gap_part * (rho_f * rho_f.log2().powf(1.0 + eps)).powf(1.0 / p.to_f64())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexSet {
    /// Every `n >= 1`.
    All,
    /// An explicit subsequence `{n_k}`.
    Explicit(Vec<u64>),
    Windows(WindowFamily),
}

impl IndexSet {
    pub fn explicit(mut indices: Vec<u64>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        if indices.contains(&0) {
            return Err(Error::ZeroIndex);
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(IndexSet::Explicit(indices))
    }
}

/// `w(n)` for every admissible `n <= 2^N`, plus the least weight beyond `2^N`.
struct WeightTable {
    /// `(n, w(n))`, increasing in `n`.
    finite: Vec<(u64, Weight)>,
    beyond: Option<Weight>,
}

impl WeightTable {
    fn build(family: &WeightFamily, idx: &IndexSet, resolution: u32) -> Result<Self> {
        family.validate()?;
        let top = 1u64 << resolution;
        let mut finite = Vec::new();
        let mut beyond: Option<Weight> = None;
        match idx {
            IndexSet::All => {
                if !family.is_global() {
                    return Err(family.tail_infimum(resolution).unwrap_err());
                }
                for n in 1..=top {
                    match family.weight(n) {
                        Ok(w) => finite.push((n, w)),
                        Err(Error::UndefinedWeight { .. })
                            if matches!(family, WeightFamily::EpsLog { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
                beyond = Some(family.tail_infimum(resolution)?);
            }
            IndexSet::Explicit(_) | IndexSet::Windows(_) => {
                let members = match idx {
                    IndexSet::Explicit(v) => v.clone(),
                    IndexSet::Windows(w) => {
                        let mut v = w.members();
                        v.sort_unstable();
                        v
                    }
                    IndexSet::All => unreachable!(),
                };
                if members.is_empty() {
                    return Err(Error::EmptyIndexSet);
                }
                for n in members {
                    let w = family.weight(n)?;
                    if n <= top {
                        finite.push((n, w));
                    } else {
                        beyond = Some(beyond.map_or(w, |b| b.smaller(w)));
                    }
                }
            }
        }
        if finite.is_empty() && beyond.is_none() {
            return Err(Error::EmptyIndexSet);
        }
        Ok(WeightTable { finite, beyond })
    }

    fn integer_weights(&self) -> Option<(Vec<(u64, u64)>, Option<u64>)> {
        let as_int = |w: Weight| match w {
            Weight::Integer(v) => Some(v),
            Weight::Real(_) => None,
        };
        let finite = self
            .finite
            .iter()
            .map(|&(n, w)| as_int(w).map(|v| (n, v)))
            .collect::<Option<Vec<_>>>()?;
        let beyond = match self.beyond {
            Some(w) => Some(as_int(w)?),
            None => None,
        };
        Some((finite, beyond))
    }
}

/// Values of a weighted maximal function, one per depth-`N` coset.
#[derive(Clone, Debug, PartialEq)]
pub enum MaximalValues {
    Exact(Vec<BigRational>),
    Approx(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaximalFunction {
    resolution: u32,
    values: MaximalValues,
}

impl MaximalFunction {
    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn values(&self) -> &MaximalValues {
        &self.values
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.values, MaximalValues::Exact(_))
    }

    pub fn value_at(&self, index: usize) -> Real {
        match &self.values {
            MaximalValues::Exact(v) => Real::Exact(v[index].clone()),
            MaximalValues::Approx(v) => Real::Approx(v[index]),
        }
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        match &self.values {
            MaximalValues::Exact(v) => v.iter().map(crate::value::rational_to_f64).collect(),
            MaximalValues::Approx(v) => v.clone(),
        }
    }

    fn cell(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << self.resolution)
    }

    /// `∫_G` of the maximal function, i.e. its `L_1` norm.
    pub fn integral(&self) -> Real {
        match &self.values {
            MaximalValues::Exact(v) => Real::Exact(v.iter().sum::<BigRational>() * self.cell()),
            MaximalValues::Approx(v) => {
                Real::Approx(v.iter().sum::<f64>() * (-(self.resolution as f64)).exp2())
            }
        }
    }

    /// `sup_t t · μ{x ∈ D : value(x) >= t}` over the domain picked by `selector`.
    pub fn weak_l1(&self, selector: Option<&CosetSelector>) -> Real {
        let n = self.resolution;
        let keep = |i: usize| selector.is_none_or(|s| s.contains(i, n));
        match &self.values {
            MaximalValues::Exact(v) => {
                let picked: Vec<BigRational> = v
                    .iter()
                    .enumerate()
                    .filter(|(i, x)| keep(*i) && !x.is_zero())
                    .map(|(_, x)| x.clone())
                    .collect();
                let best = upper_level_counts(picked)
                    .into_iter()
                    .map(|(t, count)| t * BigRational::from_integer(count.into()))
                    .max()
                    .unwrap_or_default();
                Real::Exact(best * self.cell())
            }
            MaximalValues::Approx(v) => {
                let mut picked: Vec<f64> = v
                    .iter()
                    .enumerate()
                    .filter(|(i, x)| keep(*i) && **x > 0.0)
                    .map(|(_, x)| *x)
                    .collect();
                picked.sort_unstable_by(|a, b| b.total_cmp(a));
                let best = picked
                    .iter()
                    .enumerate()
                    .map(|(i, t)| t * (i + 1) as f64)
                    .fold(0.0, f64::max);
                Real::Approx(best * (-(n as f64)).exp2())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Evaluation {
    /// Accumulate `S_n` one coefficient at a time at each point.
    Sweep,
    /// One transform per index in the set.
    PerIndex,
}

/// `sup_{n ∈ idx} |S_n f| / w(n)` at every coset, including the tail beyond `2^N`.
pub fn weighted_maximal(
    f: &StepFunction,
    family: &WeightFamily,
    idx: &IndexSet,
) -> Result<MaximalFunction> {
    let table = WeightTable::build(family, idx, f.resolution())?;
    let strategy = if (table.finite.len() as u64) * (f.resolution() as u64 + 2)
        < table.finite.last().map_or(0, |e| e.0)
    {
        Evaluation::PerIndex
    } else {
        Evaluation::Sweep
    };
    evaluate(f, &table, strategy)
}

#[cfg(test)]
fn weighted_maximal_with(
    f: &StepFunction,
    family: &WeightFamily,
    idx: &IndexSet,
    strategy: Evaluation,
) -> Result<MaximalFunction> {
    let table = WeightTable::build(family, idx, f.resolution())?;
    evaluate(f, &table, strategy)
}

fn evaluate(
    f: &StepFunction,
    table: &WeightTable,
    strategy: Evaluation,
) -> Result<MaximalFunction> {
    let resolution = f.resolution();
    let limit = match strategy {
        Evaluation::Sweep => MAX_SWEEP_RESOLUTION,
        Evaluation::PerIndex => MAX_SPARSE_RESOLUTION,
    };
    if resolution > limit && !table.finite.is_empty() {
        return Err(Error::TooCostly {
            what: "weighted maximal function",
            resolution,
            limit,
        });
    }
    let values = match table.integer_weights() {
        Some((finite, beyond)) => {
            let mut best = match strategy {
                Evaluation::Sweep => sweep_exact(f, &finite),
                Evaluation::PerIndex => per_index_exact(f, &finite)?,
            };
            if let Some(w) = beyond {
                let w = BigRational::from_integer(w.into());
                for (b, v) in best.iter_mut().zip(f.values()) {
                    let candidate = v.abs().to_rational() / &w;
                    if candidate > *b {
                        *b = candidate;
                    }
                }
            }
            MaximalValues::Exact(best)
        }
        None => {
            let finite: Vec<(u64, f64)> =
                table.finite.iter().map(|&(n, w)| (n, w.to_f64())).collect();
            let mut best = match strategy {
                Evaluation::Sweep => sweep_approx(f, &finite),
                Evaluation::PerIndex => per_index_approx(f, &finite)?,
            };
            if let Some(w) = table.beyond {
                for (b, v) in best.iter_mut().zip(f.values()) {
                    *b = b.max(v.to_f64().abs() / w.to_f64());
                }
            }
            MaximalValues::Approx(best)
        }
    };
    Ok(MaximalFunction { resolution, values })
}

fn weight_bits(finite: &[(u64, u64)]) -> u64 {
    finite
        .iter()
        .map(|&(_, w)| 64 - w.leading_zeros() as u64)
        .max()
        .unwrap_or(0)
}

/// Dense per-`n` lookup: `slots[n]` is the weight of `n`, 0 when `n ∉ idx`.
fn slots<W: Copy + Default>(finite: &[(u64, W)]) -> Vec<W> {
    let top = finite.last().map_or(0, |e| e.0) as usize;
    let mut out = vec![W::default(); top + 1];
    for &(n, w) in finite {
        out[n as usize] = w;
    }
    out
}

fn sweep_exact(f: &StepFunction, finite: &[(u64, u64)]) -> Vec<BigRational> {
    let resolution = f.resolution();
    let spectrum = scaled_spectrum(f, resolution as u64 + 2 + weight_bits(finite));
    let weights = slots(finite);
    match &spectrum {
        Scaled::Small { exp, ints } => sweep_exact_lane(ints, *exp, &weights, resolution),
        Scaled::Big { exp, ints } => sweep_exact_lane(ints, *exp, &weights, resolution),
    }
}

fn sweep_exact_lane<T: Lane>(
    coeffs: &[T],
    exp: u32,
    weights: &[u64],
    resolution: u32,
) -> Vec<BigRational> {
    let top = weights.len().saturating_sub(1);
    let scale = BigInt::one() << exp;
    (0..coeffs.len())
        .into_par_iter()
        .map(|i| {
            let coords = coordinates(i, resolution);
            let mut s = T::zero();
            let mut best = T::zero();
            let mut best_w = T::one();
            for k in 0..top {
                let c = &coeffs[k];
                if !c.is_zero() {
                    if walsh_sign(k as u64, coords) > 0 {
                        s = s + c.clone();
                    } else {
                        s = s - c.clone();
                    }
                }
                let w = weights[k + 1];
                if w != 0 {
                    let a = s.abs();
                    let wt = T::from(w as i64);
                    if a.clone() * best_w.clone() > best.clone() * wt.clone() {
                        best = a;
                        best_w = wt;
                    }
                }
            }
            BigRational::new(best.to_big(), &scale * best_w.to_big())
        })
        .collect()
}

fn sweep_approx(f: &StepFunction, finite: &[(u64, f64)]) -> Vec<f64> {
    let resolution = f.resolution();
    let spectrum = scaled_spectrum(f, resolution as u64 + 2);
    let weights = slots(finite);
    match &spectrum {
        Scaled::Small { exp, ints } => sweep_approx_lane(ints, *exp, &weights, resolution),
        Scaled::Big { exp, ints } => sweep_approx_lane(ints, *exp, &weights, resolution),
    }
}

fn sweep_approx_lane<T: Lane>(
    coeffs: &[T],
    exp: u32,
    weights: &[f64],
    resolution: u32,
) -> Vec<f64> {
    let top = weights.len().saturating_sub(1);
    let scale = (-(exp as f64)).exp2();
    (0..coeffs.len())
        .into_par_iter()
        .map(|i| {
            let coords = coordinates(i, resolution);
            let mut s = T::zero();
            let mut best = 0.0f64;
            for k in 0..top {
                let c = &coeffs[k];
                if !c.is_zero() {
                    if walsh_sign(k as u64, coords) > 0 {
                        s = s + c.clone();
                    } else {
                        s = s - c.clone();
                    }
                }
                let w = weights[k + 1];
                if w != 0.0 {
                    best = best.max(s.abs().to_f64() * scale / w);
                }
            }
            best
        })
        .collect()
}

fn per_index_exact(f: &StepFunction, finite: &[(u64, u64)]) -> Result<Vec<BigRational>> {
    let sums = PartialSums::new(f);
    let mut best = vec![BigRational::zero(); f.len()];
    for &(n, w) in finite {
        let s = sums.partial_sum(n)?;
        let w = BigRational::from_integer(w.into());
        for (b, v) in best.iter_mut().zip(s.values()) {
            let candidate = v.abs().to_rational() / &w;
            if candidate > *b {
                *b = candidate;
            }
        }
    }
    Ok(best)
}

fn per_index_approx(f: &StepFunction, finite: &[(u64, f64)]) -> Result<Vec<f64>> {
    let sums = PartialSums::new(f);
    let mut best = vec![0.0f64; f.len()];
    for &(n, w) in finite {
        let s = sums.partial_sum(n)?;
        for (b, v) in best.iter_mut().zip(s.values()) {
            *b = b.max(v.to_f64().abs() / w);
        }
    }
    Ok(best)
}

/// `sup_t t · μ{x ∉ I : S̃a(x) >= t}` for an atom supported on the coset `I`,
/// with the maximal operator of `family` over every index.
pub fn weak_type_statistic(atom: &Atom, family: &WeightFamily) -> Result<Real> {
    let report = validate_atom(atom);
    if !report.is_valid() {
        return Err(Error::InvalidAtom(report.diagnostics().join("; ")));
    }
    let resolution = atom.values.resolution();
    if atom.depth() >= resolution {
        return Err(Error::InvalidAtom(
            "support depth must be below the resolution (a mean-zero function on one coset vanishes)".into(),
        ));
    }
    if *family == WeightFamily::Variation {
        return Ok(variation_statistic(atom));
    }
    let maximal = weighted_maximal(&atom.values, family, &IndexSet::All)?;
    Ok(maximal.weak_l1(Some(&atom.support.complement())))
}

/// Per support depth `M`: on each depth-`M` coset, the largest `|D_r|` over
/// `1 <= r < 2^M` grouped by the block count of `r` and its top bit.
struct KernelShellTable {
    width: usize,
    maxima: Vec<u64>,
}

fn key(blocks: u32, top: u64) -> usize {
    2 * blocks as usize + top as usize
}

impl KernelShellTable {
    fn build(depth: u32) -> Self {
        let width = key(depth / 2 + 1, 1) + 1;
        let cosets = 1usize << depth;
        let mut maxima = vec![0u64; cosets * width];
        let mut acc = DirichletAccumulator::new(depth).expect("depth below the resolution limit");
        for r in 1..(1u64 << depth) {
            acc.advance();
            let slot = key(block_count(r), (r >> (depth - 1)) & 1);
            for (u, v) in acc.values().iter().enumerate() {
                let cell = &mut maxima[u * width + slot];
                *cell = (*cell).max(v.unsigned_abs());
            }
        }
        KernelShellTable { width, maxima }
    }

    fn cached(depth: u32) -> Arc<KernelShellTable> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<KernelShellTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().expect("cache lock").get(&depth) {
            return t.clone();
        }
        let table = Arc::new(KernelShellTable::build(depth));
        cache
            .lock()
            .expect("cache lock")
            .insert(depth, table.clone());
        table
    }
}

/// Closed form for the variation family. Outside `I_M`, with `n = 2^M q + r`
/// and `0 <= r < 2^M`:
/// `|S_n a(x)| = |â(2^M q)| · |D_r(x)|`, and
/// `V(n) = 2 (B(q) + B(r) - [q odd and r has bit M-1])`.
/// So the maximal function is constant on depth-`M` cosets and is a max over
/// a few (block count, boundary bit) groups on each side.
fn variation_statistic(atom: &Atom) -> Real {
    let resolution = atom.values.resolution();
    let depth = atom.depth();
    if depth == 0 {
        return Real::zero();
    }
    let width = resolution - depth;
    let at_origin = atom
        .values
        .translate((atom.support.anchor as usize) << width);
    let local = StepFunction::new(width, at_origin.values()[..1 << width].to_vec())
        .expect("length 2^{N-M}");
    let spectrum = wht(&local);
    let coeffs = spectrum.coefficients();
    let exp = coeffs.iter().map(|c| c.exponent()).max().unwrap_or(0);

    // Largest |ĝ(q)| (scaled by 2^exp) per (B(q), q odd).
    let mut groups: BTreeMap<(u32, u64), BigInt> = BTreeMap::new();
    for (q, c) in coeffs.iter().enumerate().skip(1) {
        if c.is_zero() {
            continue;
        }
        let m = c.scaled_numerator(exp).abs();
        let entry = groups
            .entry((block_count(q as u64), q as u64 & 1))
            .or_default();
        if m > *entry {
            *entry = m;
        }
    }
    let kernel = KernelShellTable::cached(depth);
    let groups: Vec<(u32, u64, BigInt)> = groups.into_iter().map(|((b, o), m)| (b, o, m)).collect();
    let needed = groups.iter().map(|g| g.2.bits()).max().unwrap_or(0) + 2 * depth as u64 + 16;
    // Per coset: value = num / (den · 2^{exp + M}), with den = 2 · merged block count.
    let (nums, dens): (Vec<BigInt>, Vec<u64>) = if fits_i128(needed, 0) {
        let small: Vec<(u32, u64, i128)> = groups
            .iter()
            .map(|(b, o, m)| (*b, *o, i128::from_big(m)))
            .collect();
        coset_values(&small, &kernel, depth)
            .into_iter()
            .map(|(n, d)| (n.to_big(), d))
            .unzip()
    } else {
        coset_values(&groups, &kernel, depth).into_iter().unzip()
    };
    let values: Vec<BigRational> = nums
        .into_iter()
        .zip(dens)
        .map(|(n, d)| BigRational::new(n, BigInt::from(d)))
        .collect();
    let best = upper_level_counts(values.into_iter().filter(|v| !v.is_zero()).collect())
        .into_iter()
        .map(|(t, count)| t * BigRational::from_integer(count.into()))
        .max()
        .unwrap_or_default();
    Real::Exact(best / BigRational::from_integer(BigInt::one() << (exp + 2 * depth)))
}

fn coset_values<T: Lane>(
    groups: &[(u32, u64, T)],
    kernel: &KernelShellTable,
    depth: u32,
) -> Vec<(T, u64)> {
    (1usize..1 << depth)
        .map(|u| {
            let row = &kernel.maxima[u * kernel.width..(u + 1) * kernel.width];
            let mut best = T::zero();
            let mut best_den = 1u64;
            for (slot, &d) in row.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                let (b2, top) = ((slot / 2) as u32, (slot % 2) as u64);
                for (b1, odd, m) in groups {
                    let den = 2 * (b1 + b2 - (odd & top) as u32) as u64;
                    let num = m.clone() * T::from(d as i64);
                    if num.clone() * T::from(best_den as i64) > best.clone() * T::from(den as i64) {
                        best = num;
                        best_den = den;
                    }
                }
            }
            (best, best_den)
        })
        .collect()
}
