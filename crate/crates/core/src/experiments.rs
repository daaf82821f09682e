//! Experiment drivers: the difference-kernel counterexample and its blow-up,
//! the weak-type sweep over random atoms, the Lebesgue-constant and
//! partial-sum norm sweeps, and the boundary-set explorer.
//!
//! Randomness is split per task: task `t` of a sweep seeded with `s` draws
//! from ChaCha8 seeded with `s` on stream `t`, so results do not depend on
//! scheduling. Rows are emitted in parameter order.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::{CosetSelector, StepFunction};
use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::index::{high_bit, variation};
use crate::martingale::{hp_norm, random_atom_with, Martingale};
use crate::maximal::{weak_type_statistic, weighted_maximal, IndexSet, WeightFamily, WindowFamily};
use crate::report::{Cell, ColumnKind, ExperimentReport};
use crate::value::Real;
use crate::walsh::{coordinates, lebesgue_constant, scaled_spectrum, walsh_sign, Scaled};
use crate::MAX_RESOLUTION;

/// Smallest admissible counterexample order.
pub const MIN_ORDER: u32 = 3;
/// Largest resolution for full-mode blow-up.
pub const FULL_MODE_LIMIT: u32 = 15;
/// Above this resolution, automatic mode falls back to the witness indices.
pub const AUTO_FULL_LIMIT: u32 = 13;
/// Random Lebesgue samples have `|n| <= 20`.
pub const SAMPLE_INDEX_BITS: u32 = 21;
/// Largest magnitude of the integer values of random test functions.
pub const TEST_FUNCTION_BOUND: i64 = 16;

pub(crate) fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn param(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn exact(value: BigRational) -> Cell {
    Cell::Value(Real::Exact(value))
}

/// `D_{2^{k+1}} - D_{2^k}`: `2^k` on `I_{k+1}`, `-2^k` on `I_k \ I_{k+1}`.
pub fn counterexample(order: u32, resolution: u32) -> Result<StepFunction> {
    if order < MIN_ORDER {
        return Err(Error::CounterexampleOrder(order));
    }
    if order + 1 > resolution {
        return Err(Error::ResolutionTooSmall {
            what: "counterexample",
            needed: order + 1,
            got: resolution,
        });
    }
    let height = DyadicRational::pow2(order as i64);
    let plus = CosetSelector::origin(order + 1)?;
    let shell = CosetSelector::shell(order)?;
    StepFunction::from_fn(resolution, |i| {
        if plus.contains(i, resolution) {
            height.clone()
        } else if shell.contains(i, resolution) {
            -&height
        } else {
            DyadicRational::zero()
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlowupMode {
    /// Every index `n >= 1`.
    Full,
    /// Only `n = 2^k + 2^s`, `0 <= s < k`.
    Witness,
    /// Full up to resolution 13, witness beyond.
    Auto,
}

impl BlowupMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BlowupMode::Full => "full",
            BlowupMode::Witness => "witness",
            BlowupMode::Auto => "auto",
        }
    }
}

impl std::str::FromStr for BlowupMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(BlowupMode::Full),
            "witness" => Ok(BlowupMode::Witness),
            "auto" => Ok(BlowupMode::Auto),
            _ => Err(format!(
                "unknown mode {s:?} (expected full, witness or auto)"
            )),
        }
    }
}

/// `2^k + 2^s` for `0 <= s < k`.
pub fn witness_indices(order: u32) -> Vec<u64> {
    (0..order).map(|s| (1u64 << order) + (1u64 << s)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Blowup {
    pub order: u32,
    pub resolution: u32,
    /// The mode actually used (never `Auto`).
    pub mode: BlowupMode,
    /// `‖sup_n |S_n f| / V(n)‖_1`.
    pub maximal_norm: BigRational,
    pub hardy_norm: DyadicRational,
    pub ratio: BigRational,
}

/// `‖S̃ f‖_1 / ‖f‖_{H_1}` for the order-`k` counterexample, with the
/// variation-weighted maximal operator.
pub fn blowup_ratio(order: u32, mode: BlowupMode, resolution: u32) -> Result<Blowup> {
    let f = counterexample(order, resolution)?;
    let mode = match mode {
        BlowupMode::Auto if resolution > AUTO_FULL_LIMIT => BlowupMode::Witness,
        BlowupMode::Auto => BlowupMode::Full,
        m => m,
    };
    let idx = match mode {
        BlowupMode::Full => {
            if resolution > FULL_MODE_LIMIT {
                return Err(Error::TooCostly {
                    what: "full-mode blow-up",
                    resolution,
                    limit: FULL_MODE_LIMIT,
                });
            }
            IndexSet::All
        }
        _ => IndexSet::explicit(witness_indices(order))?,
    };
    let maximal = weighted_maximal(&f, &WeightFamily::Variation, &idx)?;
    let maximal_norm = maximal
        .integral()
        .exact()
        .cloned()
        .expect("variation weights are exact");
    let hardy_norm = hp_norm(&Martingale::from_terminal(f), Exponent::ONE)
        .exact()
        .cloned()
        .expect("p = 1 norms are exact");
    let ratio = &maximal_norm / hardy_norm.to_rational();
    Ok(Blowup {
        order,
        resolution,
        mode,
        maximal_norm,
        hardy_norm,
        ratio,
    })
}

/// Largest weak-type statistic over the atoms of one support depth.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMaximum {
    pub depth: u32,
    pub atoms: u64,
    pub max: Real,
    /// Task number of the atom attaining the maximum.
    pub worst: u64,
}

fn atom_stream(depth: u32, j: u64) -> u64 {
    ((depth as u64) << 40) | j
}

/// For each depth `M`, `count` seeded random 1-atoms on `I_M` at resolution
/// `N`, evaluated with the variation-weighted maximal operator.
pub fn weak_type_maxima(
    count: u64,
    depths: &[u32],
    resolution: u32,
    seed: u64,
) -> Result<Vec<DepthMaximum>> {
    for &m in depths {
        if m >= resolution {
            return Err(Error::ResolutionTooSmall {
                what: "weak-type sweep (every M must be below N)",
                needed: m + 1,
                got: resolution,
            });
        }
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    depths
        .iter()
        .map(|&depth| {
            let stats: Vec<Real> = (0..count)
                .into_par_iter()
                .map(|j| {
                    let mut rng = task_rng(seed, atom_stream(depth, j));
                    let atom = random_atom_with(&mut rng, Exponent::ONE, depth, resolution)?;
                    weak_type_statistic(&atom, &WeightFamily::Variation)
                })
                .collect::<Result<_>>()?;
            let (worst, max) = stats
                .into_iter()
                .enumerate()
                .reduce(|a, b| if b.1.compare(&a.1).is_gt() { b } else { a })
                .expect("count > 0");
            Ok(DepthMaximum {
                depth,
                atoms: count,
                max,
                worst: worst as u64,
            })
        })
        .collect()
}

pub fn weak_type_sweep(
    count: u64,
    depths: &[u32],
    resolution: u32,
    seed: u64,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let maxima = weak_type_maxima(count, depths, resolution, seed)?;
    let depth_list = depths
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(" ");
    let mut report = ExperimentReport::new(
        "weaktype-sweep",
        seed,
        vec![
            param("N", resolution),
            param("count", count),
            param("M_values", depth_list),
        ],
        &[
            ("M", ColumnKind::Plain),
            ("atoms", ColumnKind::Plain),
            ("max_statistic", ColumnKind::Value),
            ("worst_atom", ColumnKind::Plain),
        ],
    );
    for d in &maxima {
        report.push_row(vec![
            Cell::text(d.depth),
            Cell::text(d.atoms),
            d.max.clone().into(),
            Cell::text(d.worst),
        ]);
    }
    if let Some(global) = maxima.iter().max_by(|a, b| a.max.compare(&b.max)) {
        report.push_row(vec![
            Cell::text("all"),
            Cell::text(count * maxima.len() as u64),
            global.max.clone().into(),
            Cell::text(format!("M={}:{}", global.depth, global.worst)),
        ]);
        report.note("global_max", &global.max);
    }
    report.runtime = start.elapsed();
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LebesgueRow {
    pub sampled: bool,
    pub n: u64,
    pub variation: u32,
    pub norm: DyadicRational,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

fn lebesgue_row(n: u64, sampled: bool) -> Result<LebesgueRow> {
    let norm = lebesgue_constant(n)?;
    let v = variation(n);
    Ok(LebesgueRow {
        sampled,
        n,
        variation: v,
        lower_ok: DyadicRational::new(v, 3) <= norm,
        upper_ok: norm <= DyadicRational::from(v as i64),
        norm,
    })
}

/// `V(n)/8 <= ‖D_n‖_1 <= V(n)` for every `n <= n_max` and `samples` seeded
/// draws with `|n| <= 20`.
pub fn lebesgue_rows(n_max: u64, samples: u64, seed: u64) -> Result<Vec<LebesgueRow>> {
    if n_max >= 1 << SAMPLE_INDEX_BITS {
        return Err(Error::TooCostly {
            what: "exhaustive Lebesgue sweep",
            resolution: high_bit(n_max) + 1,
            limit: SAMPLE_INDEX_BITS,
        });
    }
    let mut rows: Vec<LebesgueRow> = (1..=n_max)
        .into_par_iter()
        .map(|n| lebesgue_row(n, false))
        .collect::<Result<_>>()?;
    let sampled: Vec<LebesgueRow> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let n = task_rng(seed, j).random_range(1..1u64 << SAMPLE_INDEX_BITS);
            lebesgue_row(n, true)
        })
        .collect::<Result<_>>()?;
    rows.extend(sampled);
    Ok(rows)
}

pub fn lebesgue_sweep(n_max: u64, samples: u64, seed: u64) -> Result<ExperimentReport> {
    let start = Instant::now();
    let rows = lebesgue_rows(n_max, samples, seed)?;
    let mut report = ExperimentReport::new(
        "lebesgue-sweep",
        seed,
        vec![param("n_max", n_max), param("samples", samples)],
        &[
            ("source", ColumnKind::Plain),
            ("n", ColumnKind::Plain),
            ("V", ColumnKind::Plain),
            ("lebesgue_constant", ColumnKind::Value),
            ("lower_bound_ok", ColumnKind::Plain),
            ("upper_bound_ok", ColumnKind::Plain),
        ],
    );
    let mut violations = 0;
    for r in &rows {
        violations += usize::from(!r.lower_ok) + usize::from(!r.upper_ok);
        report.push_row(vec![
            Cell::text(if r.sampled { "sample" } else { "exhaustive" }),
            Cell::text(r.n),
            Cell::text(r.variation),
            Real::from(r.norm.clone()).into(),
            Cell::text(r.lower_ok),
            Cell::text(r.upper_ok),
        ]);
    }
    report.note("checked", rows.len());
    report.note("violations", violations);
    report.runtime = start.elapsed();
    Ok(report)
}

/// A seeded step function with integer values in `[-16, 16]`, not identically zero.
pub fn random_test_function(rng: &mut impl Rng, resolution: u32) -> Result<StepFunction> {
    let mut values: Vec<i64> = (0..1usize << resolution)
        .map(|_| rng.random_range(-TEST_FUNCTION_BOUND..=TEST_FUNCTION_BOUND))
        .collect();
    if values.iter().all(|&v| v == 0) {
        values[0] = 1;
    }
    StepFunction::from_integers(resolution, &values)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormRatio {
    pub n: u64,
    pub variation: u32,
    /// `max_F ‖S_n F‖_1 / (V(n) ‖F‖_1)`.
    pub max_ratio: BigRational,
    pub worst_trial: u64,
}

/// `‖S_n F‖_1 / (V(n)‖F‖_1)` for all `n <= n_max`, as `(numerator, denominator)`.
fn trial_ratios(f: &StepFunction, n_max: u64) -> Vec<(u128, u128)> {
    let resolution = f.resolution();
    // 2^R f̂(k) is an integer for integer-valued f.
    let coeffs: Vec<i64> = match scaled_spectrum(f, 0) {
        Scaled::Small { ints, .. } => ints.iter().map(|&c| c as i64).collect(),
        Scaled::Big { .. } => unreachable!("small integer values"),
    };
    let f_mass: u128 = f
        .values()
        .iter()
        .map(|v| {
            v.numerator()
                .magnitude()
                .to_u128()
                .expect("small integer values")
        })
        .sum();
    let coords: Vec<u64> = (0..f.len()).map(|i| coordinates(i, resolution)).collect();
    let mut partial = vec![0i64; f.len()];
    let mut out = Vec::with_capacity(n_max as usize);
    for k in 0..n_max {
        let c = coeffs[k as usize];
        let mut mass: u128 = 0;
        for (s, &x) in partial.iter_mut().zip(&coords) {
            *s += c * walsh_sign(k, x);
            mass += s.unsigned_abs() as u128;
        }
        let n = k + 1;
        out.push((mass, (1u128 << resolution) * variation(n) as u128 * f_mass));
    }
    out
}

pub fn partial_sum_norm_ratios(n_max: u64, trials: u64, seed: u64) -> Result<Vec<NormRatio>> {
    if n_max == 0 {
        return Err(Error::ZeroIndex);
    }
    let resolution = high_bit(n_max) + 1;
    if resolution > 16 {
        return Err(Error::TooCostly {
            what: "partial-sum norm sweep",
            resolution,
            limit: 16,
        });
    }
    let per_trial: Vec<Vec<(u128, u128)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let f = random_test_function(&mut task_rng(seed, t), resolution)?;
            Ok(trial_ratios(&f, n_max))
        })
        .collect::<Result<_>>()?;
    Ok((0..n_max as usize)
        .map(|k| {
            let mut best = (0u128, 1u128);
            let mut worst_trial = 0;
            for (t, ratios) in per_trial.iter().enumerate() {
                let (a, b) = ratios[k];
                if a * best.1 > best.0 * b {
                    best = (a, b);
                    worst_trial = t as u64;
                }
            }
            let n = k as u64 + 1;
            NormRatio {
                n,
                variation: variation(n),
                max_ratio: BigRational::new(BigInt::from(best.0), BigInt::from(best.1)),
                worst_trial,
            }
        })
        .collect())
}

/// Largest ratio among `n <= limit`.
pub fn empirical_constant(rows: &[NormRatio], limit: u64) -> BigRational {
    rows.iter()
        .filter(|r| r.n <= limit)
        .map(|r| r.max_ratio.clone())
        .max()
        .unwrap_or_else(BigRational::zero)
}

pub fn partial_sum_norm_sweep(n_max: u64, trials: u64, seed: u64) -> Result<ExperimentReport> {
    let start = Instant::now();
    let rows = partial_sum_norm_ratios(n_max, trials, seed)?;
    let mut report = ExperimentReport::new(
        "snorm-sweep",
        seed,
        vec![
            param("n_max", n_max),
            param("trials", trials),
            param("N", high_bit(n_max) + 1),
        ],
        &[
            ("n", ColumnKind::Plain),
            ("V", ColumnKind::Plain),
            ("max_ratio", ColumnKind::Value),
            ("worst_trial", ColumnKind::Plain),
        ],
    );
    if trials > 0 {
        for r in &rows {
            report.push_row(vec![
                Cell::text(r.n),
                Cell::text(r.variation),
                exact(r.max_ratio.clone()),
                Cell::text(r.worst_trial),
            ]);
        }
        report.note(
            "empirical_constant",
            Real::Exact(empirical_constant(&rows, n_max)).to_f64(),
        );
    }
    report.runtime = start.elapsed();
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// `{2^s}`.
    Powers,
    /// `{2^{s+1} - 1}`.
    AllOnes,
    /// `{2^s + 2^{s-2} + ...}`.
    Alternating,
    /// Up to three seeded draws per window.
    Random,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] = [
        FamilyKind::Powers,
        FamilyKind::AllOnes,
        FamilyKind::Alternating,
        FamilyKind::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::Powers => "powers",
            FamilyKind::AllOnes => "ones",
            FamilyKind::Alternating => "alternating",
            FamilyKind::Random => "random",
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!("unknown family {s:?} (expected powers, ones, alternating or random)")
            })
    }
}

/// Windows `s = 0, ..., N` of the chosen kind.
pub fn builtin_family(kind: FamilyKind, resolution: u32, seed: u64) -> Result<WindowFamily> {
    let windows = (0..=resolution).map(|s| {
        let top = 1u64 << s;
        let members = match kind {
            FamilyKind::Powers => vec![top],
            FamilyKind::AllOnes => vec![(top << 1) - 1],
            FamilyKind::Alternating => vec![(0..=s).rev().step_by(2).map(|b| 1u64 << b).sum()],
            FamilyKind::Random => {
                let mut rng = task_rng(seed, s as u64);
                let draws = rng.random_range(1..=3);
                (0..draws).map(|_| top + rng.random_range(0..top)).collect()
            }
        };
        (s, members)
    });
    WindowFamily::new(windows)
}

/// `‖sup_n |S_n f| / |A_{|n|}|‖_1 / ‖f‖_{H_1}` over each family, for the
/// counterexamples that fit and for seeded random functions. Reports data
/// only.
pub fn conjecture_explorer(
    kinds: &[FamilyKind],
    resolution: u32,
    random_functions: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    if resolution == 0 || resolution > 16 {
        return Err(Error::TooCostly {
            what: "boundary-set explorer",
            resolution,
            limit: 16,
        });
    }
    let mut functions: Vec<(String, StepFunction)> = Vec::new();
    for order in MIN_ORDER..resolution {
        functions.push((
            format!("counterexample_{order}"),
            counterexample(order, resolution)?,
        ));
    }
    for t in 0..random_functions {
        let mut rng = task_rng(seed, (1 << 32) | t);
        functions.push((
            format!("random_{t}"),
            random_test_function(&mut rng, resolution)?,
        ));
    }
    let mut report = ExperimentReport::new(
        "conjecture",
        seed,
        vec![
            param("N", resolution),
            param("random_functions", random_functions),
        ],
        &[
            ("exploratory_family", ColumnKind::Plain),
            ("exploratory_function", ColumnKind::Plain),
            ("exploratory_boundary_cardinalities", ColumnKind::Plain),
            ("exploratory_max_boundary_cardinality", ColumnKind::Plain),
            ("exploratory_ratio", ColumnKind::Value),
        ],
    );
    for &kind in kinds {
        let family = builtin_family(kind, resolution, seed)?;
        let cards: Vec<String> = family
            .windows()
            .map(|w| format!("{}:{}", w.profile.s, w.boundary_cardinality))
            .collect();
        let max_card = family
            .windows()
            .map(|w| w.boundary_cardinality)
            .max()
            .unwrap_or(0);
        let weights = WeightFamily::BoundaryCard {
            windows: family.clone(),
        };
        let idx = IndexSet::Windows(family);
        let ratios: Vec<BigRational> = functions
            .par_iter()
            .map(|(_, f)| {
                let m = weighted_maximal(f, &weights, &idx)?;
                let top = m
                    .integral()
                    .exact()
                    .cloned()
                    .expect("cardinality weights are exact");
                let h = hp_norm(&Martingale::from_terminal(f.clone()), Exponent::ONE)
                    .exact()
                    .cloned()
                    .expect("p = 1");
                Ok(if h.is_zero() {
                    BigRational::zero()
                } else {
                    top / h.to_rational()
                })
            })
            .collect::<Result<_>>()?;
        for ((name, _), ratio) in functions.iter().zip(ratios) {
            report.push_row(vec![
                Cell::text(kind.as_str()),
                Cell::text(name),
                Cell::text(cards.join(" ")),
                Cell::text(max_card),
                exact(ratio),
            ]);
        }
    }
    report.note("families", kinds.len());
    report.note("functions", functions.len());
    report.runtime = start.elapsed();
    Ok(report)
}

/// Checks a resolution argument against the global limit.
pub fn check_resolution_arg(resolution: u32) -> Result<()> {
    if resolution > MAX_RESOLUTION {
        return Err(Error::ResolutionTooLarge(resolution));
    }
    Ok(())
}
