//! Exact Walsh–Fourier analysis on the dyadic group.
//!
//! Step functions of finite resolution carry exact dyadic-rational values,
//! so Haar integrals, `L_1` norms, martingale Hardy norms and the weighted
//! maximal operators of partial sums are all computed without rounding.

pub mod domain;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod exponent;
pub mod fixture;
pub mod index;
mod lane;
pub mod martingale;
pub mod maximal;
pub mod report;
pub mod value;
pub mod walsh;

pub use domain::{
    haar_integral, lp_norm, shell_decompose, unit_point, weak_lp, CosetSelector, NormValue,
    StepFunction,
};
pub use dyadic::DyadicRational;
pub use error::{Error, Result};
pub use exponent::Exponent;
pub use martingale::{
    build_from_atoms, hp_norm, maximal_function, random_atom, validate_atom, Atom, AtomReport,
    AtomicCombination, Martingale,
};
pub use maximal::{
    weak_type_statistic, weighted_maximal, IndexSet, MaximalFunction, Weight, WeightFamily,
    WindowFamily,
};
pub use report::{Cell, ColumnKind, ExperimentReport};
pub use value::Real;

/// Largest supported resolution `N` (functions carry `2^N` values).
pub const MAX_RESOLUTION: u32 = 30;
