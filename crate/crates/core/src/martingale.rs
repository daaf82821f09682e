//! Dyadic martingales `F_m = S_{2^m} f`, the maximal function `F*`, Hardy
//! norms `‖F‖_{H_p} = ‖F*‖_p`, and `p`-atoms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{haar_integral, lp_norm, CosetSelector, NormValue, StepFunction};
use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::exponent::Exponent;

/// Fractional bits kept when an atom height `2^{M/p}` is irrational.
const HEIGHT_BITS: u32 = 32;
/// Fractional bits of the rescaling factor applied after mean correction.
const RESCALE_BITS: u32 = 20;

/// The martingale generated by a `ζ_N`-measurable terminal function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Martingale {
    terminal: StepFunction,
    /// `levels[m] = E(f | ζ_m)` at resolution `m`.
    levels: Vec<StepFunction>,
}

impl Martingale {
    pub fn from_terminal(f: StepFunction) -> Self {
        let n = f.resolution();
        let mut levels = Vec::with_capacity(n as usize + 1);
        levels.push(f.clone());
        for m in (0..n).rev() {
            let next = levels
                .last()
                .expect("nonempty")
                .block_average(m)
                .expect("m < N");
            levels.push(next);
        }
        levels.reverse();
        Martingale {
            terminal: f,
            levels,
        }
    }

    pub fn resolution(&self) -> u32 {
        self.terminal.resolution()
    }

    pub fn terminal(&self) -> &StepFunction {
        &self.terminal
    }

    /// `F_m` at its own resolution `m`; for `m >= N` this is `f`.
    pub fn level(&self, m: u32) -> &StepFunction {
        &self.levels[(m as usize).min(self.levels.len() - 1)]
    }

    pub fn levels(&self) -> &[StepFunction] {
        &self.levels
    }

    /// Whether `E(F_{m+1} | ζ_m) = F_m` holds for every level.
    pub fn satisfies_tower_property(&self) -> bool {
        self.levels
            .windows(2)
            .enumerate()
            .all(|(m, pair)| pair[1].block_average(m as u32).as_ref() == Ok(&pair[0]))
    }
}

/// `F* = sup_m |F_m|` at resolution `N`.
pub fn maximal_function(martingale: &Martingale) -> StepFunction {
    let n = martingale.resolution();
    StepFunction::from_fn(n, |i| {
        martingale
            .levels
            .iter()
            .enumerate()
            .map(|(m, level)| level.values()[i >> (n - m as u32)].abs())
            .max()
            .unwrap_or_default()
    })
    .expect("resolution already validated")
}

/// `‖F‖_{H_p} = ‖F*‖_p`; exact for `p = 1`.
pub fn hp_norm(martingale: &Martingale, p: Exponent) -> NormValue {
    lp_norm(&maximal_function(martingale), p)
}

/// A candidate `p`-atom supported in the coset `support`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub p: Exponent,
    pub support: CosetSelector,
    pub values: StepFunction,
}

impl Atom {
    pub fn depth(&self) -> u32 {
        self.support.depth
    }

    /// Moves the atom by the group element whose first `N` coordinates are the
    /// index `by`; the support moves with it.
    pub fn translate(&self, by: usize) -> Result<Atom> {
        let n = self.values.resolution();
        let shift = (by >> (n - self.support.depth)) as u64;
        Ok(Atom {
            p: self.p,
            support: CosetSelector::coset(self.support.depth, self.support.anchor ^ shift)?,
            values: self.values.translate(by),
        })
    }
}

/// Outcome of checking the three atom conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomReport {
    pub support_ok: bool,
    pub mean_zero: bool,
    pub size_ok: bool,
    pub mean: DyadicRational,
    pub sup: DyadicRational,
}

impl AtomReport {
    pub fn is_valid(&self) -> bool {
        self.support_ok && self.mean_zero && self.size_ok
    }

    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.support_ok {
            out.push("support: nonzero values outside the declared coset".to_string());
        }
        if !self.mean_zero {
            out.push(format!(
                "mean: integral over the coset is {} (must be 0)",
                self.mean
            ));
        }
        if !self.size_ok {
            out.push(format!("size: sup |a| = {} exceeds mu(I)^(-1/p)", self.sup));
        }
        out
    }
}

/// Exact test of `|x| <= 2^{m/p}` for `p = r/q`: `|x|^r <= 2^{mq}`.
fn within_height(x: &DyadicRational, depth: u32, p: Exponent) -> bool {
    let (r, q) = (p.numer(), p.denom());
    let lhs = num_traits::pow(x.numerator().magnitude().clone(), r as usize);
    let rhs_exp = depth as u64 * q + x.exponent() as u64 * r;
    lhs <= (num_bigint::BigUint::one() << rhs_exp)
}

pub fn validate_atom(atom: &Atom) -> AtomReport {
    let n = atom.values.resolution();
    let depth = atom.support.depth;
    let support_ok = !atom.support.complement
        && depth <= n
        && atom
            .values
            .values()
            .iter()
            .enumerate()
            .all(|(i, v)| v.is_zero() || atom.support.contains(i, n));
    let mean = haar_integral(&atom.values);
    let sup = atom.values.sup_norm();
    AtomReport {
        support_ok,
        mean_zero: mean.is_zero(),
        size_ok: within_height(&sup, depth, atom.p),
        mean,
        sup,
    }
}

/// Largest dyadic number with `HEIGHT_BITS` fractional bits not above `2^{M/p}`;
/// exact whenever `M/p` is an integer.
pub fn atom_height(depth: u32, p: Exponent) -> DyadicRational {
    let (r, q) = (p.numer(), p.denom());
    let total = depth as u64 * q;
    if total % r == 0 {
        return DyadicRational::pow2((total / r) as i64);
    }
    let scaled = (BigInt::one() << (total + HEIGHT_BITS as u64 * r)).nth_root(r as u32);
    DyadicRational::new(scaled, HEIGHT_BITS)
}

fn floor_dyadic(x: &BigRational, bits: u32) -> DyadicRational {
    let scaled = (x * BigRational::from_integer(BigInt::one() << bits)).floor();
    DyadicRational::new(scaled.to_integer(), bits)
}

/// A seeded random `p`-atom on `I_M` at resolution `N`: signs `±2^{M/p}` on
/// each depth-`N` coset of `I_M`, minus their average, then scaled down by the
/// largest `2^-20`-grid factor that restores the height bound.
pub fn random_atom(seed: u64, p: Exponent, depth: u32, resolution: u32) -> Result<Atom> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_atom_with(&mut rng, p, depth, resolution)
}

pub(crate) fn random_atom_with<R: Rng>(
    rng: &mut R,
    p: Exponent,
    depth: u32,
    resolution: u32,
) -> Result<Atom> {
    if depth >= resolution {
        return Err(Error::ResolutionTooSmall {
            what: "random atom (support depth M must be below N)",
            needed: depth + 1,
            got: resolution,
        });
    }
    let support = CosetSelector::origin(depth)?;
    let count = 1usize << (resolution - depth);
    let mut signs: Vec<bool> = (0..count).map(|_| rng.random()).collect();
    if signs.iter().all(|&s| s == signs[0]) {
        for s in &mut signs[count / 2..] {
            *s = !*s;
        }
    }
    let height = atom_height(depth, p);
    let raised: Vec<DyadicRational> = signs
        .iter()
        .map(|&s| if s { height.clone() } else { -&height })
        .collect();
    let mean = raised
        .iter()
        .sum::<DyadicRational>()
        .mul_pow2(-((resolution - depth) as i64));
    let centred: Vec<DyadicRational> = raised.iter().map(|v| v - &mean).collect();
    let spread = centred
        .iter()
        .map(DyadicRational::abs)
        .max()
        .unwrap_or_default();
    let factor = if spread.is_zero() {
        DyadicRational::one()
    } else {
        floor_dyadic(&(height.to_rational() / spread.to_rational()), RESCALE_BITS)
            .min(DyadicRational::one())
    };
    let mut values = vec![DyadicRational::zero(); 1 << resolution];
    let range = support.index_range(resolution)?;
    for (slot, v) in values[range].iter_mut().zip(&centred) {
        *slot = v * &factor;
    }
    Ok(Atom {
        p,
        support,
        values: StepFunction::new(resolution, values)?,
    })
}

/// A finite atomic combination `Σ μ_k a_k`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AtomicCombination {
    pub terms: Vec<(DyadicRational, Atom)>,
}

impl AtomicCombination {
    /// `Σ |μ_k|^p` for `p = 1`, i.e. `Σ |μ_k|`.
    pub fn weight_l1(&self) -> DyadicRational {
        self.terms.iter().map(|(mu, _)| mu.abs()).sum()
    }
}

/// The martingale `F_n = Σ μ_k S_{2^n} a_k` at resolution `N`.
pub fn build_from_atoms(combination: &AtomicCombination, resolution: u32) -> Result<Martingale> {
    let mut terminal = StepFunction::zero(resolution)?;
    for (mu, atom) in &combination.terms {
        if atom.values.resolution() > resolution {
            return Err(Error::ResolutionTooSmall {
                what: "atomic combination",
                needed: atom.values.resolution(),
                got: resolution,
            });
        }
        terminal = terminal.add(&atom.values.scale(mu))?;
    }
    Ok(Martingale::from_terminal(terminal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walsh::{dirichlet_closed, partial_sum, walsh_function};
    use proptest::prelude::*;

    fn dy(n: i64, k: u32) -> DyadicRational {
        DyadicRational::new(n, k)
    }

    fn exact(v: NormValue) -> DyadicRational {
        v.exact().cloned().expect("p = 1 norms are exact")
    }

    fn difference_kernel(a: u32, n: u32) -> StepFunction {
        dirichlet_closed(1 << (a + 1), n)
            .unwrap()
            .sub(&dirichlet_closed(1 << a, n).unwrap())
            .unwrap()
    }

    #[test]
    fn maximal_function_examples() {
        let c = StepFunction::constant(4, dy(-3, 1)).unwrap();
        let m = Martingale::from_terminal(c);
        assert_eq!(
            maximal_function(&m),
            StepFunction::constant(4, dy(3, 1)).unwrap()
        );
        assert_eq!(exact(hp_norm(&m, Exponent::ONE)), dy(3, 1));

        for a in 1..6 {
            let f = difference_kernel(a, 7);
            let star = maximal_function(&Martingale::from_terminal(f.clone()));
            assert_eq!(star, f.abs());
            assert_eq!(
                exact(hp_norm(&Martingale::from_terminal(f), Exponent::ONE)),
                DyadicRational::one()
            );
        }

        for j in 1..16 {
            let star = maximal_function(&Martingale::from_terminal(walsh_function(j, 4).unwrap()));
            assert_eq!(
                star,
                StepFunction::constant(4, DyadicRational::one()).unwrap()
            );
        }
    }

    #[test]
    fn levels_are_lacunary_partial_sums() {
        let f =
            StepFunction::from_integers(4, &[3, -1, 4, 1, -5, 9, 2, -6, 5, 3, -5, 8, 9, -7, 9, 3])
                .unwrap();
        let m = Martingale::from_terminal(f.clone());
        for level in 0..=4u32 {
            assert_eq!(
                m.level(level).refine_to(4).unwrap(),
                partial_sum(&f, 1 << level).unwrap()
            );
        }
        assert_eq!(m.level(9), &f);
        assert!(m.satisfies_tower_property());
    }

    fn explicit_atom(depth: u32, resolution: u32) -> Atom {
        // 2^M (1_{I_{M+1}} - 1_{I_{M+1}(e_M)})
        let plus = CosetSelector::origin(depth + 1).unwrap();
        let minus = CosetSelector::coset(depth + 1, 1).unwrap();
        let height = DyadicRational::pow2(depth as i64);
        let values = StepFunction::from_fn(resolution, |i| {
            if plus.contains(i, resolution) {
                height.clone()
            } else if minus.contains(i, resolution) {
                -&height
            } else {
                DyadicRational::zero()
            }
        })
        .unwrap();
        Atom {
            p: Exponent::ONE,
            support: CosetSelector::origin(depth).unwrap(),
            values,
        }
    }

    #[test]
    fn validate_examples() {
        let good = explicit_atom(3, 6);
        assert!(validate_atom(&good).is_valid());

        let mut nonzero_mean = good.clone();
        nonzero_mean.values =
            StepFunction::indicator(&CosetSelector::origin(3).unwrap(), 6).unwrap();
        let report = validate_atom(&nonzero_mean);
        assert!(report.support_ok && report.size_ok && !report.mean_zero);
        assert_eq!(report.diagnostics().len(), 1);

        let mut too_tall = good.clone();
        too_tall.values = good.values.scale(&dy(2, 0));
        let report = validate_atom(&too_tall);
        assert!(report.mean_zero && !report.size_ok);

        let mut leaking = good.clone();
        leaking.support = CosetSelector::origin(4).unwrap();
        assert!(!validate_atom(&leaking).support_ok);

        // For p = 1/2 the height bound is 2^{2M}.
        let mut half = good.values.scale(&DyadicRational::pow2(3));
        let p = Exponent::new(1, 2).unwrap();
        assert!(validate_atom(&Atom {
            p,
            values: half.clone(),
            ..good.clone()
        })
        .is_valid());
        half = half.scale(&dy(2, 0));
        assert!(!validate_atom(&Atom {
            p,
            values: half,
            ..good.clone()
        })
        .is_valid());
    }

    #[test]
    fn single_coset_support_cannot_be_an_atom() {
        // M = N: a mean-zero function on one coset is identically zero.
        let values = StepFunction::from_fn(3, |i| {
            if i == 0 {
                dy(8, 0)
            } else {
                DyadicRational::zero()
            }
        })
        .unwrap();
        let atom = Atom {
            p: Exponent::ONE,
            support: CosetSelector::origin(3).unwrap(),
            values,
        };
        assert!(!validate_atom(&atom).is_valid());
        assert!(random_atom(0, Exponent::ONE, 3, 3).is_err());
    }

    #[test]
    fn heights() {
        assert_eq!(atom_height(3, Exponent::ONE), dy(8, 0));
        assert_eq!(atom_height(3, Exponent::new(1, 2).unwrap()), dy(64, 0));
        let h = atom_height(3, Exponent::new(2, 3).unwrap());
        // 2^{4.5}: just below 22.627416997969...
        assert!(within_height(&h, 3, Exponent::new(2, 3).unwrap()));
        assert!(!within_height(
            &(&h + &DyadicRational::pow2(-(HEIGHT_BITS as i64))),
            3,
            Exponent::new(2, 3).unwrap()
        ));
        assert!((h.to_f64() - 2f64.powf(4.5)).abs() < 1e-9);
    }

    #[test]
    fn random_atoms_are_valid_and_deterministic() {
        for seed in 0..50 {
            for (depth, resolution) in [(0, 1), (2, 5), (4, 8), (7, 8)] {
                for p in [
                    Exponent::ONE,
                    Exponent::new(1, 2).unwrap(),
                    Exponent::new(3, 4).unwrap(),
                ] {
                    let atom = random_atom(seed, p, depth, resolution).unwrap();
                    let report = validate_atom(&atom);
                    assert!(
                        report.is_valid(),
                        "seed={seed} M={depth} N={resolution}: {:?}",
                        report.diagnostics()
                    );
                    assert_eq!(report.mean, DyadicRational::zero());
                    assert!(!report.sup.is_zero());
                    assert_eq!(atom, random_atom(seed, p, depth, resolution).unwrap());
                }
            }
        }
        assert_ne!(
            random_atom(1, Exponent::ONE, 2, 8).unwrap(),
            random_atom(2, Exponent::ONE, 2, 8).unwrap()
        );
    }

    #[test]
    fn combinations() {
        let empty = build_from_atoms(&AtomicCombination::default(), 5).unwrap();
        assert_eq!(
            exact(hp_norm(&empty, Exponent::ONE)),
            DyadicRational::zero()
        );

        let atom = random_atom(7, Exponent::ONE, 2, 6).unwrap();
        let single = AtomicCombination {
            terms: vec![(DyadicRational::one(), atom.clone())],
        };
        assert!(
            exact(hp_norm(
                &build_from_atoms(&single, 6).unwrap(),
                Exponent::ONE
            )) <= DyadicRational::one()
        );

        // Disjoint supports: I_2 and I_2(e_0).
        let moved = atom.translate(unit_point_index(0, 6)).unwrap();
        assert_eq!(moved.support.anchor, 0b10);
        assert!(validate_atom(&moved).is_valid());
        let pair = AtomicCombination {
            terms: vec![
                (DyadicRational::one(), atom),
                (DyadicRational::one(), moved),
            ],
        };
        let built = build_from_atoms(&pair, 6).unwrap();
        assert!(exact(hp_norm(&built, Exponent::ONE)) <= dy(2, 0));
        assert!(built.satisfies_tower_property());
    }

    fn unit_point_index(s: u32, n: u32) -> usize {
        crate::domain::unit_point(s, n).unwrap()
    }

    proptest! {
        #[test]
        fn atomic_upper_bound(seed in any::<u64>(), weights in proptest::collection::vec((-64i64..64, 0u32..4), 1..5), anchors in proptest::collection::vec(any::<u64>(), 5)) {
            let resolution = 6;
            let mut terms = Vec::new();
            for (k, (num, exp)) in weights.iter().enumerate() {
                let depth = (k as u32 % 4) + 1;
                let atom = random_atom(seed.wrapping_add(k as u64), Exponent::ONE, depth, resolution).unwrap();
                let atom = atom.translate((anchors[k] as usize) & ((1 << resolution) - 1)).unwrap();
                terms.push((DyadicRational::new(*num, *exp), atom));
            }
            let combination = AtomicCombination { terms };
            let built = build_from_atoms(&combination, resolution).unwrap();
            prop_assert!(built.satisfies_tower_property());
            prop_assert!(exact(hp_norm(&built, Exponent::ONE)) <= combination.weight_l1());
        }

        #[test]
        fn hp_norm_is_refinement_invariant(values in proptest::collection::vec(-20i64..20, 16), extra in 1u32..3) {
            let f = StepFunction::from_integers(4, &values).unwrap();
            let coarse = hp_norm(&Martingale::from_terminal(f.clone()), Exponent::ONE);
            let fine = hp_norm(&Martingale::from_terminal(f.refine(extra).unwrap()), Exponent::ONE);
            prop_assert_eq!(coarse, fine);
        }
    }
}
