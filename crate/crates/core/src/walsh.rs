//! Walsh functions in Paley order, the exact fast Walsh–Hadamard transform,
//! partial sums of Walsh–Fourier series and Dirichlet kernels.
//!
//! `w_n(x) = (-1)^{Σ n_k x_k}`. With coset indices storing `x_0` as the most
//! significant bit, `w_n` at index `i` is the parity of `n & reverse(i)`.

use num_bigint::BigInt;

use crate::domain::{check_resolution, StepFunction};
use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::index::high_bit;
use crate::lane::{fits_i128, fwht, max_bits, reverse_bits, Lane};

/// Coordinates `x_0..x_{N-1}` of coset `index`, packed with `x_k` at bit `k`.
#[inline]
pub fn coordinates(index: usize, resolution: u32) -> u64 {
    reverse_bits(index, resolution) as u64
}

/// `w_n` at coset `index`, as `+1` or `-1`, without range checks.
#[inline]
pub(crate) fn walsh_sign(n: u64, coords: u64) -> i64 {
    1 - 2 * ((n & coords).count_ones() & 1) as i64
}

fn check_degree(n: u64, resolution: u32) -> Result<()> {
    check_resolution(resolution)?;
    if n >> resolution != 0 {
        return Err(Error::ResolutionTooSmall {
            what: "Walsh function",
            needed: high_bit(n) + 1,
            got: resolution,
        });
    }
    Ok(())
}

pub fn walsh_eval(n: u64, index: usize, resolution: u32) -> Result<i8> {
    check_degree(n, resolution)?;
    Ok(walsh_sign(n, coordinates(index, resolution)) as i8)
}

pub fn walsh_function(n: u64, resolution: u32) -> Result<StepFunction> {
    check_degree(n, resolution)?;
    StepFunction::from_fn(resolution, |i| {
        DyadicRational::from(walsh_sign(n, coordinates(i, resolution)))
    })
}

/// Walsh–Fourier coefficients `f̂(0..2^N)` of a `ζ_N`-measurable function.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Spectrum {
    resolution: u32,
    coefficients: Vec<DyadicRational>,
}

impl Spectrum {
    pub fn new(resolution: u32, coefficients: Vec<DyadicRational>) -> Result<Self> {
        check_resolution(resolution)?;
        if coefficients.len() != 1usize << resolution {
            return Err(Error::LengthMismatch {
                resolution,
                got: coefficients.len(),
            });
        }
        Ok(Spectrum {
            resolution,
            coefficients,
        })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn coefficients(&self) -> &[DyadicRational] {
        &self.coefficients
    }

    /// `f̂(k)`; zero beyond `2^N`.
    pub fn coefficient(&self, k: u64) -> DyadicRational {
        usize::try_from(k)
            .ok()
            .and_then(|k| self.coefficients.get(k).cloned())
            .unwrap_or_default()
    }

    /// `Σ f̂(k)^2`.
    pub fn energy(&self) -> DyadicRational {
        self.coefficients.iter().map(|c| c * c).sum()
    }
}

/// Integer numerators `m` with values `m / 2^exp`, on a chosen lane.
pub(crate) enum Scaled {
    Small { exp: u32, ints: Vec<i128> },
    Big { exp: u32, ints: Vec<BigInt> },
}

impl Scaled {
    /// Lowers `ints / 2^exp`, reserving `growth` bits of headroom.
    pub(crate) fn lower(exp: u32, ints: Vec<BigInt>, growth: u64) -> Self {
        if fits_i128(max_bits(&ints), growth) {
            Scaled::Small {
                exp,
                ints: ints.iter().map(i128::from_big).collect(),
            }
        } else {
            Scaled::Big { exp, ints }
        }
    }

    pub(crate) fn to_dyadic(&self) -> Vec<DyadicRational> {
        fn go<T: Lane>(exp: u32, ints: &[T]) -> Vec<DyadicRational> {
            ints.iter()
                .map(|m| DyadicRational::new(m.to_big(), exp))
                .collect()
        }
        match self {
            Scaled::Small { exp, ints } => go(*exp, ints),
            Scaled::Big { exp, ints } => go(*exp, ints),
        }
    }
}

fn permute_by_coordinates<T: Clone>(values: &[T], resolution: u32) -> Vec<T> {
    (0..values.len())
        .map(|j| values[reverse_bits(j, resolution)].clone())
        .collect()
}

/// Spectrum of `f` as integers: `f̂(k) = ints[k] / 2^exp`, with headroom
/// `extra_growth` bits for what the caller does next.
pub(crate) fn scaled_spectrum(f: &StepFunction, extra_growth: u64) -> Scaled {
    let n = f.resolution();
    let (exp, ints) = f.scaled_integers();
    let ints = permute_by_coordinates(&ints, n);
    let mut scaled = Scaled::lower(exp + n, ints, n as u64 + 1 + extra_growth);
    match &mut scaled {
        Scaled::Small { ints, .. } => fwht(ints),
        Scaled::Big { ints, .. } => fwht(ints),
    }
    scaled
}

pub fn wht(f: &StepFunction) -> Spectrum {
    Spectrum {
        resolution: f.resolution(),
        coefficients: scaled_spectrum(f, 0).to_dyadic(),
    }
}

/// Inverse of [`wht`]: `f = Σ_k f̂(k) w_k`.
pub fn inverse_wht(spectrum: &Spectrum) -> StepFunction {
    let n = spectrum.resolution;
    let exp = spectrum
        .coefficients
        .iter()
        .map(DyadicRational::exponent)
        .max()
        .unwrap_or(0);
    let ints: Vec<BigInt> = spectrum
        .coefficients
        .iter()
        .map(|c| c.scaled_numerator(exp))
        .collect();
    let values = synthesize(Scaled::lower(exp, ints, n as u64 + 1));
    let values = permute_by_coordinates(&values, n);
    StepFunction::new(n, values).expect("spectrum length is 2^N")
}

/// Runs the butterfly over the coefficients and returns the values in
/// coordinate order.
fn synthesize(mut scaled: Scaled) -> Vec<DyadicRational> {
    match &mut scaled {
        Scaled::Small { ints, .. } => fwht(ints),
        Scaled::Big { ints, .. } => fwht(ints),
    }
    scaled.to_dyadic()
}

/// Evaluates many partial sums of one function from a cached spectrum.
pub struct PartialSums {
    resolution: u32,
    spectrum: Scaled,
}

impl PartialSums {
    pub fn new(f: &StepFunction) -> Self {
        let n = f.resolution();
        PartialSums {
            resolution: n,
            spectrum: scaled_spectrum(f, n as u64 + 1),
        }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// `S_n f = Σ_{k<n} f̂(k) w_k` for `1 <= n <= 2^N`.
    pub fn partial_sum(&self, n: u64) -> Result<StepFunction> {
        let resolution = self.resolution;
        if n == 0 || n > 1u64 << resolution {
            return Err(Error::PartialSumIndex { n, resolution });
        }
        let cut = n as usize;
        let truncated = match &self.spectrum {
            Scaled::Small { exp, ints } => {
                let mut v = ints.clone();
                v[cut..].fill(0);
                Scaled::Small { exp: *exp, ints: v }
            }
            Scaled::Big { exp, ints } => {
                let mut v = ints.clone();
                v[cut..].fill(BigInt::default());
                Scaled::Big { exp: *exp, ints: v }
            }
        };
        let values = permute_by_coordinates(&synthesize(truncated), resolution);
        StepFunction::new(resolution, values)
    }
}

pub fn partial_sum(f: &StepFunction, n: u64) -> Result<StepFunction> {
    PartialSums::new(f).partial_sum(n)
}

fn check_kernel(n: u64, resolution: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::ZeroIndex);
    }
    check_resolution(resolution)?;
    // D_{2^N} = 2^N 1_{I_N} is still ζ_N-measurable.
    if n > 1u64 << resolution {
        return Err(Error::ResolutionTooSmall {
            what: "Dirichlet kernel",
            needed: high_bit(n) + u32::from(!n.is_power_of_two()),
            got: resolution,
        });
    }
    Ok(())
}

/// Integer values of `D_n` at resolution `N`, via `D_n = w_n Σ_k n_k r_k D_{2^k}`.
pub(crate) fn dirichlet_values(n: u64, resolution: u32) -> Vec<i64> {
    (0..1usize << resolution)
        .map(|i| dirichlet_value_at(n, coordinates(i, resolution)))
        .collect()
}

/// `D_n(x)` from the closed form; `coords` packs `x_k` at bit `k`.
#[inline]
pub(crate) fn dirichlet_value_at(n: u64, coords: u64) -> i64 {
    // D_{2^k}(x) = 2^k on I_k, the set where x_0..x_{k-1} vanish; only k up to
    // the first nonzero coordinate contribute.
    let first_one = coords.trailing_zeros();
    let mut sum = 0i64;
    let mut digits = n;
    while digits != 0 {
        let k = digits.trailing_zeros();
        if k > first_one {
            break;
        }
        let r_k = if (coords >> k) & 1 == 1 { -1 } else { 1 };
        sum += r_k << k;
        digits &= digits - 1;
    }
    walsh_sign(n, coords) * sum
}

/// `D_n = w_0 + ... + w_{n-1}` by direct summation.
pub fn dirichlet_direct(n: u64, resolution: u32) -> Result<StepFunction> {
    check_kernel(n, resolution)?;
    let mut acc = DirichletAccumulator::new(resolution)?;
    while acc.order() < n {
        acc.advance();
    }
    Ok(acc.to_step_function())
}

/// `D_n` from the closed form `w_n Σ n_k r_k D_{2^k}`.
pub fn dirichlet_closed(n: u64, resolution: u32) -> Result<StepFunction> {
    check_kernel(n, resolution)?;
    StepFunction::from_integers(resolution, &dirichlet_values(n, resolution))
}

/// `D_n` at its minimal exact resolution `|n| + 1`.
pub fn dirichlet(n: u64) -> Result<StepFunction> {
    if n == 0 {
        return Err(Error::ZeroIndex);
    }
    dirichlet_closed(n, high_bit(n) + 1)
}

/// `‖D_n‖_1`, exact.
pub fn lebesgue_constant(n: u64) -> Result<DyadicRational> {
    if n == 0 {
        return Err(Error::ZeroIndex);
    }
    let resolution = high_bit(n) + 1;
    check_kernel(n, resolution)?;
    let total: i128 = dirichlet_values(n, resolution)
        .iter()
        .map(|v| v.unsigned_abs() as i128)
        .sum();
    Ok(DyadicRational::new(total, resolution))
}

/// Walks `D_1, D_2, ...` at a fixed resolution by adding one Walsh function per step.
pub struct DirichletAccumulator {
    resolution: u32,
    order: u64,
    coords: Vec<u64>,
    values: Vec<i64>,
}

impl DirichletAccumulator {
    /// Starts at `D_0 = 0`.
    pub fn new(resolution: u32) -> Result<Self> {
        check_resolution(resolution)?;
        let len = 1usize << resolution;
        Ok(DirichletAccumulator {
            resolution,
            order: 0,
            coords: (0..len).map(|i| coordinates(i, resolution)).collect(),
            values: vec![0; len],
        })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Moves from `D_n` to `D_{n+1}`.
    pub fn advance(&mut self) {
        let n = self.order;
        assert!(n >> self.resolution == 0, "Walsh degree exceeds resolution");
        for (v, &c) in self.values.iter_mut().zip(&self.coords) {
            *v += walsh_sign(n, c);
        }
        self.order += 1;
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn to_step_function(&self) -> StepFunction {
        StepFunction::from_integers(self.resolution, &self.values).expect("length is 2^N")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{haar_integral, lp_norm};
    use crate::exponent::Exponent;
    use crate::index::variation;
    use proptest::prelude::*;

    fn dy(n: i64, k: u32) -> DyadicRational {
        DyadicRational::new(n, k)
    }

    /// `‖D_n‖_1` by summing `|D_n|` over shells: on `I_t \ I_{t+1}` the kernel
    /// has modulus `|(n mod 2^t) - n_t 2^t|`, and it equals `n` on `I_{|n|+1}`.
    fn lebesgue_by_shells(n: u64) -> DyadicRational {
        let top = high_bit(n);
        let mut total = DyadicRational::new(n as i64, top + 1);
        for t in 0..=top {
            let low = (n & ((1u64 << t) - 1)) as i64;
            let digit = ((n >> t) & 1) as i64;
            total += &DyadicRational::new((low - (digit << t)).abs(), t + 1);
        }
        total
    }

    #[test]
    fn walsh_examples() {
        for i in 0..8 {
            assert_eq!(walsh_eval(0, i, 3).unwrap(), 1);
        }
        // w_1 depends only on x_0, the top bit of the index.
        for i in 0..8usize {
            assert_eq!(walsh_eval(1, i, 3).unwrap(), if i >= 4 { -1 } else { 1 });
        }
        assert_eq!(walsh_eval(3, 0b110, 3).unwrap(), 1);
        assert_eq!(walsh_eval(3, 0b100, 3).unwrap(), -1);
        assert!(walsh_eval(8, 0, 3).is_err());
    }

    #[test]
    fn walsh_functions_have_zero_mean() {
        for n in 1..32 {
            assert_eq!(
                haar_integral(&walsh_function(n, 5).unwrap()),
                DyadicRational::zero()
            );
        }
        assert_eq!(
            haar_integral(&walsh_function(0, 5).unwrap()),
            DyadicRational::one()
        );
    }

    #[test]
    fn walsh_multiplicativity() {
        let n = 6;
        for a in 0..64u64 {
            for b in 0..64u64 {
                for i in (0..64).step_by(7) {
                    let lhs = walsh_eval(a, i, n).unwrap() * walsh_eval(b, i, n).unwrap();
                    assert_eq!(lhs, walsh_eval(a ^ b, i, n).unwrap());
                }
            }
        }
    }

    #[test]
    fn spectrum_of_dirichlet_power() {
        for m in 0..7 {
            let spectrum = wht(&dirichlet(1 << m).unwrap());
            let n = spectrum.resolution();
            for k in 0..1u64 << n {
                let want = if k < 1 << m {
                    DyadicRational::one()
                } else {
                    DyadicRational::zero()
                };
                assert_eq!(spectrum.coefficient(k), want, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn spectrum_of_walsh_function() {
        for j in 0..32 {
            let spectrum = wht(&walsh_function(j, 5).unwrap());
            for k in 0..32 {
                assert_eq!(
                    spectrum.coefficient(k),
                    DyadicRational::from(i64::from(j == k))
                );
            }
            assert_eq!(spectrum.coefficient(1 << 40), DyadicRational::zero());
        }
    }

    #[test]
    fn partial_sum_examples() {
        let f = StepFunction::from_integers(3, &[5, -3, 2, 0, 7, 7, -1, 4]).unwrap();
        let sums = PartialSums::new(&f);
        assert_eq!(sums.partial_sum(8).unwrap(), f);
        for m in 0..=3 {
            let expected = f.block_average(m).unwrap().refine_to(3).unwrap();
            assert_eq!(sums.partial_sum(1 << m).unwrap(), expected, "m={m}");
        }
        assert!(sums.partial_sum(0).is_err());
        assert!(sums.partial_sum(9).is_err());
    }

    #[test]
    fn partial_sum_of_dirichlet_difference() {
        let n = 7;
        for a in 1..n - 1 {
            let f = dirichlet_closed(1 << (a + 1), n)
                .unwrap()
                .sub(&dirichlet_closed(1 << a, n).unwrap())
                .unwrap();
            let sums = PartialSums::new(&f);
            for s in 0..a {
                let got = sums.partial_sum((1 << a) + (1 << s)).unwrap();
                let on_is = |i: usize| (i >> (n - s)) == 0;
                for i in 0..1usize << n {
                    let want = if on_is(i) { 1i64 << s } else { 0 };
                    assert_eq!(
                        got.values()[i].abs(),
                        DyadicRational::from(want),
                        "a={a} s={s} i={i}"
                    );
                }
            }
        }
    }

    #[test]
    fn dirichlet_examples() {
        for m in 0..6u32 {
            let d = dirichlet(1 << m).unwrap();
            let n = d.resolution();
            for i in 0..1usize << n {
                let want = if i >> (n - m) == 0 { 1i64 << m } else { 0 };
                assert_eq!(d.values()[i], DyadicRational::from(want));
            }
        }
        // w_0 + w_1 + w_2 coset by coset: x = 00, 01, 10, 11
        let d3 = StepFunction::from_integers(2, &[3, 1, 1, -1]).unwrap();
        assert_eq!(dirichlet_direct(3, 2).unwrap(), d3);
        assert_eq!(dirichlet_closed(3, 2).unwrap(), d3);
        let five = lebesgue_constant(5).unwrap();
        assert!(five >= dy(1, 1) && five <= dy(4, 0));
        assert_eq!(lebesgue_constant(3).unwrap(), dy(3, 1));
        assert_eq!(
            dirichlet_closed(4, 2).unwrap(),
            StepFunction::from_integers(2, &[4, 0, 0, 0]).unwrap()
        );
        assert_eq!(
            dirichlet_direct(4, 2).unwrap(),
            dirichlet_closed(4, 2).unwrap()
        );
        assert!(dirichlet_closed(5, 2).is_err());
        assert!(dirichlet(0).is_err());
    }

    #[test]
    fn direct_and_closed_kernels_agree() {
        let n = 12;
        let mut acc = DirichletAccumulator::new(n).unwrap();
        for order in 1u64..(1 << 11) {
            acc.advance();
            assert_eq!(
                acc.values(),
                dirichlet_values(order, n).as_slice(),
                "n={order}"
            );
        }
    }

    #[test]
    fn closed_form_second_shape() {
        // D_n = w_n Σ n_k (D_{2^{k+1}} - D_{2^k})
        let n = 7;
        for order in 1u64..64 {
            let mut sum = StepFunction::zero(n).unwrap();
            for k in 0..6 {
                if (order >> k) & 1 == 1 {
                    let diff = dirichlet_closed(1 << (k + 1), n)
                        .unwrap()
                        .sub(&dirichlet_closed(1 << k, n).unwrap())
                        .unwrap();
                    sum = sum.add(&diff).unwrap();
                }
            }
            let w = walsh_function(order, n).unwrap();
            let product = StepFunction::new(
                n,
                sum.values()
                    .iter()
                    .zip(w.values())
                    .map(|(a, b)| a * b)
                    .collect(),
            )
            .unwrap();
            assert_eq!(product, dirichlet_closed(order, n).unwrap(), "n={order}");
        }
    }

    #[test]
    fn lebesgue_constant_matches_shell_formula_and_bounds() {
        for n in 1u64..2048 {
            let exact = lebesgue_constant(n).unwrap();
            assert_eq!(exact, lebesgue_by_shells(n), "n={n}");
            assert_eq!(
                lp_norm(&dirichlet(n).unwrap(), Exponent::ONE)
                    .exact()
                    .unwrap(),
                &exact
            );
            let v = variation(n) as i64;
            assert!(
                DyadicRational::new(v, 3) <= exact && exact <= DyadicRational::from(v),
                "n={n}"
            );
        }
        for m in 0..20 {
            assert_eq!(lebesgue_constant(1 << m).unwrap(), DyadicRational::one());
        }
    }

    fn arb_step(max_n: u32) -> impl Strategy<Value = StepFunction> {
        (0..=max_n).prop_flat_map(|n| {
            proptest::collection::vec((-40i64..40, 0u32..6), 1usize << n).prop_map(move |v| {
                StepFunction::new(
                    n,
                    v.into_iter()
                        .map(|(a, k)| DyadicRational::new(a, k))
                        .collect(),
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn transform_round_trip_and_parseval(f in arb_step(7)) {
            let spectrum = wht(&f);
            prop_assert_eq!(inverse_wht(&spectrum), f.clone());
            let energy = haar_integral(&StepFunction::new(f.resolution(), f.values().iter().map(|v| v * v).collect()).unwrap());
            prop_assert_eq!(spectrum.energy(), energy);
        }

        #[test]
        fn spectrum_inverse_round_trip(n in 0u32..7, raw in proptest::collection::vec((-40i64..40, 0u32..8), 128)) {
            let spectrum = Spectrum::new(n, raw.iter().take(1 << n).map(|&(a, k)| DyadicRational::new(a, k)).collect()).unwrap();
            prop_assert_eq!(wht(&inverse_wht(&spectrum)), spectrum);
        }

        #[test]
        fn coefficients_are_integrals(f in arb_step(5), k in 0u64..32) {
            let n = f.resolution();
            let k = k % (1 << n);
            let w = walsh_function(k, n).unwrap();
            let product = StepFunction::new(n, f.values().iter().zip(w.values()).map(|(a, b)| a * b).collect()).unwrap();
            prop_assert_eq!(wht(&f).coefficient(k), haar_integral(&product));
        }

        #[test]
        fn full_partial_sum_is_identity(f in arb_step(6)) {
            prop_assert_eq!(partial_sum(&f, 1 << f.resolution()).unwrap(), f);
        }
    }

    #[test]
    fn big_lane_matches_small_lane() {
        // Values near 2^120 force the BigInt path.
        let huge = BigInt::from(1) << 118u32;
        let f = StepFunction::new(
            3,
            (0..8)
                .map(|i| DyadicRational::new(&huge * BigInt::from(i - 3), 0))
                .collect(),
        )
        .unwrap();
        assert!(matches!(scaled_spectrum(&f, 0), Scaled::Big { .. }));
        let small =
            StepFunction::new(3, (0..8).map(|i| DyadicRational::from(i - 3)).collect()).unwrap();
        let big_spectrum = wht(&f);
        let small_spectrum = wht(&small);
        for k in 0..8 {
            assert_eq!(
                big_spectrum.coefficient(k),
                &small_spectrum.coefficient(k) * &DyadicRational::new(huge.clone(), 0)
            );
        }
        assert_eq!(inverse_wht(&big_spectrum), f);
        assert_eq!(
            partial_sum(&f, 3).unwrap(),
            partial_sum(&small, 3)
                .unwrap()
                .scale(&DyadicRational::new(huge, 0))
        );
    }
}
