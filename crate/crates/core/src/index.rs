//! Binary-expansion characters of natural numbers.
//!
//! For `n = Σ n_j 2^j` this module computes the lowest set bit `[n]`, the
//! highest set bit `|n|`, the spread `ρ(n) = |n| - [n]`, the variation
//! `V(n) = n_0 + Σ |n_k - n_{k-1}|`, the maximal runs of one-digits, and the
//! boundary sets of index families inside a dyadic window `[2^s, 2^{s+1})`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub const MAX_INDEX: u64 = 1 << 63;

fn check_index(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::ZeroIndex)
    } else if n >= MAX_INDEX {
        Err(Error::IndexTooLarge(n))
    } else {
        Ok(())
    }
}

/// `[n]`, the position of the lowest one-digit. Panics on zero.
#[inline]
pub fn low_bit(n: u64) -> u32 {
    debug_assert!(n != 0);
    n.trailing_zeros()
}

/// `|n|`, the position of the highest one-digit. Panics on zero.
#[inline]
pub fn high_bit(n: u64) -> u32 {
    debug_assert!(n != 0);
    63 - n.leading_zeros()
}

/// `ρ(n) = |n| - [n]`.
#[inline]
pub fn gap(n: u64) -> u32 {
    high_bit(n) - low_bit(n)
}

/// Number of maximal runs of one-digits.
#[inline]
pub fn block_count(n: u64) -> u32 {
    // A run starts wherever a one-digit has a zero (or nothing) below it.
    (n & !(n << 1)).count_ones()
}

/// `V(n)`, evaluated as twice the number of one-runs. Zero maps to zero.
#[inline]
pub fn variation(n: u64) -> u32 {
    2 * block_count(n)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexProfile {
    pub n: u64,
    /// `digits[j] = n_j` for `0 <= j <= |n|`.
    pub digits: Vec<u8>,
    pub low: u32,
    pub high: u32,
    pub gap: u32,
    pub variation: u32,
}

impl IndexProfile {
    /// Most-significant-first digit string, e.g. `"101"` for 5.
    pub fn digit_string(&self) -> String {
        self.digits
            .iter()
            .rev()
            .map(|d| char::from(b'0' + d))
            .collect()
    }
}

pub fn index_profile(n: u64) -> Result<IndexProfile> {
    check_index(n)?;
    let high = high_bit(n);
    let digits = (0..=high).map(|j| ((n >> j) & 1) as u8).collect();
    Ok(IndexProfile {
        n,
        digits,
        low: low_bit(n),
        high,
        gap: gap(n),
        variation: variation(n),
    })
}

/// A maximal run `l..=t` of one-digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    pub low: u32,
    pub high: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
}

impl BlockDecomposition {
    pub fn reassemble(&self) -> u64 {
        self.blocks
            .iter()
            .map(|b| ((1u64 << (b.high - b.low + 1)) - 1) << b.low)
            .sum()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

pub fn blocks(n: u64) -> Result<BlockDecomposition> {
    check_index(n)?;
    let mut out = Vec::new();
    let mut rest = n;
    while rest != 0 {
        let low = rest.trailing_zeros();
        let run = (rest >> low).trailing_ones();
        let high = low + run - 1;
        out.push(Block { low, high });
        rest &= !(((1u64 << run) - 1) << low);
    }
    Ok(BlockDecomposition { blocks: out })
}

fn check_window(indices: &[u64], s: u32) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::EmptyWindow(s));
    }
    if s >= 63 {
        return Err(Error::IndexTooLarge(1 << 63));
    }
    for &n in indices {
        if n >> s != 1 {
            return Err(Error::OutsideWindow { index: n, s });
        }
    }
    Ok(())
}

/// The union `A_s` of block endpoints over a family of indices in one window.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundarySet {
    pub s: u32,
    pub members: BTreeSet<u32>,
    /// Total number of blocks across the family (an upper bound for half the cardinality).
    pub total_blocks: usize,
}

impl BoundarySet {
    pub fn cardinality(&self) -> usize {
        self.members.len()
    }
}

pub fn boundary_set(indices: &[u64], s: u32) -> Result<BoundarySet> {
    check_window(indices, s)?;
    let mut members = BTreeSet::new();
    let mut total_blocks = 0;
    for &n in indices {
        let decomposition = blocks(n)?;
        total_blocks += decomposition.len();
        for b in decomposition.blocks {
            members.insert(b.low);
            members.insert(b.high);
        }
    }
    Ok(BoundarySet {
        s,
        members,
        total_blocks,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WindowProfile {
    pub s: u32,
    /// Sorted, nondecreasing.
    pub indices: Vec<u64>,
    pub s_minus: u32,
    pub s_plus: u32,
    pub rho_s: u32,
}

pub fn window_profile(indices: &[u64], s: u32) -> Result<WindowProfile> {
    check_window(indices, s)?;
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    let s_minus = sorted.iter().map(|&n| low_bit(n)).min().unwrap_or(s);
    let s_plus = sorted.iter().map(|&n| high_bit(n)).max().unwrap_or(s);
    debug_assert_eq!(s_plus, s);
    Ok(WindowProfile {
        s,
        indices: sorted,
        s_minus,
        s_plus,
        rho_s: s_plus - s_minus,
    })
}

/// Parses a comma- or whitespace-separated list of positive indices, e.g. `"9,13"`.
pub fn parse_index_list(text: &str) -> Result<Vec<u64>> {
    const MAX_ITEMS: usize = 1 << 16;
    let mut out = Vec::new();
    for (i, item) in text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .enumerate()
    {
        if i >= MAX_ITEMS {
            return Err(Error::Parse {
                line: 1,
                message: format!("more than {MAX_ITEMS} indices"),
            });
        }
        let n: u64 = item.parse().map_err(|_| Error::Parse {
            line: 1,
            message: format!(
                "not a natural number: {:?}",
                item.chars().take(32).collect::<String>()
            ),
        })?;
        check_index(n)?;
        out.push(n);
    }
    if out.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// `V(n)` straight from its defining sum over digits.
    fn variation_by_definition(n: u64) -> u32 {
        let digit = |k: u32| ((n >> k) & 1) as i32;
        let mut v = digit(0);
        for k in 1..64 {
            v += (digit(k) - digit(k - 1)).abs();
        }
        v as u32
    }

    /// Block list by scanning bits one at a time.
    fn blocks_by_scan(n: u64) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        let mut start = None;
        for k in 0..=64u32 {
            let bit = k < 64 && (n >> k) & 1 == 1;
            match (bit, start) {
                (true, None) => start = Some(k),
                (false, Some(l)) => {
                    out.push((l, k - 1));
                    start = None;
                }
                _ => {}
            }
        }
        out
    }

    fn pairs(n: u64) -> Vec<(u32, u32)> {
        blocks(n)
            .unwrap()
            .blocks
            .iter()
            .map(|b| (b.low, b.high))
            .collect()
    }

    #[test]
    fn profile_examples() {
        let p = index_profile(5).unwrap();
        assert_eq!(p.digit_string(), "101");
        assert_eq!((p.low, p.high, p.gap, p.variation), (0, 2, 2, 4));
        assert_eq!(variation_by_definition(5), 4);
        for k in 0..63 {
            let p = index_profile(1 << k).unwrap();
            assert_eq!((p.low, p.high, p.gap, p.variation), (k, k, 0, 2));
        }
        let p = index_profile(1).unwrap();
        assert_eq!((p.low, p.high, p.gap, p.variation), (0, 0, 0, 2));
    }

    #[test]
    fn rejects_zero_and_huge() {
        assert_eq!(index_profile(0), Err(Error::ZeroIndex));
        assert_eq!(blocks(0), Err(Error::ZeroIndex));
        assert_eq!(index_profile(1 << 63), Err(Error::IndexTooLarge(1 << 63)));
    }

    #[test]
    fn block_examples() {
        assert_eq!(blocks_by_scan(13), vec![(0, 0), (2, 3)]);
        assert_eq!(pairs(13), vec![(0, 0), (2, 3)]);
        assert_eq!(blocks_by_scan(9), vec![(0, 0), (3, 3)]);
        assert_eq!(pairs(9), vec![(0, 0), (3, 3)]);
        for k in 0..63 {
            assert_eq!(pairs(1 << k), vec![(k, k)]);
        }
        assert_eq!(pairs((1 << 63) - 1), vec![(0, 62)]);
    }

    #[test]
    fn boundary_examples() {
        let a = boundary_set(&[9, 13], 3).unwrap();
        assert_eq!(a.members.iter().copied().collect::<Vec<_>>(), vec![0, 2, 3]);
        assert_eq!(a.cardinality(), 3);
        for s in 0..20 {
            let a = boundary_set(&[1 << s], s).unwrap();
            assert_eq!(a.members.iter().copied().collect::<Vec<_>>(), vec![s]);
        }
        for s in 1..20 {
            let a = boundary_set(&[(1 << (s + 1)) - 1], s).unwrap();
            assert_eq!(a.members.iter().copied().collect::<Vec<_>>(), vec![0, s]);
        }
        assert_eq!(
            boundary_set(&[8], 2),
            Err(Error::OutsideWindow { index: 8, s: 2 })
        );
        assert_eq!(boundary_set(&[], 2), Err(Error::EmptyWindow(2)));
    }

    #[test]
    fn window_examples() {
        let w = window_profile(&[13, 9], 3).unwrap();
        assert_eq!((w.s_minus, w.s_plus, w.rho_s), (0, 3, 3));
        assert_eq!(w.indices, vec![9, 13]);
        assert_eq!(window_profile(&[16], 4).unwrap().rho_s, 0);
        let w = window_profile(&[12], 3).unwrap();
        assert_eq!((w.s_minus, w.rho_s), (2, 1));
        assert!(window_profile(&[7], 3).is_err());
    }

    #[test]
    fn variation_is_twice_block_count_exhaustive() {
        for n in 1u64..(1 << 16) {
            assert_eq!(
                variation_by_definition(n),
                2 * blocks_by_scan(n).len() as u32,
                "n={n}"
            );
            assert_eq!(variation(n), variation_by_definition(n), "n={n}");
        }
    }

    #[test]
    fn index_list_parsing() {
        assert_eq!(parse_index_list("9,13").unwrap(), vec![9, 13]);
        assert_eq!(parse_index_list(" 1 2,3 ").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_index_list("0"), Err(Error::ZeroIndex));
        assert!(parse_index_list("").is_err());
        assert!(parse_index_list("1,x").is_err());
    }

    proptest! {
        #[test]
        fn blocks_match_scan_and_reassemble(n in 1u64..(1 << 63)) {
            let d = blocks(n).unwrap();
            let scanned = blocks_by_scan(n);
            prop_assert_eq!(d.blocks.iter().map(|b| (b.low, b.high)).collect::<Vec<_>>(), scanned);
            prop_assert_eq!(d.reassemble(), n);
            for w in d.blocks.windows(2) {
                prop_assert!(w[1].low >= w[0].high + 2);
            }
            prop_assert_eq!(low_bit(n), d.blocks[0].low);
            prop_assert_eq!(high_bit(n), d.blocks.last().unwrap().high);
            let p = index_profile(n).unwrap();
            prop_assert_eq!(p.gap, p.high - p.low);
            prop_assert!(p.variation >= 2 && p.variation % 2 == 0);
            prop_assert_eq!(p.variation, variation_by_definition(n));
        }

        #[test]
        fn boundary_set_is_monotone(s in 1u32..40, raw in proptest::collection::vec(any::<u64>(), 1..6), extra in any::<u64>()) {
            let into_window = |x: u64| (1u64 << s) | (x & ((1u64 << s) - 1));
            let family: Vec<u64> = raw.iter().map(|&x| into_window(x)).collect();
            let base = boundary_set(&family, s).unwrap();
            let mut bigger = family.clone();
            bigger.push(into_window(extra));
            let grown = boundary_set(&bigger, s).unwrap();
            prop_assert!(base.members.is_subset(&grown.members));
            prop_assert!(base.members.contains(&s));
            prop_assert!(base.cardinality() <= 2 * base.total_blocks);
        }

        #[test]
        fn singleton_window_gap(m in 1u64..(1 << 62)) {
            let s = high_bit(m);
            prop_assert_eq!(window_profile(&[m], s).unwrap().rho_s, gap(m));
        }
    }
}
