//! Subset and set-partition combinatorics over `[n] = {1, …, n}`.
//!
//! Subsets are bitmasks: element `i` (1-based) is bit `i - 1`. Coefficient
//! tables elsewhere in the crate are dense vectors indexed by the raw mask.

use crate::{Error, Result};
use std::fmt;

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::DimensionOutOfRange { n, max: MAX_DIM })
    }
}

/// Mask of the full set `[n]`.
#[inline]
pub fn full_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// A subset `T ⊆ [n]` stored as a bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex {
    bits: u32,
    n: u8,
}

impl SubsetIndex {
    pub fn new(n: usize, bits: u32) -> Result<Self> {
        check_dim(n)?;
        if bits > full_mask(n) {
            return Err(Error::InvalidSubset(format!("mask {bits:#b} exceeds n={n}")));
        }
        Ok(SubsetIndex { bits, n: n as u8 })
    }

    /// Builds a subset from 1-based element labels.
    pub fn from_elements(n: usize, elements: &[usize]) -> Result<Self> {
        check_dim(n)?;
        let mut bits = 0u32;
        for &e in elements {
            if e == 0 || e > n {
                return Err(Error::InvalidSubset(format!("element {e} not in 1..={n}")));
            }
            if bits & (1 << (e - 1)) != 0 {
                return Err(Error::InvalidSubset(format!("element {e} repeated")));
            }
            bits |= 1 << (e - 1);
        }
        Ok(SubsetIndex { bits, n: n as u8 })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn full(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(SubsetIndex { bits: full_mask(n), n: n as u8 })
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn cardinality(&self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn complement(&self) -> Self {
        SubsetIndex { bits: full_mask(self.n()) ^ self.bits, n: self.n }
    }

    /// True if the 1-based element `i` belongs to the subset.
    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= self.n() && self.bits & (1 << (i - 1)) != 0
    }

    pub fn is_subset_of(&self, other: &SubsetIndex) -> bool {
        self.bits & !other.bits == 0
    }

    /// 1-based elements in increasing order.
    pub fn elements(&self) -> Vec<usize> {
        mask_elements(self.bits).map(|i| i + 1).collect()
    }

    /// Comma-joined 1-based label, e.g. `"1,3"`; the empty set is `""`.
    pub fn label(&self) -> String {
        mask_label(self.bits)
    }

    /// Parses a comma-joined 1-based label.
    pub fn parse_label(n: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Self::empty(n);
        }
        let mut elems = Vec::new();
        for tok in s.split(',') {
            let e: usize = tok
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSubset(format!("bad element {tok:?} in {s:?}")))?;
            elems.push(e);
        }
        Self::from_elements(n, &elems)
    }
}

impl fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.label())
    }
}

/// Comma-joined 1-based label of a raw mask.
pub fn mask_label(bits: u32) -> String {
    mask_elements(bits)
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// 0-based positions of the set bits, increasing.
pub fn mask_elements(mut bits: u32) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if bits == 0 {
            None
        } else {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        }
    })
}

/// Iterates over all submasks of `mask`, including 0 and `mask`, in increasing order.
pub fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(0u32);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask { None } else { Some(((cur | !mask).wrapping_add(1)) & mask) };
        Some(cur)
    })
}

/// Packs the bits of `bits` lying inside `within` into the low positions.
///
/// Used to relabel a subset of `T` as a subset of `[|T|]`.
pub fn compress(bits: u32, within: u32) -> u32 {
    let mut out = 0u32;
    for (k, i) in mask_elements(within).enumerate() {
        if bits & (1 << i) != 0 {
            out |= 1 << k;
        }
    }
    out
}

/// Inverse of [`compress`]: spreads low bits onto the positions of `within`.
pub fn expand(bits: u32, within: u32) -> u32 {
    let mut out = 0u32;
    for (k, i) in mask_elements(within).enumerate() {
        if bits & (1 << k) != 0 {
            out |= 1 << i;
        }
    }
    out
}

/// All subsets of `[n]` in increasing bitmask order.
pub fn subsets(n: usize, nonempty_only: bool) -> Result<Vec<SubsetIndex>> {
    check_dim(n)?;
    let start = u32::from(nonempty_only);
    Ok((start..=full_mask(n)).map(|bits| SubsetIndex { bits, n: n as u8 }).collect())
}

/// A set partition of some `S` into disjoint nonempty blocks, sorted by smallest element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<SubsetIndex>,
}

impl Partition {
    pub fn union(&self) -> u32 {
        self.blocks.iter().fold(0, |acc, b| acc | b.bits())
    }
}

/// Calls `f` with the block masks of every partition of `mask`.
///
/// Enumeration follows restricted-growth strings over the elements of
/// `mask` in increasing order, so blocks come out sorted by smallest element
/// and the sequence is deterministic.
pub fn for_each_partition<F: FnMut(&[u32])>(mask: u32, mut f: F) {
    let elems: Vec<usize> = mask_elements(mask).collect();
    if elems.is_empty() {
        f(&[]);
        return;
    }
    let mut blocks: Vec<u32> = Vec::with_capacity(elems.len());
    fn rec<F: FnMut(&[u32])>(elems: &[usize], idx: usize, blocks: &mut Vec<u32>, f: &mut F) {
        if idx == elems.len() {
            f(blocks);
            return;
        }
        let bit = 1u32 << elems[idx];
        for b in 0..blocks.len() {
            blocks[b] |= bit;
            rec(elems, idx + 1, blocks, f);
            blocks[b] &= !bit;
        }
        blocks.push(bit);
        rec(elems, idx + 1, blocks, f);
        blocks.pop();
    }
    rec(&elems, 0, &mut blocks, &mut f);
}

/// Partitions of `s` into exactly `k` blocks; empty when `k` is out of range.
pub fn partitions_into_k(s: SubsetIndex, k: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    if k == 0 || k > s.cardinality() {
        return out;
    }
    let n = s.n;
    for_each_partition(s.bits(), |blocks| {
        if blocks.len() == k {
            out.push(Partition {
                blocks: blocks.iter().map(|&bits| SubsetIndex { bits, n }).collect(),
            });
        }
    });
    out
}

/// A multi-index `α ∈ ℕⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    pub exponents: Vec<u32>,
}

impl MultiIndex {
    pub fn zeros(n: usize) -> Self {
        MultiIndex { exponents: vec![0; n] }
    }

    /// `|α| = Σ α_i`.
    pub fn total(&self) -> u32 {
        self.exponents.iter().sum()
    }

    /// `‖α‖_∞ = max α_i`.
    pub fn max_norm(&self) -> u32 {
        self.exponents.iter().copied().max().unwrap_or(0)
    }
}

/// All `α ∈ ℕⁿ` with `|α| ≤ max_total`, in lexicographic order.
pub fn multi_indices_up_to(n: usize, max_total: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if pos == cur.len() {
            out.push(MultiIndex { exponents: cur.clone() });
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            rec(pos + 1, left - v, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, max_total, &mut cur, &mut out);
    out
}
