//! Multi-indices over `m` commuting derivations, the product order, and the
//! orderly ranking of derivatives.
//!
//! A derivative `∂^σ x_k` is named by a [`DerivIndex`] `(σ, k)`. Two orders
//! live on these names:
//!
//! - the product order (`below`): `σ ≤ τ` componentwise, same unknown;
//! - the orderly ranking ⊴: compare `(|σ|, k, σ(0), …, σ(m-2))`
//!   lexicographically. This is a total order isomorphic to `(ℕ, ≤)`, and it
//!   is the `Ord` instance of [`DerivIndex`].

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest height accepted anywhere in the engine.
pub const MAX_HEIGHT: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("multi-index length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("dimension mismatch: ({0}, unknown {1}) vs ({2}, unknown {3})")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("no predecessor in direction {direction}: entry is zero")]
    NoPredecessor { direction: usize },
    #[error("derivation index {direction} out of range for m = {m}")]
    DirectionOutOfRange { direction: usize, m: usize },
    #[error("height {0} exceeds the supported maximum {MAX_HEIGHT}")]
    HeightTooLarge(u64),
    #[error("at least one derivation is required")]
    NoDerivations,
}

/// An element `σ ∈ ℕ^m`: the exponent of each derivation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(m: usize) -> Self {
        MultiIndex(vec![0; m])
    }

    /// `ι_i`, the characteristic function of `{i}`.
    pub fn unit(m: usize, i: usize) -> Self {
        let mut v = vec![0; m];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// `|σ| = Σ σ(i)`.
    pub fn height(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Product order: `σ(i) ≤ τ(i)` for every `i`.
    pub fn below(&self, other: &MultiIndex) -> Result<bool, IndexError> {
        self.check_len(other)?;
        Ok(self.0.iter().zip(&other.0).all(|(a, b)| a <= b))
    }

    /// Strict product order.
    pub fn strictly_below(&self, other: &MultiIndex) -> Result<bool, IndexError> {
        Ok(self != other && self.below(other)?)
    }

    pub fn add(&self, other: &MultiIndex) -> Result<MultiIndex, IndexError> {
        self.check_len(other)?;
        Ok(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    /// `σ + ι_i`.
    pub fn inc(&self, i: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[i] += 1;
        MultiIndex(v)
    }

    /// `σ - ι_i`, partial.
    pub fn sub_unit(&self, i: usize) -> Result<MultiIndex, IndexError> {
        if i >= self.m() {
            return Err(IndexError::DirectionOutOfRange { direction: i, m: self.m() });
        }
        if self.0[i] == 0 {
            return Err(IndexError::NoPredecessor { direction: i });
        }
        let mut v = self.0.clone();
        v[i] -= 1;
        Ok(MultiIndex(v))
    }

    /// Componentwise maximum: the least upper bound under the product order.
    pub fn join(&self, other: &MultiIndex) -> Result<MultiIndex, IndexError> {
        self.check_len(other)?;
        Ok(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect()))
    }

    fn check_len(&self, other: &MultiIndex) -> Result<(), IndexError> {
        if self.m() != other.m() {
            return Err(IndexError::LengthMismatch(self.m(), other.m()));
        }
        Ok(())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// A derivative slot `(σ, k)`, naming `∂^σ x_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DerivIndex {
    pub index: MultiIndex,
    pub unknown: usize,
}

/// The lexicographic key realizing the orderly ranking.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankKey {
    pub height: u32,
    pub unknown: usize,
    pub prefix: Vec<u32>,
}

impl DerivIndex {
    pub fn new(index: MultiIndex, unknown: usize) -> Self {
        DerivIndex { index, unknown }
    }

    pub fn from_entries(entries: &[u32], unknown: usize) -> Self {
        DerivIndex { index: MultiIndex::new(entries.to_vec()), unknown }
    }

    pub fn m(&self) -> usize {
        self.index.m()
    }

    pub fn height(&self) -> u32 {
        self.index.height()
    }

    pub fn rank_key(&self) -> RankKey {
        let e = self.index.entries();
        let prefix = if e.is_empty() { Vec::new() } else { e[..e.len() - 1].to_vec() };
        RankKey { height: self.height(), unknown: self.unknown, prefix }
    }

    /// Product order on `ℕ^m × n`; different unknowns are incomparable.
    pub fn below(&self, other: &DerivIndex) -> Result<bool, IndexError> {
        Ok(self.unknown == other.unknown && self.index.below(&other.index)?)
    }

    pub fn strictly_below(&self, other: &DerivIndex) -> Result<bool, IndexError> {
        Ok(self != other && self.below(other)?)
    }

    pub fn inc(&self, i: usize) -> DerivIndex {
        DerivIndex { index: self.index.inc(i), unknown: self.unknown }
    }

    pub fn sub_unit(&self, i: usize) -> Result<DerivIndex, IndexError> {
        Ok(DerivIndex { index: self.index.sub_unit(i)?, unknown: self.unknown })
    }

    pub fn shift(&self, by: &MultiIndex) -> Result<DerivIndex, IndexError> {
        Ok(DerivIndex { index: self.index.add(by)?, unknown: self.unknown })
    }

    /// The immediate ⊴-successor in `ℕ^m × n`.
    pub fn successor(&self, n: usize) -> DerivIndex {
        let m = self.m();
        let h = self.height();
        if let Some(next) = next_composition(self.index.entries()) {
            return DerivIndex::from_entries(&next, self.unknown);
        }
        if self.unknown + 1 < n {
            return DerivIndex::from_entries(&first_composition(m, h), self.unknown + 1);
        }
        DerivIndex::from_entries(&first_composition(m, h + 1), 0)
    }
}

/// `orderly_compare` with explicit dimension checking.
pub fn orderly_compare(a: &DerivIndex, b: &DerivIndex) -> Result<Ordering, IndexError> {
    if a.m() != b.m() {
        return Err(IndexError::DimensionMismatch(a.m(), a.unknown, b.m(), b.unknown));
    }
    Ok(a.cmp(b))
}

impl Ord for DerivIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.index.entries(), other.index.entries());
        self.height()
            .cmp(&other.height())
            .then(self.unknown.cmp(&other.unknown))
            .then_with(|| {
                let pa = &a[..a.len().saturating_sub(1)];
                let pb = &b[..b.len().saturating_sub(1)];
                pa.cmp(pb)
            })
            .then_with(|| a.len().cmp(&b.len()))
    }
}

impl PartialOrd for DerivIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DerivIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.index, self.unknown)
    }
}

// Smallest composition of h into m parts in prefix-lex order: (0, …, 0, h).
fn first_composition(m: usize, h: u32) -> Vec<u32> {
    let mut v = vec![0; m];
    if m > 0 {
        v[m - 1] = h;
    }
    v
}

// Next composition of the same height, ordered by the first m-1 entries.
fn next_composition(e: &[u32]) -> Option<Vec<u32>> {
    let m = e.len();
    if m < 2 {
        return None;
    }
    // Increment the rightmost prefix position that still has room, i.e. some
    // later entry is positive; reset everything after it.
    for j in (0..m - 1).rev() {
        let tail: u32 = e[j + 1..].iter().sum();
        if tail > 0 {
            let mut v = e.to_vec();
            v[j] += 1;
            let rest = tail - 1;
            for x in v.iter_mut().skip(j + 1) {
                *x = 0;
            }
            v[m - 1] = rest;
            return Some(v);
        }
    }
    None
}

/// All `(σ, k)` with `|σ| ≤ height_cap`, sorted by ⊴.
pub fn enumerate_upto(m: usize, n: usize, height_cap: u32) -> Result<Vec<DerivIndex>, IndexError> {
    if m == 0 {
        return Err(IndexError::NoDerivations);
    }
    if height_cap > MAX_HEIGHT {
        return Err(IndexError::HeightTooLarge(height_cap as u64));
    }
    let mut out = Vec::new();
    for h in 0..=height_cap {
        for k in 0..n {
            let mut cur = Some(first_composition(m, h));
            while let Some(c) = cur {
                cur = next_composition(&c);
                out.push(DerivIndex::from_entries(&c, k));
            }
        }
    }
    Ok(out)
}

/// True iff no two distinct elements are comparable under the product order.
pub fn is_antichain<'a, I>(items: I) -> bool
where
    I: IntoIterator<Item = &'a DerivIndex>,
{
    let v: Vec<&DerivIndex> = items.into_iter().collect();
    for (i, a) in v.iter().enumerate() {
        for b in &v[i + 1..] {
            if a == b {
                continue;
            }
            if a.below(b).unwrap_or(false) || b.below(a).unwrap_or(false) {
                return false;
            }
        }
    }
    true
}
