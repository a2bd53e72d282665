//! Prefix algebra over u-bit coordinates and interval decomposition.
//!
//! A prefix of length ℓ stands for the 2^(u−ℓ) coordinates that share its
//! high ℓ bits. An integer interval is covered by the maximal aligned blocks
//! it contains; each block is a prefix.

use std::fmt;

use thiserror::Error;

/// A bit string of length `len ∈ [1, u]` read as the high bits of a u-bit value.
///
/// The length is part of the identity: "0" and "00" are different prefixes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrefixStr {
    bits: u64,
    len: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefixError {
    #[error("cannot drop {k} bits from a {u}-bit value")]
    TooManyWildcards { k: u32, u: u32 },
    #[error("empty interval [{lo}, {hi}]")]
    EmptyInterval { lo: u64, hi: u64 },
    #[error("value {value} outside the {u}-bit domain")]
    OutOfDomain { value: u64, u: u32 },
}

impl PrefixStr {
    /// Panics unless `1 ≤ len ≤ 63` and `bits < 2^len`.
    pub fn new(bits: u64, len: u32) -> PrefixStr {
        assert!((1..=63).contains(&len) && bits >> len == 0, "invalid prefix");
        PrefixStr { bits, len }
    }

    /// Parses a string of '0'/'1' characters, most significant first.
    pub fn parse(s: &str) -> Option<PrefixStr> {
        if s.is_empty() || s.len() > 63 {
            return None;
        }
        let bits = u64::from_str_radix(s, 2).ok()?;
        Some(PrefixStr { bits, len: s.len() as u32 })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// High `u − j` bits of the u-bit value `x`.
    pub fn of(x: u64, u: u32, j: u32) -> PrefixStr {
        PrefixStr { bits: x >> j, len: u - j }
    }

    /// Prefix padded with zeros to u bits.
    pub fn low_bound(&self, u: u32) -> u64 {
        self.bits << (u - self.len)
    }

    /// Prefix padded with ones to u bits.
    pub fn up_bound(&self, u: u32) -> u64 {
        let pad = u - self.len;
        (self.bits << pad) | ((1u64 << pad) - 1)
    }

    /// Number of wildcard (undetermined) low bits in a u-bit domain.
    pub fn wildcards(&self, u: u32) -> u32 {
        u - self.len
    }

    pub fn contains(&self, x: u64, u: u32) -> bool {
        x >> (u - self.len) == self.bits
    }

    /// One length byte followed by ⌈len/8⌉ bytes, high bits first.
    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        out.push(self.len as u8);
        let nbytes = self.len.div_ceil(8);
        let aligned = self.bits << (nbytes * 8 - self.len);
        for i in (0..nbytes).rev() {
            out.push((aligned >> (i * 8)) as u8);
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(1 + self.len.div_ceil(8) as usize);
        self.write_bytes(&mut out);
        out
    }
}

impl fmt::Debug for PrefixStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl fmt::Display for PrefixStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.len as usize)
    }
}

/// The `k + 1` prefixes of `x` obtained by dropping `j = 0..=k` low bits.
pub fn all_prefix(x: u64, u: u32, k: u32) -> Result<Vec<PrefixStr>, PrefixError> {
    if k >= u {
        return Err(PrefixError::TooManyWildcards { k, u });
    }
    if u < 64 && x >> u != 0 {
        return Err(PrefixError::OutOfDomain { value: x, u });
    }
    Ok((0..=k).map(|j| PrefixStr::of(x, u, j)).collect())
}

/// Maximal prefixes whose intervals partition `[lo, hi]`.
pub fn decompose(lo: u64, hi: u64, u: u32) -> Result<Vec<PrefixStr>, PrefixError> {
    decompose_capped(lo, hi, u, u - 1)
}

/// Like [`decompose`], but no returned prefix has more than `max_wildcards`
/// wildcard bits. Blocks are taken greedily from the left, each the largest
/// aligned block that fits; this is the unique coarsest such partition.
pub fn decompose_capped(lo: u64, hi: u64, u: u32, max_wildcards: u32) -> Result<Vec<PrefixStr>, PrefixError> {
    if lo > hi {
        return Err(PrefixError::EmptyInterval { lo, hi });
    }
    if u < 64 && hi >> u != 0 {
        return Err(PrefixError::OutOfDomain { value: hi, u });
    }
    let cap = max_wildcards.min(u - 1);
    let hi = hi as u128;
    let mut x = lo as u128;
    let mut out = Vec::new();
    while x <= hi {
        let mut j = 0u32;
        while j < cap && x & ((1u128 << (j + 1)) - 1) == 0 && x + (1u128 << (j + 1)) - 1 <= hi {
            j += 1;
        }
        out.push(PrefixStr::of(x as u64, u, j));
        x += 1u128 << j;
    }
    Ok(out)
}
