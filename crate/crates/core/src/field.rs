//! Binary-field elements, XOR shares and arithmetic shares modulo 2^64.
//!
//! A [`BinElem`] is a bit string of up to [`MAX_WIDTH`] bits stored in three
//! little-endian limbs. Addition in F_{2^σ} is XOR, so every element is its
//! own inverse and a pair of shares reconstructs by XOR. The width σ is not
//! stored in the element; it travels with the context ([`Width`]) and is used
//! for masking and serialization.

use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use rand::{Rng, RngCore};

/// Widest element any protocol in this crate needs (tag ∥ value ∥ value²).
pub const MAX_WIDTH: u32 = 192;

/// Bit width of a binary-field context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Width(u32);

impl Width {
    /// Identifier width ℓ_id.
    pub const ID: Width = Width(80);
    /// Tag width τ used by equality-conditional selection.
    pub const TAG: Width = Width(64);
    /// 64-bit values (refined filtering shares, arithmetic payloads).
    pub const W64: Width = Width(64);
    pub const W128: Width = Width(128);

    /// Panics if `bits` is zero or exceeds [`MAX_WIDTH`].
    pub const fn new(bits: u32) -> Width {
        assert!(bits > 0 && bits <= MAX_WIDTH, "width out of range");
        Width(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    /// Serialized size in bytes.
    pub const fn bytes(self) -> usize {
        self.0.div_ceil(8) as usize
    }

    /// Width of `tag ∥ value` where the tag occupies the low [`Width::TAG`] bits.
    pub const fn with_tag(self) -> Width {
        Width::new(self.0 + Width::TAG.0)
    }

    fn limb_mask(self, limb: usize) -> u64 {
        let lo = limb as u32 * 64;
        if self.0 >= lo + 64 {
            u64::MAX
        } else if self.0 <= lo {
            0
        } else {
            (1u64 << (self.0 - lo)) - 1
        }
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

/// Element of F_{2^σ}, σ ≤ 192.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinElem([u64; 3]);

impl BinElem {
    pub const ZERO: BinElem = BinElem([0; 3]);

    pub const fn from_limbs(limbs: [u64; 3]) -> BinElem {
        BinElem(limbs)
    }

    pub const fn from_u64(v: u64) -> BinElem {
        BinElem([v, 0, 0])
    }

    pub const fn from_u128(v: u128) -> BinElem {
        BinElem([v as u64, (v >> 64) as u64, 0])
    }

    pub const fn limbs(&self) -> [u64; 3] {
        self.0
    }

    pub const fn low_u64(&self) -> u64 {
        self.0[0]
    }

    pub const fn low_u128(&self) -> u128 {
        self.0[0] as u128 | (self.0[1] as u128) << 64
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 3]
    }

    /// Uniform element of the given width.
    pub fn random<R: RngCore + ?Sized>(rng: &mut R, width: Width) -> BinElem {
        let mut limbs = [0u64; 3];
        for (i, l) in limbs.iter_mut().enumerate() {
            let mask = width.limb_mask(i);
            if mask != 0 {
                *l = rng.next_u64() & mask;
            }
        }
        BinElem(limbs)
    }

    pub fn masked(self, width: Width) -> BinElem {
        BinElem([
            self.0[0] & width.limb_mask(0),
            self.0[1] & width.limb_mask(1),
            self.0[2] & width.limb_mask(2),
        ])
    }

    /// True if no bit at or above `width` is set.
    pub fn fits(&self, width: Width) -> bool {
        self.masked(width) == *self
    }

    pub fn bit(&self, i: u32) -> bool {
        (self.0[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    pub fn count_ones(&self) -> u32 {
        self.0.iter().map(|l| l.count_ones()).sum()
    }

    /// `tag ∥ value`: the tag fills limb 0 and the value is shifted up by 64 bits.
    pub fn concat_tag(tag: u64, value: BinElem) -> BinElem {
        debug_assert_eq!(value.0[2], 0, "value wider than 128 bits");
        BinElem([tag, value.0[0], value.0[1]])
    }

    /// Inverse of [`BinElem::concat_tag`].
    pub fn split_tag(self) -> (u64, BinElem) {
        (self.0[0], BinElem([self.0[1], self.0[2], 0]))
    }

    /// Little-endian serialization truncated to `width`.
    pub fn write_le(&self, width: Width, out: &mut Vec<u8>) {
        let mut buf = [0u8; 24];
        for (i, l) in self.0.iter().enumerate() {
            buf[i * 8..i * 8 + 8].copy_from_slice(&l.to_le_bytes());
        }
        out.extend_from_slice(&buf[..width.bytes()]);
    }

    /// Reads `width.bytes()` bytes; bits above `width` are cleared.
    pub fn read_le(bytes: &[u8], width: Width) -> BinElem {
        let mut buf = [0u8; 24];
        buf[..width.bytes()].copy_from_slice(&bytes[..width.bytes()]);
        let limb = |i: usize| u64::from_le_bytes(buf[i * 8..i * 8 + 8].try_into().unwrap());
        BinElem([limb(0), limb(1), limb(2)]).masked(width)
    }

    pub fn to_le_bytes(&self, width: Width) -> Vec<u8> {
        let mut v = Vec::with_capacity(width.bytes());
        self.write_le(width, &mut v);
        v
    }
}

impl BitXor for BinElem {
    type Output = BinElem;

    #[inline]
    fn bitxor(self, rhs: BinElem) -> BinElem {
        BinElem([self.0[0] ^ rhs.0[0], self.0[1] ^ rhs.0[1], self.0[2] ^ rhs.0[2]])
    }
}

impl BitXorAssign for BinElem {
    #[inline]
    fn bitxor_assign(&mut self, rhs: BinElem) {
        self.0[0] ^= rhs.0[0];
        self.0[1] ^= rhs.0[1];
        self.0[2] ^= rhs.0[2];
    }
}

impl fmt::Debug for BinElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:016x}{:016x}{:016x}", self.0[2], self.0[1], self.0[0])
    }
}

/// One party's XOR share of a [`BinElem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinShare {
    pub value: BinElem,
    pub width: Width,
}

impl BinShare {
    pub fn reconstruct(a: BinShare, b: BinShare) -> BinElem {
        debug_assert_eq!(a.width, b.width);
        a.value ^ b.value
    }
}

/// Splits `v` into two XOR shares; the first is drawn uniformly from `rng`.
pub fn share_bin<R: RngCore + ?Sized>(v: BinElem, width: Width, rng: &mut R) -> (BinShare, BinShare) {
    let r = BinElem::random(rng, width);
    (
        BinShare { value: r, width },
        BinShare { value: r ^ v.masked(width), width },
    )
}

/// One party's additive share modulo 2^64.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ArithShare(pub u64);

impl ArithShare {
    pub fn reconstruct(a: ArithShare, b: ArithShare) -> u64 {
        a.0.wrapping_add(b.0)
    }
}

impl std::ops::Add for ArithShare {
    type Output = ArithShare;

    fn add(self, other: ArithShare) -> ArithShare {
        ArithShare(self.0.wrapping_add(other.0))
    }
}

/// Splits `v` into additive shares modulo 2^64.
pub fn share_arith<R: Rng + ?Sized>(v: u64, rng: &mut R) -> (ArithShare, ArithShare) {
    let r: u64 = rng.random();
    (ArithShare(r), ArithShare(v.wrapping_sub(r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn zero_shares_are_equal() {
        let mut rng = seeded(1);
        let (a, b) = share_bin(BinElem::ZERO, Width::W128, &mut rng);
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn all_ones_shares_are_complements() {
        let mut rng = seeded(2);
        let ones = BinElem::from_u64(u64::MAX);
        let (a, b) = share_bin(ones, Width::W64, &mut rng);
        assert_eq!(b.value.low_u64(), !a.value.low_u64());
    }

    #[test]
    fn reconstruct_exhaustive_8_bit() {
        let w = Width::new(8);
        let mut rng = seeded(3);
        for v in 0..=255u64 {
            let v = BinElem::from_u64(v);
            let (a, b) = share_bin(v, w, &mut rng);
            assert_eq!(BinShare::reconstruct(a, b), v);
            assert!(a.value.fits(w) && b.value.fits(w));
        }
    }

    #[test]
    fn sharing_replays_under_same_seed() {
        let v = BinElem::from_u128(0xdead_beef_0123_4567_89ab_cdef_5555_aaaa);
        let s1 = share_bin(v, Width::W128, &mut seeded(9));
        let s2 = share_bin(v, Width::W128, &mut seeded(9));
        assert_eq!(s1, s2);
    }

    #[test]
    fn first_share_passes_monobit_at_8_bits() {
        // 1000 sharings of 0xA5 at σ = 8: 8000 bits, the ones count of either
        // share must be within 4 standard deviations of n/2.
        let w = Width::new(8);
        let mut rng = seeded(0xA5);
        let (mut ones_a, mut ones_b) = (0u32, 0u32);
        for _ in 0..1000 {
            let (a, b) = share_bin(BinElem::from_u64(0xA5), w, &mut rng);
            ones_a += a.value.count_ones();
            ones_b += b.value.count_ones();
        }
        let n = 8000.0f64;
        let sd = (n * 0.25).sqrt();
        for ones in [ones_a, ones_b] {
            assert!((ones as f64 - n / 2.0).abs() < 4.0 * sd, "ones = {ones}");
        }
    }

    #[test]
    fn random_respects_width() {
        let mut rng = seeded(4);
        for bits in [1, 63, 64, 65, 80, 128, 144, 192] {
            let w = Width::new(bits);
            for _ in 0..50 {
                assert!(BinElem::random(&mut rng, w).fits(w));
            }
        }
    }

    #[test]
    fn serialization_is_little_endian_and_width_truncated() {
        let v = BinElem::from_u128(0x0102_0304_0506_0708_090a_0b0c_0d0e_0f10);
        let bytes = v.to_le_bytes(Width::ID);
        assert_eq!(bytes, vec![0x10, 0x0f, 0x0e, 0x0d, 0x0c, 0x0b, 0x0a, 0x09, 0x08, 0x07]);
        assert_eq!(BinElem::read_le(&bytes, Width::ID), v.masked(Width::ID));
    }

    #[test]
    fn tag_concatenation_splits_shares() {
        // XOR distributes over concatenation: splitting shares of tag ∥ value
        // at the tag boundary gives shares of each part. Exhaustive at 8 + 8 bits.
        let mut rng = seeded(5);
        for tag in 0..=255u64 {
            for value in (0..=255u64).step_by(17) {
                let whole = BinElem::concat_tag(tag, BinElem::from_u64(value));
                let (a, b) = share_bin(whole, Width::new(72), &mut rng);
                let (ta, va) = a.value.split_tag();
                let (tb, vb) = b.value.split_tag();
                assert_eq!(ta ^ tb, tag);
                assert_eq!((va ^ vb).low_u64(), value);
            }
        }
    }

    #[test]
    fn arithmetic_shares_wrap() {
        let mut rng = seeded(6);
        let (a, b) = share_arith(25, &mut rng);
        assert_eq!(ArithShare::reconstruct(a, b), 25);
        let (a, b) = share_arith(0, &mut rng);
        assert_eq!(a.0, b.0.wrapping_neg());
    }

    proptest::proptest! {
        #[test]
        fn bin_share_roundtrip(lo: u64, mid: u64, hi: u64, seed: u64) {
            let v = BinElem::from_limbs([lo, mid, hi]);
            let (a, b) = share_bin(v, Width::new(MAX_WIDTH), &mut seeded(seed));
            proptest::prop_assert_eq!(BinShare::reconstruct(a, b), v);
        }

        #[test]
        fn arith_reconstruction_commutes_and_associates(a: u64, b: u64, c: u64) {
            let (a, b, c) = (ArithShare(a), ArithShare(b), ArithShare(c));
            proptest::prop_assert_eq!(ArithShare::reconstruct(a, b), ArithShare::reconstruct(b, a));
            proptest::prop_assert_eq!((a + b) + c, a + (b + c));
        }
    }
}
