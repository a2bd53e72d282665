//! Plain evaluation of the alternating-moduli PRF
//! `F(k, x) = B ·₂ (A ·₃ [k ∘₂ (G ·₂ [x ∥ 1])])`.
//!
//! Dimensions: x is κ = 128 bits, G is 4κ × (κ+1) over F2, the key is 4κ bits,
//! A is 2κ × 4κ over F3 and B is t_out × 2κ over F2 with t_out ≤ 192.

use std::ops::{BitXor, BitXorAssign};

use rand::{Rng, RngCore};
use sha2::{Digest, Sha256};

use crate::field::{BinElem, Width, MAX_WIDTH};
use crate::rng;

pub const INPUT_BITS: usize = 128;
pub const KEY_BITS: usize = 512;
pub const MID_BITS: usize = 256;

const KEY_WORDS: usize = KEY_BITS / 64;
const MID_WORDS: usize = MID_BITS / 64;

/// Hashes an arbitrary byte string to a κ-bit PRF input: the first 16 bytes
/// of its SHA-256 digest read little-endian.
pub fn hash_to_input(bytes: &[u8]) -> u128 {
    let digest = Sha256::digest(bytes);
    u128::from_le_bytes(digest[..16].try_into().unwrap())
}

/// A 4κ-bit PRF key. Shares combine by XOR.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct AmPrfKey([u64; KEY_WORDS]);

impl AmPrfKey {
    pub const ZERO: AmPrfKey = AmPrfKey([0; KEY_WORDS]);

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> AmPrfKey {
        let mut k = [0u64; KEY_WORDS];
        rng.fill(&mut k[..]);
        AmPrfKey(k)
    }

    pub fn from_words(words: [u64; KEY_WORDS]) -> AmPrfKey {
        AmPrfKey(words)
    }

    pub fn words(&self) -> [u64; KEY_WORDS] {
        self.0
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.0.iter().flat_map(|w| w.to_le_bytes()).collect()
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<AmPrfKey> {
        if bytes.len() != KEY_BITS / 8 {
            return None;
        }
        let mut k = [0u64; KEY_WORDS];
        for (w, c) in k.iter_mut().zip(bytes.chunks_exact(8)) {
            *w = u64::from_le_bytes(c.try_into().unwrap());
        }
        Some(AmPrfKey(k))
    }
}

impl BitXor for AmPrfKey {
    type Output = AmPrfKey;

    fn bitxor(mut self, rhs: AmPrfKey) -> AmPrfKey {
        self ^= rhs;
        self
    }
}

impl BitXorAssign for AmPrfKey {
    fn bitxor_assign(&mut self, rhs: AmPrfKey) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a ^= b;
        }
    }
}

/// Public matrices, expanded from a 128-bit seed.
pub struct AmPrfMatrices {
    seed: u128,
    /// Columns of G; column κ multiplies the constant 1.
    g_cols: Vec<[u64; KEY_WORDS]>,
    /// A split into bit-planes: `a_one[i]` marks entries equal to 1, `a_two[i]` entries equal to 2.
    a_one: Vec<[u64; KEY_WORDS]>,
    a_two: Vec<[u64; KEY_WORDS]>,
    b_rows: Vec<[u64; MID_WORDS]>,
}

impl std::fmt::Debug for AmPrfMatrices {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AmPrfMatrices {{ seed: {:#034x} }}", self.seed)
    }
}

impl AmPrfMatrices {
    pub fn expand(seed: u128) -> AmPrfMatrices {
        let mut prg = rng::derive("amprf-matrices", &seed.to_le_bytes());
        let mut g_cols = vec![[0u64; KEY_WORDS]; INPUT_BITS + 1];
        for col in g_cols.iter_mut() {
            prg.fill(&mut col[..]);
        }
        let mut a_one = vec![[0u64; KEY_WORDS]; MID_BITS];
        let mut a_two = vec![[0u64; KEY_WORDS]; MID_BITS];
        for i in 0..MID_BITS {
            for j in 0..KEY_BITS {
                match prg.random_range(0..3u8) {
                    1 => a_one[i][j / 64] |= 1 << (j % 64),
                    2 => a_two[i][j / 64] |= 1 << (j % 64),
                    _ => {}
                }
            }
        }
        let mut b_rows = vec![[0u64; MID_WORDS]; MAX_WIDTH as usize];
        for row in b_rows.iter_mut() {
            prg.fill(&mut row[..]);
        }
        AmPrfMatrices { seed, g_cols, a_one, a_two, b_rows }
    }

    pub fn seed(&self) -> u128 {
        self.seed
    }

    /// Entry (i, j) of G, with j = κ the column multiplying the constant 1.
    pub fn g_entry(&self, i: usize, j: usize) -> u8 {
        (self.g_cols[j][i / 64] >> (i % 64) & 1) as u8
    }

    /// Entry (i, j) of A as a residue in {0, 1, 2}.
    pub fn a_entry(&self, i: usize, j: usize) -> u8 {
        let one = self.a_one[i][j / 64] >> (j % 64) & 1;
        let two = self.a_two[i][j / 64] >> (j % 64) & 1;
        (one + 2 * two) as u8
    }

    pub fn b_entry(&self, i: usize, j: usize) -> u8 {
        (self.b_rows[i][j / 64] >> (j % 64) & 1) as u8
    }

    /// `F(k, x)` truncated to `width` output bits.
    pub fn eval(&self, key: &AmPrfKey, x: u128, width: Width) -> BinElem {
        let mut gx = self.g_cols[INPUT_BITS];
        let mut rest = x;
        while rest != 0 {
            let c = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            for (a, b) in gx.iter_mut().zip(&self.g_cols[c]) {
                *a ^= b;
            }
        }
        let mut v = [0u64; KEY_WORDS];
        for i in 0..KEY_WORDS {
            v[i] = gx[i] & key.0[i];
        }

        let mut y = [0u64; MID_WORDS];
        for i in 0..MID_BITS {
            let (a1, a2) = (&self.a_one[i], &self.a_two[i]);
            let mut ones = 0u32;
            let mut twos = 0u32;
            for w in 0..KEY_WORDS {
                ones += (a1[w] & v[w]).count_ones();
                twos += (a2[w] & v[w]).count_ones();
            }
            // residue 1 maps to bit 1; residues 0 and 2 map to bit 0
            if (ones + 2 * twos) % 3 == 1 {
                y[i / 64] |= 1 << (i % 64);
            }
        }

        let mut out = [0u64; 3];
        for i in 0..width.bits() as usize {
            let row = &self.b_rows[i];
            let par = (row[0] & y[0]) ^ (row[1] & y[1]) ^ (row[2] & y[2]) ^ (row[3] & y[3]);
            out[i / 64] |= ((par.count_ones() & 1) as u64) << (i % 64);
        }
        BinElem::from_limbs(out)
    }
}
