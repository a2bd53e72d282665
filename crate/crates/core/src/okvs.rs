//! Oblivious key-value store built from a random binary band matrix.
//!
//! Each key selects a start column and a w-bit band; its decoded value is the
//! XOR of the cells under the set bits of the band. Encoding solves the banded
//! linear system by elimination over rows sorted by start column.

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::amprf::hash_to_input;
use crate::field::{BinElem, Width};

/// Band width in columns.
pub const BAND: usize = 80;
/// Encoding attempts before giving up.
pub const MAX_ATTEMPTS: usize = 8;

const BAND_MASK: u128 = (1u128 << BAND) - 1;

/// A key pre-hashed to 128 bits. The same digest doubles as the PRF input.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct KeyHash(pub u128);

impl KeyHash {
    pub fn of(bytes: &[u8]) -> KeyHash {
        KeyHash(hash_to_input(bytes))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OkvsError {
    #[error("duplicate key in encoding list")]
    DuplicateKey,
    #[error("encoding failed after {0} attempts")]
    RetriesExhausted(usize),
    #[error("malformed table: {0}")]
    Malformed(&'static str),
}

/// Table length for `n` pairs.
pub fn table_len(n: usize) -> usize {
    let core = if n < 1 << 10 { (5 * n).div_ceil(4) } else { (11 * n).div_ceil(10) };
    core + BAND
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OkvsTable {
    seed: u128,
    n_kv: usize,
    width: Width,
    cells: Vec<BinElem>,
}

#[inline]
fn wymum(a: u64, b: u64) -> u64 {
    let r = (a as u128) * (b as u128);
    (r as u64) ^ ((r >> 64) as u64)
}

/// Start column and band for `key` under `seed`.
#[inline]
fn row_of(seed: u128, key: KeyHash, span: usize) -> (usize, u128) {
    let x = key.0 ^ seed;
    let (lo, hi) = (x as u64, (x >> 64) as u64);
    let h0 = wymum(lo ^ 0xa076_1d64_78bd_642f, hi ^ 0xe703_7ed1_a0b4_28db);
    let h1 = wymum(h0 ^ 0x8ebc_6af0_9c88_c6e3, lo ^ 0x5899_65cc_7537_4cc3);
    let h2 = wymum(h1 ^ 0x1d8e_4e27_c47d_124f, hi ^ 0xa076_1d64_78bd_642f);
    let start = ((h0 as u128 * span as u128) >> 64) as usize;
    // bit 0 is forced so that no row is identically zero
    let band = ((h1 as u128 | (h2 as u128) << 64) & BAND_MASK) | 1;
    (start, band)
}

struct Row {
    start: usize,
    band: u128,
    value: BinElem,
}

impl OkvsTable {
    /// Encodes `pairs` so that `decode(k) = v` for each pair. Values must fit `width`.
    pub fn encode<R: RngCore + ?Sized>(
        pairs: &[(KeyHash, BinElem)],
        width: Width,
        rng: &mut R,
    ) -> Result<OkvsTable, OkvsError> {
        let m = table_len(pairs.len());
        let span = m - BAND + 1;
        for _ in 0..MAX_ATTEMPTS {
            let seed: u128 = rng.random();
            let mut rows: Vec<Row> = pairs
                .iter()
                .map(|&(k, value)| {
                    let (start, band) = row_of(seed, k, span);
                    Row { start, band, value: value.masked(width) }
                })
                .collect();
            rows.sort_unstable_by_key(|r| (r.start, r.band));
            if rows.windows(2).any(|w| w[0].start == w[1].start && w[0].band == w[1].band) {
                return Err(OkvsError::DuplicateKey);
            }
            if let Some(cells) = solve(&mut rows, m, width, rng) {
                return Ok(OkvsTable { seed, n_kv: pairs.len(), width, cells });
            }
        }
        Err(OkvsError::RetriesExhausted(MAX_ATTEMPTS))
    }

    /// Convenience form hashing raw byte keys.
    pub fn encode_bytes<R: RngCore + ?Sized>(
        pairs: &[(Vec<u8>, BinElem)],
        width: Width,
        rng: &mut R,
    ) -> Result<OkvsTable, OkvsError> {
        let hashed: Vec<_> = pairs.iter().map(|(k, v)| (KeyHash::of(k), *v)).collect();
        Self::encode(&hashed, width, rng)
    }

    pub fn decode(&self, key: KeyHash) -> BinElem {
        let (start, mut band) = row_of(self.seed, key, self.cells.len() - BAND + 1);
        let mut acc = BinElem::ZERO;
        while band != 0 {
            let k = band.trailing_zeros() as usize;
            band &= band - 1;
            acc ^= self.cells[start + k];
        }
        acc
    }

    pub fn decode_bytes(&self, key: &[u8]) -> BinElem {
        self.decode(KeyHash::of(key))
    }

    pub fn seed(&self) -> u128 {
        self.seed
    }

    pub fn n_kv(&self) -> usize {
        self.n_kv
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn width(&self) -> Width {
        self.width
    }

    pub fn cells(&self) -> &[BinElem] {
        &self.cells
    }

    /// Size of the wire encoding in bytes.
    pub fn wire_len(&self) -> usize {
        12 + 16 + self.cells.len() * self.width.bytes()
    }

    /// Geometry (n_kv, M, w as u32) ∥ seed ∥ cells, all little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.wire_len());
        out.extend_from_slice(&(self.n_kv as u32).to_le_bytes());
        out.extend_from_slice(&(self.cells.len() as u32).to_le_bytes());
        out.extend_from_slice(&(BAND as u32).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        for c in &self.cells {
            c.write_le(self.width, &mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], width: Width) -> Result<OkvsTable, OkvsError> {
        if bytes.len() < 28 {
            return Err(OkvsError::Malformed("short header"));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
        let (n_kv, m, w) = (u32_at(0), u32_at(4), u32_at(8));
        if w != BAND {
            return Err(OkvsError::Malformed("band width"));
        }
        if m != table_len(n_kv) {
            return Err(OkvsError::Malformed("geometry"));
        }
        let seed = u128::from_le_bytes(bytes[12..28].try_into().unwrap());
        let body = &bytes[28..];
        if body.len() != m * width.bytes() {
            return Err(OkvsError::Malformed("cell count"));
        }
        let cells = body.chunks_exact(width.bytes()).map(|c| BinElem::read_le(c, width)).collect();
        Ok(OkvsTable { seed, n_kv, width, cells })
    }
}

/// Banded elimination followed by back-substitution. Returns `None` when the
/// system is inconsistent.
fn solve<R: RngCore + ?Sized>(rows: &mut [Row], m: usize, width: Width, rng: &mut R) -> Option<Vec<BinElem>> {
    let mut pivots = vec![usize::MAX; rows.len()];
    for i in 0..rows.len() {
        if rows[i].band == 0 {
            if rows[i].value.is_zero() {
                continue;
            }
            return None;
        }
        let (start_i, band_i, value_i) = (rows[i].start, rows[i].band, rows[i].value);
        let pivot = start_i + band_i.trailing_zeros() as usize;
        pivots[i] = pivot;
        for row in rows[i + 1..].iter_mut() {
            if row.start > pivot {
                break;
            }
            if row.band >> (pivot - row.start) & 1 == 1 {
                row.band ^= band_i >> (row.start - start_i);
                row.value ^= value_i;
            }
        }
    }

    let mut cells: Vec<BinElem> = (0..m).map(|_| BinElem::random(rng, width)).collect();
    for (i, row) in rows.iter().enumerate().rev() {
        let pivot = pivots[i];
        if pivot == usize::MAX {
            continue;
        }
        let mut acc = row.value;
        let mut band = row.band & !(1u128 << (pivot - row.start));
        while band != 0 {
            let k = band.trailing_zeros() as usize;
            band &= band - 1;
            acc ^= cells[row.start + k];
        }
        cells[pivot] = acc;
    }
    Some(cells)
}
