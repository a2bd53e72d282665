//! The ideal functionalities as plain functions of both parties' inputs and
//! the dealer's randomness. Results are returned as `(to_first, to_second)`,
//! where the first party is the one named S in the functionality.

use rand::{Rng, RngCore};

use crate::amprf::{hash_to_input, AmPrfKey, AmPrfMatrices};
use crate::field::{BinElem, Width};

/// Shares of `F_k(x_i)` for each query. The key holder is the first party.
pub fn so_oprf<R: RngCore + ?Sized>(
    mats: &AmPrfMatrices,
    key: &AmPrfKey,
    xs: &[u128],
    width: Width,
    rng: &mut R,
) -> (Vec<BinElem>, Vec<BinElem>) {
    xs.iter()
        .map(|&x| {
            let y = mats.eval(key, x, width);
            let s = BinElem::random(rng, width);
            (s, s ^ y)
        })
        .unzip()
}

/// `F_{k^S ⊕ k^R}(H(x^S ⊕ x^R))`, output to the second party only.
pub fn si_oprf(
    mats: &AmPrfMatrices,
    key_first: &AmPrfKey,
    key_second: &AmPrfKey,
    xs_first: &[BinElem],
    xs_second: &[BinElem],
    in_width: Width,
    out_width: Width,
) -> Vec<BinElem> {
    let key = *key_first ^ *key_second;
    xs_first
        .iter()
        .zip(xs_second)
        .map(|(a, b)| mats.eval(&key, hash_to_input(&(*a ^ *b).to_le_bytes(in_width)), out_width))
        .collect()
}

/// A message slot of an OT pair; `None` is the ⊥ sentinel.
pub type OtMessage = Option<Vec<u8>>;

/// The second party learns `z_{b_j}`; the first party learns nothing.
pub fn ot(pairs: &[(OtMessage, OtMessage)], bits: &[bool]) -> Vec<OtMessage> {
    pairs.iter().zip(bits).map(|((z0, z1), &b)| if b { z1.clone() } else { z0.clone() }).collect()
}

/// Plain equality bits, output to the second party.
pub fn peqt(a: &[BinElem], c: &[BinElem]) -> Vec<bool> {
    a.iter().zip(c).map(|(x, y)| x == y).collect()
}

/// XOR-shared equality bit: `r1` to the first party, uniform `r0` to the second.
pub fn sspeqt<R: RngCore + ?Sized>(x0: &[BinElem], x1: &[BinElem], rng: &mut R) -> (Vec<bool>, Vec<bool>) {
    x0.iter()
        .zip(x1)
        .map(|(a, b)| {
            let r0: bool = rng.random();
            (r0 ^ (a == b), r0)
        })
        .unzip()
}

/// Shares of `(x0 ⊕ x1)` if `b0 ⊕ b1 = 1`, else shares of zero, over F_{2^σ}.
pub fn mux_bin<R: RngCore + ?Sized>(
    first: &[(bool, BinElem)],
    second: &[(bool, BinElem)],
    width: Width,
    rng: &mut R,
) -> (Vec<BinElem>, Vec<BinElem>) {
    first
        .iter()
        .zip(second)
        .map(|(&(b0, x0), &(b1, x1))| {
            let r0 = BinElem::random(rng, width);
            let r1 = if b0 ^ b1 { x0 ^ x1 ^ r0 } else { r0 };
            (r1, r0)
        })
        .unzip()
}

/// Arithmetic MUX over Z_{2^64}.
pub fn mux_arith<R: RngCore + ?Sized>(first: &[(bool, u64)], second: &[(bool, u64)], rng: &mut R) -> (Vec<u64>, Vec<u64>) {
    first
        .iter()
        .zip(second)
        .map(|(&(b0, x0), &(b1, x1))| {
            let r0: u64 = rng.random();
            let r1 = if b0 ^ b1 { x0.wrapping_add(x1).wrapping_sub(r0) } else { r0.wrapping_neg() };
            (r1, r0)
        })
        .unzip()
}

/// Arithmetic shares modulo 2^64 of the integer `v^S ⊕ v^R` (width ≤ 64).
pub fn b2a<R: RngCore + ?Sized>(vs: &[BinElem], vr: &[BinElem], rng: &mut R) -> (Vec<u64>, Vec<u64>) {
    vs.iter()
        .zip(vr)
        .map(|(a, b)| {
            let v = (*a ^ *b).low_u64();
            let s: u64 = rng.random();
            (s, v.wrapping_sub(s))
        })
        .unzip()
}

/// `[d^S + d^R ≤ bound]` as an unsigned comparison, output to the second party.
pub fn interval(ds: &[u64], dr: &[u64], bound: u64) -> Vec<bool> {
    ds.iter().zip(dr).map(|(a, b)| a.wrapping_add(*b) <= bound).collect()
}

/// Shares of `e · s` mod 2^64 for public `e` (first party) and a share `s` (second party).
pub fn mult<R: RngCore + ?Sized>(es: &[u64], ss: &[u64], rng: &mut R) -> (Vec<u64>, Vec<u64>) {
    es.iter()
        .zip(ss)
        .map(|(e, s)| {
            let a: u64 = rng.random();
            (a, e.wrapping_mul(*s).wrapping_sub(a))
        })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn so_oprf_reconstructs_to_prf() {
        let mats = AmPrfMatrices::expand(1);
        let mut prg = rng::seeded(1);
        let key = AmPrfKey::random(&mut prg);
        let xs = [hash_to_input(b"a"), hash_to_input(b"b"), hash_to_input(b"a")];
        let (s, r) = so_oprf(&mats, &key, &xs, Width::W64, &mut prg);
        for i in 0..3 {
            assert_eq!(s[i] ^ r[i], mats.eval(&key, xs[i], Width::W64));
        }
        // repeated inputs: same value, fresh shares
        assert_eq!(s[0] ^ r[0], s[2] ^ r[2]);
        assert_ne!(s[0], s[2]);
        let (e0, e1) = so_oprf(&mats, &key, &[], Width::W64, &mut prg);
        assert!(e0.is_empty() && e1.is_empty());
    }

    #[test]
    fn si_oprf_is_invariant_under_resharing() {
        let mats = AmPrfMatrices::expand(2);
        let mut prg = rng::seeded(2);
        let key = AmPrfKey::random(&mut prg);
        let x = BinElem::from_u64(999);
        let direct = mats.eval(&key, hash_to_input(&x.to_le_bytes(Width::ID)), Width::ID);
        for _ in 0..5 {
            let ks = AmPrfKey::random(&mut prg);
            let xs = BinElem::random(&mut prg, Width::ID);
            let y = si_oprf(&mats, &ks, &(ks ^ key), &[xs], &[xs ^ x], Width::ID, Width::ID);
            assert_eq!(y, vec![direct]);
        }
        // equal key shares give the zero key
        let ks = AmPrfKey::random(&mut prg);
        let y = si_oprf(&mats, &ks, &ks, &[x], &[BinElem::ZERO], Width::ID, Width::ID);
        assert_eq!(y[0], mats.eval(&AmPrfKey::ZERO, hash_to_input(&x.to_le_bytes(Width::ID)), Width::ID));
    }

    #[test]
    fn ot_selects() {
        let q = Some(b"q".to_vec());
        assert_eq!(ot(&[(None, q.clone())], &[true]), vec![q.clone()]);
        assert_eq!(ot(&[(None, q)], &[false]), vec![None]);
        let mut prg = rng::seeded(3);
        let pairs: Vec<_> = (0..100u8).map(|i| (Some(vec![i]), Some(vec![i, 1]))).collect();
        let bits: Vec<bool> = (0..100).map(|_| prg.random()).collect();
        let out = ot(&pairs, &bits);
        for i in 0..100 {
            assert_eq!(out[i], if bits[i] { pairs[i].1.clone() } else { pairs[i].0.clone() });
        }
    }

    #[test]
    fn peqt_and_sspeqt() {
        let a = [BinElem::from_u64(1), BinElem::from_u64(2)];
        let c = [BinElem::from_u64(1), BinElem::from_u64(3)];
        assert_eq!(peqt(&a, &c), vec![true, false]);
        let (r1, r0) = sspeqt(&a, &c, &mut rng::seeded(4));
        assert_eq!([r1[0] ^ r0[0], r1[1] ^ r0[1]], [true, false]);
        assert_eq!(sspeqt(&a, &c, &mut rng::seeded(4)), (r1, r0));
    }

    #[test]
    fn mux_truth_table() {
        let mut prg = rng::seeded(5);
        let (x0, x1) = (BinElem::from_u64(3), BinElem::from_u64(5));
        for b0 in [false, true] {
            for b1 in [false, true] {
                let (s, r) = mux_bin(&[(b0, x0)], &[(b1, x1)], Width::W64, &mut prg);
                let want = if b0 ^ b1 { BinElem::from_u64(6) } else { BinElem::ZERO };
                assert_eq!(s[0] ^ r[0], want);
                let (s, r) = mux_arith(&[(b0, 3)], &[(b1, 5)], &mut prg);
                assert_eq!(s[0].wrapping_add(r[0]), if b0 ^ b1 { 8 } else { 0 });
            }
        }
    }

    #[test]
    fn b2a_interval_mult() {
        let mut prg = rng::seeded(6);
        let (s, r) = b2a(&[BinElem::from_u64(0), BinElem::from_u64(25 ^ 7)], &[BinElem::ZERO, BinElem::from_u64(7)], &mut prg);
        assert_eq!(s[0].wrapping_add(r[0]), 0);
        assert_eq!(s[1].wrapping_add(r[1]), 25);
        assert_eq!(interval(&[20, 21], &[5, 5], 25), vec![true, false]);
        for _ in 0..1000 {
            let (a, b): (u64, u64) = (prg.random_range(0..1 << 40), prg.random_range(0..1 << 40));
            let bound = prg.random_range(0..1 << 41);
            let s: u64 = prg.random();
            assert_eq!(interval(&[a.wrapping_add(s)], &[b.wrapping_sub(s)], bound)[0], a + b <= bound);
        }
        let (m0, m1) = mult(&[0, 1, 7], &[9, 9, 9], &mut prg);
        let rec: Vec<u64> = m0.iter().zip(&m1).map(|(a, b)| a.wrapping_add(*b)).collect();
        assert_eq!(rec, vec![0, 9, 63]);
    }
}
