//! Equality-conditional selection.
//!
//! Each group holds `h` candidates `(e_i, v_i)` as shares. The output is a
//! sharing of the `v_i` whose tag `e_i` reconstructs to zero, or of a fresh
//! random value when no tag does. At most one tag per group may be zero;
//! with two zero tags the output is unspecified.
//!
//! Per group: `b_i = ssPEQT(e_i)`, `t_i = MUX(b_i, v_i)`, `b = ⊕ b_i`,
//! `t = Σ t_i`, then with a local random `r` each side computes
//! `z = MUX(b, t − r) + r`.

use crate::error::{ProtocolError, Result};
use crate::field::{BinElem, Width};
use crate::session::Party;

fn group_bits(bits: &[bool], h: usize) -> Vec<bool> {
    bits.chunks(h).map(|g| g.iter().fold(false, |a, &b| a ^ b)).collect()
}

fn check_shape(n_tags: usize, n_values: usize, h: usize) -> Result<()> {
    if h == 0 {
        return Err(ProtocolError::EmptySelection);
    }
    assert_eq!(n_tags, n_values, "one tag per candidate");
    assert_eq!(n_tags % h, 0, "candidates come in whole groups");
    Ok(())
}

/// Selection over XOR-shared values of `width` bits.
pub fn select_bin(
    party: &mut Party,
    tags: &[BinElem],
    tag_width: Width,
    values: &[BinElem],
    width: Width,
    h: usize,
) -> Result<Vec<BinElem>> {
    check_shape(tags.len(), values.len(), h)?;
    let side = party.side();
    let b = party.dealer().sspeqt(side, tags, tag_width)?;
    let gated: Vec<(bool, BinElem)> = b.iter().copied().zip(values.iter().copied()).collect();
    let t_i = party.dealer().mux_bin(side, &gated, width)?;
    let t: Vec<BinElem> = t_i.chunks(h).map(|g| g.iter().fold(BinElem::ZERO, |a, &x| a ^ x)).collect();
    let r: Vec<BinElem> = (0..t.len()).map(|_| BinElem::random(party.rng(), width)).collect();
    let second: Vec<(bool, BinElem)> = group_bits(&b, h).into_iter().zip(t.iter().zip(&r).map(|(&t, &r)| t ^ r)).collect();
    let m = party.dealer().mux_bin(side, &second, width)?;
    Ok(m.into_iter().zip(r).map(|(m, r)| m ^ r).collect())
}

/// Selection over arithmetic shares modulo 2^64.
pub fn select_arith(party: &mut Party, tags: &[BinElem], tag_width: Width, values: &[u64], h: usize) -> Result<Vec<u64>> {
    check_shape(tags.len(), values.len(), h)?;
    let side = party.side();
    let b = party.dealer().sspeqt(side, tags, tag_width)?;
    let gated: Vec<(bool, u64)> = b.iter().copied().zip(values.iter().copied()).collect();
    let t_i = party.dealer().mux_arith(side, &gated)?;
    let t: Vec<u64> = t_i.chunks(h).map(|g| g.iter().fold(0u64, |a, &x| a.wrapping_add(x))).collect();
    let r: Vec<u64> = (0..t.len()).map(|_| rand::Rng::random(party.rng())).collect();
    let second: Vec<(bool, u64)> = group_bits(&b, h).into_iter().zip(t.iter().zip(&r).map(|(&t, &r)| t.wrapping_sub(r))).collect();
    let m = party.dealer().mux_arith(side, &second)?;
    Ok(m.into_iter().zip(r).map(|(m, r)| m.wrapping_add(r)).collect())
}
