//! End-to-end fuzzy PSI: fuzzy mapping, then refined filtering of each
//! sender element against the receiver element that shares its identifier,
//! then an OT that hands matched sender elements to the receiver.
//!
//! The refined filter programs, per receiver element and dimension, the
//! admissible coordinates (or prefixes of them) under the element's
//! identifier. The sender queries its own coordinates under its identifier,
//! so only identifier-matched pairs can decode programmed values.

use rand::RngCore;

use crate::eqsel;
use crate::error::Result;
use crate::field::{BinElem, Width};
use crate::fmap::{self, tag_width};
use crate::functionalities::Side;
use crate::harness::check_disjoint;
use crate::keys::{Domain, KeyBuilder};
use crate::okvs::KeyHash;
use crate::params::{ParamError, Params};
use crate::point::{Point, PointSet};
use crate::prefix::{all_prefix, decompose, PrefixStr};
use crate::session::{Party, Role, Variant};
use crate::soopprf::{self, ProgrammedList};

/// Runs the variant selected by the session parameters. The receiver gets
/// the matched sender elements in sender index order; the sender gets `None`.
/// On failure the peer and the dealer are sent an abort notice.
pub fn run(party: &mut Party, set: &PointSet) -> Result<Option<Vec<Point>>> {
    let out = check_input(party.params(), party.role(), set).and_then(|()| match Variant::of(party.params()) {
        Variant::Linf => fpsi_linf(party, set),
        Variant::Lp => fpsi_lp(party, set),
        Variant::PrefixLinf => fpsi_linf_prefix(party, set),
        Variant::PrefixLp => fpsi_lp_prefix(party, set),
    });
    out.map_err(|e| {
        let e = e.in_phase(party.phase());
        party.abort(&e.to_string());
        e
    })
}

fn check_input(params: &Params, role: Role, set: &PointSet) -> Result<()> {
    let expected = match role {
        Role::Sender => params.m,
        Role::Receiver => params.n,
    };
    if set.len() != expected {
        return Err(ParamError::SetSizeMismatch { expected, actual: set.len() }.into());
    }
    params.validate_set(set)?;
    if let Err(w) = check_disjoint(set, params.delta) {
        return Err(ParamError::ProjectionOverlap { element: w.element, other: w.others[0] }.into());
    }
    Ok(())
}

fn value_width(params: &Params) -> Width {
    Width::new(params.value_bits)
}

fn xor_groups(xs: &[BinElem], g: usize) -> Vec<BinElem> {
    xs.chunks(g).map(|c| c.iter().fold(BinElem::ZERO, |a, &x| a ^ x)).collect()
}

fn add_groups(xs: &[u64], g: usize) -> Vec<u64> {
    xs.chunks(g).map(|c| c.iter().fold(0u64, |a, &x| a.wrapping_add(x))).collect()
}

/// Programs `list` as the receiver, or queries `queries` as the sender.
fn filter_shares(party: &mut Party, list: Option<ProgrammedList>, queries: Option<Vec<KeyHash>>, n_queries: usize, width: Width) -> Result<Vec<BinElem>> {
    match (list, queries) {
        (Some(list), None) => Ok(soopprf::send(party, &list, n_queries)?.shares),
        (None, Some(q)) => soopprf::receive(party, &q, width),
        _ => unreachable!("exactly one of list and queries"),
    }
}

/// OT of the sender's elements under the receiver's match bits.
fn deliver(party: &mut Party, set: &PointSet, bits: Vec<bool>) -> Result<Option<Vec<Point>>> {
    party.set_phase("output");
    match party.role() {
        Role::Sender => {
            let pairs: Vec<_> = set.iter().map(|q| (None, Some(q.to_bytes()))).collect();
            party.dealer().ot_send(&pairs)?;
            Ok(None)
        }
        Role::Receiver => {
            let msgs = party.dealer().ot_receive(&bits)?;
            Ok(Some(msgs.into_iter().flatten().map(|b| Point::from_bytes(&b)).collect()))
        }
    }
}

/// Receiver list for the non-prefix filters: every coordinate within δ of
/// `w_k`, keyed under `ID_w`, mapped to `value(|t|)`.
fn coord_list(ids: &[BinElem], set: &PointSet, params: &Params, width: Width, value: impl Fn(u64) -> u64) -> ProgrammedList {
    let id_w = Width::new(params.id_bits);
    let delta = params.delta;
    let mut list = ProgrammedList::with_capacity(width, set.len() * params.d * (2 * delta as usize + 1));
    let table: Vec<BinElem> = (0..=delta).map(|t| BinElem::from_u64(value(t))).collect();
    for (id, w) in ids.iter().zip(set) {
        let mut kb = KeyBuilder::new(Domain::Filter, Some((id, id_w)));
        for (k, &x) in w.coords().iter().enumerate() {
            for y in x - delta..=x + delta {
                list.push_hashed(kb.coord(k, y), table[y.abs_diff(x) as usize]);
            }
        }
    }
    list
}

fn coord_queries(ids: &[BinElem], set: &PointSet, params: &Params) -> Vec<KeyHash> {
    let id_w = Width::new(params.id_bits);
    let mut out = Vec::with_capacity(set.len() * params.d);
    for (id, q) in ids.iter().zip(set) {
        let mut kb = KeyBuilder::new(Domain::Filter, Some((id, id_w)));
        out.extend(q.coords().iter().enumerate().map(|(k, &x)| kb.coord(k, x)));
    }
    out
}

/// FPSI under L∞.
pub fn fpsi_linf(party: &mut Party, set: &PointSet) -> Result<Option<Vec<Point>>> {
    let params = party.params().clone();
    party.set_phase("fmap");
    let ids = fmap::fmap(party, set)?;
    party.set_phase("filter");
    let vw = value_width(&params);
    let shares = match party.role() {
        Role::Receiver => filter_shares(party, Some(coord_list(&ids, set, &params, vw, |_| 0)), None, params.m * params.d, vw)?,
        Role::Sender => filter_shares(party, None, Some(coord_queries(&ids, set, &params)), 0, vw)?,
    };
    let r = xor_groups(&shares, params.d);
    let side = party.side();
    let bits = party.dealer().peqt(side, &r, vw)?;
    deliver(party, set, bits)
}

/// FPSI under L_p for the session's exponent p.
pub fn fpsi_lp(party: &mut Party, set: &PointSet) -> Result<Option<Vec<Point>>> {
    let params = party.params().clone();
    let p = params.metric.exponent().expect("L_p session");
    party.set_phase("fmap");
    let ids = fmap::fmap(party, set)?;
    party.set_phase("filter");
    let vw = value_width(&params);
    let shares = match party.role() {
        Role::Receiver => {
            let list = coord_list(&ids, set, &params, vw, |t| t.pow(p));
            filter_shares(party, Some(list), None, params.m * params.d, vw)?
        }
        Role::Sender => filter_shares(party, None, Some(coord_queries(&ids, set, &params)), 0, vw)?,
    };
    let side = party.side();
    let arith = party.dealer().b2a(side, &shares, vw)?;
    let dist = add_groups(&arith, params.d);
    let bits = party.dealer().interval(side, &dist, params.delta_pow())?;
    deliver(party, set, bits)
}

/// Public size of the prefix L∞ filter list.
pub fn prefix_list_size(params: &Params) -> usize {
    params.n * params.d * (2 + params.log_delta() as usize)
}

/// FPSI under L∞ with prefix-encoded intervals.
pub fn fpsi_linf_prefix(party: &mut Party, set: &PointSet) -> Result<Option<Vec<Point>>> {
    let params = party.params().clone();
    party.set_phase("fmap");
    let ids = fmap::fmap_prefix(party, set)?;
    party.set_phase("filter");
    let vw = value_width(&params);
    let width = vw.with_tag();
    let id_w = Width::new(params.id_bits);
    let h = 2 + params.log_delta() as usize;
    let shares = match party.role() {
        Role::Receiver => {
            let mut list = ProgrammedList::with_capacity(width, prefix_list_size(&params));
            for (id, w) in ids.iter().zip(set) {
                let mut kb = KeyBuilder::new(Domain::FilterPrefix, Some((id, id_w)));
                for (k, &x) in w.coords().iter().enumerate() {
                    for pre in decompose(x - params.delta, x + params.delta, params.bits)? {
                        list.push_hashed(kb.prefix(k, None, &pre), BinElem::ZERO);
                    }
                }
            }
            list.pad_to(prefix_list_size(&params), party.rng())?;
            filter_shares(party, Some(list), None, params.m * params.d * h, width)?
        }
        Role::Sender => {
            let mut queries = Vec::with_capacity(params.m * params.d * h);
            for (id, q) in ids.iter().zip(set) {
                let mut kb = KeyBuilder::new(Domain::FilterPrefix, Some((id, id_w)));
                for (k, &x) in q.coords().iter().enumerate() {
                    for pre in all_prefix(x, params.bits, fmap::max_wildcards(&params))? {
                        queries.push(kb.prefix(k, None, &pre));
                    }
                }
            }
            filter_shares(party, None, Some(queries), 0, width)?
        }
    };
    let tw = tag_width(&params);
    let (tags, values): (Vec<BinElem>, Vec<BinElem>) = shares
        .iter()
        .map(|s| {
            let (t, v) = s.split_tag();
            (BinElem::from_u64(t).masked(tw), v.masked(vw))
        })
        .unzip();
    let per_dim = eqsel::select_bin(party, &tags, tw, &values, vw, h)?;
    let r = xor_groups(&per_dim, params.d);
    let side = party.side();
    let bits = party.dealer().peqt(side, &r, vw)?;
    deliver(party, set, bits)
}

/// Public size of the per-half prefix lists: `n · d · 2 · (1 + log δ)`.
pub fn list_p_size(params: &Params) -> usize {
    params.n * params.d * 2 * (1 + params.log_delta() as usize)
}

/// Table width of the L_p prefix lists: tag ∥ |w* − w| (∥ |w* − w|² for p = 2).
pub fn list_p_width(params: &Params, p: u32) -> Width {
    match p {
        1 => value_width(params).with_tag(),
        _ => Width::new(128 + params.value_bits),
    }
}

/// Receiver's L_p prefix list. Half 0 decomposes `[w − δ, w]` and stores the
/// gap from each prefix's upper bound to `w`; half 1 decomposes `[w + 1, w + δ]`
/// and stores the gap from `w` to each prefix's lower bound.
pub fn get_list_p<R: RngCore + ?Sized>(ids: &[BinElem], set: &PointSet, params: &Params, p: u32, rng: &mut R) -> Result<ProgrammedList> {
    let id_w = Width::new(params.id_bits);
    let (delta, u) = (params.delta, params.bits);
    let mut list = ProgrammedList::with_capacity(list_p_width(params, p), list_p_size(params));
    for (id, w) in ids.iter().zip(set) {
        let mut kb = KeyBuilder::new(Domain::FilterPrefixLp, Some((id, id_w)));
        for (k, &x) in w.coords().iter().enumerate() {
            let halves = [(0u8, decompose(x - delta, x, u)?), (1u8, decompose(x + 1, x + delta, u)?)];
            for (half, prefixes) in halves {
                for pre in prefixes {
                    let gap = match half {
                        0 => x - pre.up_bound(u),
                        _ => pre.low_bound(u) - x,
                    };
                    let value = match p {
                        1 => BinElem::from_limbs([0, gap, 0]),
                        _ => BinElem::from_limbs([0, gap, gap * gap]),
                    };
                    list.push_hashed(kb.prefix(k, Some(half), &pre), value);
                }
            }
        }
    }
    list.pad_to(list_p_size(params), rng)?;
    Ok(list)
}

/// Distance from `q` to the near end of a candidate prefix: the upper bound
/// for half 0, the lower bound for half 1. `q` lies inside its own prefixes,
/// so this never underflows.
pub fn boundary_gap(q: u64, prefix: &PrefixStr, half: u8, u: u32) -> u64 {
    match half {
        0 => prefix.up_bound(u) - q,
        _ => q - prefix.low_bound(u),
    }
}

/// Turns arithmetic shares of `|w* − w|` (and of its square when p = 2)
/// into shares of `(e + |w* − w|)^p`. The sender supplies the public gaps
/// `e`; the receiver passes `None`.
pub fn get_distance_p(party: &mut Party, e: Option<&[u64]>, s1: &[u64], s2: &[u64], p: u32) -> Result<Vec<u64>> {
    debug_assert_eq!(e.is_some(), party.side() == Side::First);
    match p {
        1 => Ok(match e {
            Some(e) => e.iter().zip(s1).map(|(e, s)| e.wrapping_add(*s)).collect(),
            None => s1.to_vec(),
        }),
        2 => match e {
            Some(e) => {
                let m = party.dealer().mult(Side::First, e)?;
                Ok((0..e.len())
                    .map(|h| {
                        let e = e[h];
                        e.wrapping_mul(e)
                            .wrapping_add(2u64.wrapping_mul(e).wrapping_mul(s1[h]))
                            .wrapping_add(2u64.wrapping_mul(m[h]))
                            .wrapping_add(s2[h])
                    })
                    .collect())
            }
            None => {
                let m = party.dealer().mult(Side::Second, s1)?;
                Ok(m.iter().zip(s2).map(|(m, s)| 2u64.wrapping_mul(*m).wrapping_add(*s)).collect())
            }
        },
        _ => unreachable!("prefix L_p supports p in {{1, 2}}"),
    }
}

/// FPSI under L_p with prefix-encoded half intervals.
pub fn fpsi_lp_prefix(party: &mut Party, set: &PointSet) -> Result<Option<Vec<Point>>> {
    let params = party.params().clone();
    let p = params.metric.exponent().expect("L_p session");
    party.set_phase("fmap");
    let ids = fmap::fmap_prefix(party, set)?;
    party.set_phase("filter");
    let vw = value_width(&params);
    let width = list_p_width(&params, p);
    let id_w = Width::new(params.id_bits);
    let (u, log_delta) = (params.bits, params.log_delta());
    let h = 2 * (1 + log_delta as usize);
    let (shares, gaps) = match party.role() {
        Role::Receiver => {
            let list = get_list_p(&ids, set, &params, p, party.rng())?;
            (filter_shares(party, Some(list), None, params.m * params.d * h, width)?, None)
        }
        Role::Sender => {
            let mut queries = Vec::with_capacity(params.m * params.d * h);
            let mut gaps = Vec::with_capacity(params.m * params.d * h);
            for (id, q) in ids.iter().zip(set) {
                let mut kb = KeyBuilder::new(Domain::FilterPrefixLp, Some((id, id_w)));
                for (k, &x) in q.coords().iter().enumerate() {
                    let prefixes = all_prefix(x, u, log_delta)?;
                    for half in [0u8, 1] {
                        for pre in &prefixes {
                            queries.push(kb.prefix(k, Some(half), pre));
                            gaps.push(boundary_gap(x, pre, half, u));
                        }
                    }
                }
            }
            (filter_shares(party, None, Some(queries), 0, width)?, Some(gaps))
        }
    };
    let tw = tag_width(&params);
    let n = shares.len();
    let mut tags = Vec::with_capacity(n);
    let mut parts = Vec::with_capacity(if p == 2 { 2 * n } else { n });
    for s in &shares {
        let [t, _, _] = s.limbs();
        tags.push(BinElem::from_u64(t).masked(tw));
        parts.push(BinElem::from_u64(s.limbs()[1]).masked(vw));
    }
    if p == 2 {
        parts.extend(shares.iter().map(|s| BinElem::from_u64(s.limbs()[2]).masked(vw)));
    }
    let side = party.side();
    let arith = party.dealer().b2a(side, &parts, vw)?;
    let (s1, s2) = arith.split_at(n);
    let dist = get_distance_p(party, gaps.as_deref(), s1, s2, p)?;
    let per_dim = eqsel::select_arith(party, &tags, tw, &dist, h)?;
    let total = add_groups(&per_dim, params.d);
    let bits = party.dealer().interval(side, &total, params.delta_pow())?;
    deliver(party, set, bits)
}
