//! Local mapping and the fuzzy mapping protocols.
//!
//! Each party covers every coordinate `x` of its set with `[x − δ, x + δ]`,
//! merging overlapping intervals per dimension under the newest random
//! label. An element's partial identifier is the XOR of the labels of the
//! intervals holding its coordinates. In each of the two directions one
//! party programs its intervals into a so-OPPRF, the other queries its own
//! coordinates, and an si-OPRF under the joint key turns
//! `pid(x) ⊕ H_other(x)` into the identifier of `x`. Two δ-close elements
//! thereby receive the same identifier.

use rand::RngCore;

use crate::amprf::AmPrfKey;
use crate::eqsel;
use crate::error::Result;
use crate::field::{BinElem, Width};
use crate::keys::{Domain, KeyBuilder};
use crate::okvs::KeyHash;
use crate::params::Params;
use crate::point::PointSet;
use crate::prefix::{all_prefix, decompose_capped};
use crate::session::{Party, Role};
use crate::soopprf::{self, ProgrammedList};

/// A merged coverage interval `[lo, hi]` and its label.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Interval {
    pub lo: u64,
    pub hi: u64,
    pub label: BinElem,
}

#[derive(Clone, Debug)]
pub struct LocalMap {
    pub pids: Vec<BinElem>,
    pub list: ProgrammedList,
    /// Per dimension, pairwise disjoint intervals sorted by `lo`.
    pub registry: Vec<Vec<Interval>>,
}

/// Wildcard cap of programmed prefixes: blocks of at most 2δ values.
pub fn max_wildcards(params: &Params) -> u32 {
    params.log_delta() + 1
}

/// Public size of a local-map list for a set of `count` elements.
pub fn list_size(params: &Params, count: usize, prefix: bool) -> usize {
    let per_coord = if prefix { 2 + params.log_delta() as usize } else { 2 * params.delta as usize + 1 };
    count * params.d * per_coord
}

fn merge_registry<R: RngCore + ?Sized>(set: &PointSet, params: &Params, rng: &mut R) -> Vec<Vec<Interval>> {
    let id_w = Width::new(params.id_bits);
    let mut registry: Vec<Vec<Interval>> = vec![Vec::new(); params.d];
    for point in set {
        for (k, &x) in point.coords().iter().enumerate() {
            let label = BinElem::random(rng, id_w);
            let (mut lo, mut hi) = (x - params.delta, x + params.delta);
            let ivs = &mut registry[k];
            let start = ivs.partition_point(|iv| iv.hi < lo);
            let end = ivs.partition_point(|iv| iv.lo <= hi);
            if start < end {
                lo = lo.min(ivs[start].lo);
                hi = hi.max(ivs[end - 1].hi);
            }
            ivs.splice(start..end, [Interval { lo, hi, label }]);
        }
    }
    registry
}

fn containing(ivs: &[Interval], x: u64) -> &Interval {
    let i = ivs.partition_point(|iv| iv.hi < x);
    debug_assert!(ivs[i].lo <= x && x <= ivs[i].hi);
    &ivs[i]
}

/// Builds the merged coverage, partial identifiers and the padded list the
/// party programs. The set must already satisfy the session's boundary rule.
pub fn local_map<R: RngCore + ?Sized>(set: &PointSet, params: &Params, rng: &mut R, prefix: bool) -> Result<LocalMap> {
    let registry = merge_registry(set, params, rng);
    let pids = set
        .iter()
        .map(|p| p.coords().iter().enumerate().fold(BinElem::ZERO, |acc, (k, &x)| acc ^ containing(&registry[k], x).label))
        .collect();

    let id_w = Width::new(params.id_bits);
    let size = list_size(params, set.len(), prefix);
    let mut list;
    if prefix {
        list = ProgrammedList::with_capacity(id_w.with_tag(), size);
        let mut kb = KeyBuilder::new(Domain::FmapPrefix, None);
        for (k, ivs) in registry.iter().enumerate() {
            for iv in ivs {
                for p in decompose_capped(iv.lo, iv.hi, params.bits, max_wildcards(params))? {
                    list.push_hashed(kb.prefix(k, None, &p), BinElem::concat_tag(0, iv.label));
                }
            }
        }
    } else {
        list = ProgrammedList::with_capacity(id_w, size);
        let mut kb = KeyBuilder::new(Domain::Fmap, None);
        for (k, ivs) in registry.iter().enumerate() {
            for iv in ivs {
                for x in iv.lo..=iv.hi {
                    list.push_hashed(kb.coord(k, x), iv.label);
                }
            }
        }
    }
    list.pad_to(size, rng)?;
    Ok(LocalMap { pids, list, registry })
}

/// so-OPPRF query keys for the coordinates of `set`: one per coordinate, or
/// all `2 + log δ` prefixes of each coordinate in prefix mode.
fn query_keys(set: &PointSet, params: &Params, prefix: bool) -> Result<Vec<KeyHash>> {
    let mut out = Vec::new();
    if prefix {
        let mut kb = KeyBuilder::new(Domain::FmapPrefix, None);
        for p in set {
            for (k, &x) in p.coords().iter().enumerate() {
                for pre in all_prefix(x, params.bits, max_wildcards(params))? {
                    out.push(kb.prefix(k, None, &pre));
                }
            }
        }
    } else {
        let mut kb = KeyBuilder::new(Domain::Fmap, None);
        for p in set {
            for (k, &x) in p.coords().iter().enumerate() {
                out.push(kb.coord(k, x));
            }
        }
    }
    Ok(out)
}

fn xor_groups(xs: &[BinElem], g: usize) -> Vec<BinElem> {
    xs.chunks(g).map(|c| c.iter().fold(BinElem::ZERO, |a, &x| a ^ x)).collect()
}

/// Tag width used by prefix-mode selections.
pub(crate) fn tag_width(params: &Params) -> Width {
    Width::new(params.tag_bits.min(64))
}

/// One direction: `programmer` encodes its local map, the other party
/// queries its own coordinates and learns identifiers for its elements.
fn direction(
    party: &mut Party,
    set: &PointSet,
    local: &LocalMap,
    key: &AmPrfKey,
    programmer: Role,
    prefix: bool,
) -> Result<Option<Vec<BinElem>>> {
    let params = party.params().clone();
    let id_w = Width::new(params.id_bits);
    let d = params.d;
    let count = match programmer {
        Role::Sender => params.n,
        Role::Receiver => params.m,
    };
    let per_elem = if prefix { d * (2 + params.log_delta() as usize) } else { d };
    let programming = party.role() == programmer;

    let shares = if programming {
        soopprf::send(party, &local.list, count * per_elem)?.shares
    } else {
        let queries = query_keys(set, &params, prefix)?;
        let width = if prefix { id_w.with_tag() } else { id_w };
        soopprf::receive(party, &queries, width)?
    };

    let per_coord = if prefix {
        let h = 2 + params.log_delta() as usize;
        let tw = tag_width(&params);
        let (tags, values): (Vec<BinElem>, Vec<BinElem>) = shares
            .iter()
            .map(|s| {
                let (t, v) = s.split_tag();
                (BinElem::from_u64(t).masked(tw), v.masked(id_w))
            })
            .unzip();
        eqsel::select_bin(party, &tags, tw, &values, id_w, h)?
    } else {
        shares
    };
    let mut summed = xor_groups(&per_coord, d);
    debug_assert_eq!(summed.len(), count);

    if programming {
        party.dealer().si_oprf(crate::functionalities::Side::First, key, &summed, id_w, id_w)?;
        Ok(None)
    } else {
        for (s, pid) in summed.iter_mut().zip(&local.pids) {
            *s ^= *pid;
        }
        let ids = party.dealer().si_oprf(crate::functionalities::Side::Second, key, &summed, id_w, id_w)?;
        Ok(Some(ids))
    }
}

/// Fuzzy mapping; returns identifiers for the party's own elements. The
/// sender's identifiers are computed first.
pub fn fmap(party: &mut Party, set: &PointSet) -> Result<Vec<BinElem>> {
    run(party, set, false)
}

/// Fuzzy mapping with prefix-encoded intervals; same identifier relation as [`fmap`].
pub fn fmap_prefix(party: &mut Party, set: &PointSet) -> Result<Vec<BinElem>> {
    run(party, set, true)
}

fn run(party: &mut Party, set: &PointSet, prefix: bool) -> Result<Vec<BinElem>> {
    let params = party.params().clone();
    let local = local_map(set, &params, party.rng(), prefix)?;
    let key = AmPrfKey::random(party.rng());
    let mut ids = None;
    for programmer in [Role::Receiver, Role::Sender] {
        if let Some(v) = direction(party, set, &local, &key, programmer, prefix)? {
            ids = Some(v);
        }
    }
    Ok(ids.expect("each party queries in exactly one direction"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Metric;
    use crate::point::Point;
    use crate::prefix::decompose;
    use crate::rng;

    fn params(m: usize, d: usize, delta: u64) -> Params {
        Params::new(m, m, d, delta, Metric::Linf, 16, delta.is_power_of_two())
    }

    fn set(points: &[&[u64]]) -> PointSet {
        PointSet::new(points[0].len(), points.iter().map(|p| Point::new(p.to_vec())).collect())
    }

    #[test]
    fn single_element_covers_its_ball() {
        let p = params(1, 1, 2);
        let lm = local_map(&set(&[&[5]]), &p, &mut rng::seeded(1), false).unwrap();
        assert_eq!(lm.registry[0].len(), 1);
        let iv = lm.registry[0][0];
        assert_eq!((iv.lo, iv.hi), (3, 7));
        assert_eq!(lm.pids[0], iv.label);
        assert_eq!(lm.list.len(), 5);
        let mut kb = KeyBuilder::new(Domain::Fmap, None);
        for (x, (key, value)) in (3..=7).zip(lm.list.entries()) {
            assert_eq!(*key, kb.coord(0, x));
            assert_eq!(*value, iv.label);
        }
    }

    #[test]
    fn overlapping_intervals_merge_under_newest_label() {
        let p = params(2, 1, 2);
        let mut r = rng::seeded(9);
        let lm = local_map(&set(&[&[5], &[8]]), &p, &mut r, false).unwrap();
        // replay the label draws: one per (element, dimension)
        let mut r = rng::seeded(9);
        let _first = BinElem::random(&mut r, Width::ID);
        let second = BinElem::random(&mut r, Width::ID);
        assert_eq!(lm.registry[0], vec![Interval { lo: 3, hi: 10, label: second }]);
        assert_eq!(lm.pids, vec![second, second]);
        // 8 covered values plus 2 pads
        assert_eq!(lm.list.len(), 10);
    }

    #[test]
    fn bridging_interval_merges_both_neighbours() {
        let p = params(3, 1, 2);
        let lm = local_map(&set(&[&[5], &[13], &[9]]), &p, &mut rng::seeded(3), false).unwrap();
        assert_eq!(lm.registry[0].len(), 1);
        assert_eq!((lm.registry[0][0].lo, lm.registry[0][0].hi), (3, 15));
        assert!(lm.pids.iter().all(|&pid| pid == lm.registry[0][0].label));
    }

    #[test]
    fn touching_intervals_stay_separate() {
        let p = params(2, 1, 2);
        let lm = local_map(&set(&[&[5], &[10]]), &p, &mut rng::seeded(3), false).unwrap();
        let spans: Vec<(u64, u64)> = lm.registry[0].iter().map(|iv| (iv.lo, iv.hi)).collect();
        assert_eq!(spans, vec![(3, 7), (8, 12)]);
        assert_ne!(lm.pids[0], lm.pids[1]);
    }

    #[test]
    fn pid_sums_labels_across_dimensions() {
        let p = params(2, 2, 2);
        let lm = local_map(&set(&[&[5, 40], &[8, 80]]), &p, &mut rng::seeded(4), false).unwrap();
        let dim0 = lm.registry[0][0].label;
        let dim1: Vec<BinElem> = lm.registry[1].iter().map(|iv| iv.label).collect();
        assert_eq!(lm.pids[0], dim0 ^ dim1[0]);
        assert_eq!(lm.pids[1], dim0 ^ dim1[1]);
        assert_ne!(lm.pids[0], lm.pids[1]);
    }

    #[test]
    fn prefix_list_of_one_interval() {
        let p = params(1, 1, 8);
        let lm = local_map(&set(&[&[100]]), &p, &mut rng::seeded(5), true).unwrap();
        let n_real = decompose(92, 108, 16).unwrap().len();
        assert!(n_real <= 2 + 3);
        assert_eq!(lm.list.len(), 5);
        let label = lm.registry[0][0].label;
        for (_, v) in &lm.list.entries()[..n_real] {
            assert_eq!(v.split_tag(), (0, label));
        }
    }

    #[test]
    fn share_split_distributes_over_concatenation() {
        // 8-bit tag ∥ 8-bit value, exhaustive over the value pair and a tag pair sweep
        for a in 0..=255u64 {
            for b in (0..=255u64).step_by(17) {
                let x = BinElem::concat_tag(a, BinElem::from_u64(b));
                let y = BinElem::concat_tag(b, BinElem::from_u64(a));
                let (tx, vx) = x.split_tag();
                let (ty, vy) = y.split_tag();
                let (tz, vz) = (x ^ y).split_tag();
                assert_eq!(tz, tx ^ ty);
                assert_eq!(vz, vx ^ vy);
            }
        }
    }
}
