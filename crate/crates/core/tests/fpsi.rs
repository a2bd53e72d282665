use std::thread;

use fpsi_core::field::BinElem;
use fpsi_core::fpsi::{get_distance_p, get_list_p, list_p_size};
use fpsi_core::functionalities::Dealer;
use fpsi_core::harness::{run_in_process, run_session, Seeds};
use fpsi_core::keys::{Domain, KeyBuilder};
use fpsi_core::params::{Metric, Params};
use fpsi_core::point::{Point, PointSet};
use fpsi_core::prefix::PrefixStr;
use fpsi_core::rng;
use fpsi_core::session::{Party, Role};
use fpsi_core::transport::{mem_pair, Tag};

fn one(c: &[u64]) -> PointSet {
    PointSet::new(c.len(), vec![Point::new(c.to_vec())])
}

fn z(metric: Metric, prefix: bool, delta: u64, q: &[u64], w: &[u64]) -> usize {
    let params = Params::new(1, 1, q.len(), delta, metric, 16, prefix);
    let out = run_in_process(&params, &one(q), &one(w), Seeds::from_master(3)).unwrap();
    assert!(out.z.iter().all(|p| p.coords() == q));
    out.z.len()
}

#[test]
fn single_pair_examples() {
    // (0,0) vs (3,4) and (3,6), shifted away from the domain boundary
    assert_eq!(z(Metric::Linf, false, 5, &[10, 10], &[13, 14]), 1);
    assert_eq!(z(Metric::Linf, false, 5, &[10, 10], &[13, 16]), 0);
    assert_eq!(z(Metric::Lp(2), false, 5, &[10, 10], &[13, 14]), 1);
    assert_eq!(z(Metric::Lp(1), false, 5, &[10, 10], &[13, 14]), 0);
}

#[test]
fn prefix_boundaries_are_inclusive() {
    assert_eq!(z(Metric::Linf, true, 4, &[10, 10], &[14, 6]), 1);
    assert_eq!(z(Metric::Linf, true, 4, &[10, 10], &[15, 6]), 0);
    assert_eq!(z(Metric::Lp(2), true, 4, &[10, 10], &[14, 10]), 1);
    assert_eq!(z(Metric::Lp(2), true, 4, &[10, 10], &[13, 14]), 0);
    assert_eq!(z(Metric::Lp(1), true, 4, &[10, 10], &[12, 8]), 1);
    assert_eq!(z(Metric::Lp(1), true, 4, &[10, 10], &[12, 7]), 0);
}

#[test]
fn half_interval_lists() {
    let params = Params::new(1, 1, 1, 2, Metric::Lp(1), 16, true);
    let id = BinElem::from_u64(77);
    let list = get_list_p(&[id], &one(&[8]), &params, 1, &mut rng::seeded(1)).unwrap();
    assert_eq!(list.len(), list_p_size(&params));
    let mut kb = KeyBuilder::new(Domain::FilterPrefixLp, Some((&id, fpsi_core::field::Width::ID)));
    // [6, 8] = {6, 7} ∪ {8}; [9, 10] = {9} ∪ {10}
    let expect = [
        (0u8, PrefixStr::of(6, 16, 1), 1u64),
        (0, PrefixStr::of(8, 16, 0), 0),
        (1, PrefixStr::of(9, 16, 0), 1),
        (1, PrefixStr::of(10, 16, 0), 2),
    ];
    for ((half, p, gap), (key, value)) in expect.iter().zip(list.entries()) {
        assert_eq!(*key, kb.prefix(0, Some(*half), p));
        assert_eq!(value.limbs(), [0, *gap, 0]);
    }
    // the same element needs four entries, while 2·log δ would allow two
    assert!(list.len() > 2 * params.log_delta() as usize);

    let p2 = Params::new(1, 1, 1, 2, Metric::Lp(2), 16, true);
    let list = get_list_p(&[id], &one(&[8]), &p2, 2, &mut rng::seeded(1)).unwrap();
    assert_eq!(list.entries()[1].1.limbs(), [0, 0, 0]);
    assert_eq!(list.entries()[3].1.limbs(), [0, 2, 4]);
}

fn distance(p: u32, e: u64, s1: u64, s2: u64) -> u64 {
    let params = Params::new(1, 1, 1, 4, Metric::Lp(p), 16, true);
    let mut g = rng::seeded(e ^ s1);
    let (a1, a2): (u64, u64) = (rand::Rng::random(&mut g), rand::Rng::random(&mut g));
    let (r1, r2) = (s1.wrapping_sub(a1), s2.wrapping_sub(a2));
    let (ds, dr, _) = run_session(
        &params,
        Seeds::from_master(1),
        |party| get_distance_p(party, Some(&[e]), &[a1], &[a2], p),
        |party| get_distance_p(party, None, &[r1], &[r2], p),
    )
    .unwrap();
    ds[0].wrapping_add(dr[0])
}

#[test]
fn distance_reconstruction() {
    assert_eq!(distance(2, 3, 4, 16), 49);
    assert_eq!(distance(1, 3, 4, 0), 7);
    assert_eq!(distance(2, 0, 5, 25), 25);
    assert_eq!(distance(1, 0, 5, 0), 5);
}

#[test]
fn wrong_set_size_is_a_validation_error() {
    let params = Params::new(2, 1, 2, 4, Metric::Linf, 16, false);
    let q = one(&[10, 10]);
    let err = run_in_process(&params, &q, &one(&[12, 12]), Seeds::from_master(1)).unwrap_err();
    assert!(err.protocol().unwrap().is_validation(), "{err}");
}

#[test]
fn overlapping_projections_are_rejected() {
    let params = Params::new(2, 1, 2, 4, Metric::Linf, 16, false);
    let q = PointSet::new(2, vec![Point::new(vec![10, 10]), Point::new(vec![12, 13])]);
    let err = run_in_process(&params, &q, &one(&[40, 40]), Seeds::from_master(1)).unwrap_err();
    assert!(err.protocol().unwrap().is_validation(), "{err}");
}

#[test]
fn table_with_wrong_tag_is_a_desync() {
    let params = Params::new(1, 1, 1, 4, Metric::Linf, 16, false);
    let err = run_session(
        &params,
        Seeds::from_master(1),
        |p| {
            let key = fpsi_core::amprf::AmPrfKey::random(p.rng());
            p.dealer().so_oprf_key(&key, 1, fpsi_core::field::Width::W64)?;
            p.peer().send_msg(Tag::F_OT, 1, vec![])?;
            Ok(())
        },
        |p| fpsi_core::soopprf::receive(p, &[fpsi_core::okvs::KeyHash(5)], fpsi_core::field::Width::W64).map(drop),
    )
    .unwrap_err();
    assert!(err.protocol().unwrap().is_desync(), "{err}");
}

#[test]
fn mismatched_dealer_calls_abort_both_parties() {
    let params = Params::new(1, 1, 1, 4, Metric::Linf, 16, false);
    let err = run_session(
        &params,
        Seeds::from_master(1),
        |p| p.dealer().peqt(fpsi_core::functionalities::Side::First, &[BinElem::ZERO], fpsi_core::field::Width::W64).map(drop).map_err(Into::into),
        |p| p.dealer().interval(fpsi_core::functionalities::Side::Second, &[0], 3).map(drop).map_err(Into::into),
    )
    .unwrap_err();
    assert!(matches!(err, fpsi_core::harness::HarnessError::Dealer(_)) || err.protocol().unwrap().is_dealer_abort(), "{err}");
}

#[test]
fn handshake_rejects_different_parameters() {
    let (ps, pr) = mem_pair();
    let (sd, ds) = mem_pair();
    let (rd, dr) = mem_pair();
    let a = Params::new(1, 1, 1, 4, Metric::Linf, 16, false);
    let b = Params::new(1, 1, 1, 8, Metric::Linf, 16, false);
    let hs = thread::spawn(move || Party::connect(Role::Sender, a, ps, sd, 1).map(drop));
    let hr = thread::spawn(move || Party::connect(Role::Receiver, b, pr, rd, 2).map(drop));
    let hd = thread::spawn(move || {
        let (mut ds, mut dr) = (ds, dr);
        Dealer::new(0).serve(&mut ds, &mut dr).map(drop)
    });
    assert!(hr.join().unwrap().is_err());
    assert!(hs.join().unwrap().is_err());
    assert!(hd.join().unwrap().is_err());
}

#[test]
fn replay_is_byte_identical() {
    let params = Params::new(16, 16, 2, 8, Metric::Lp(2), 20, true);
    let ds = fpsi_core::harness::gen_dataset(&params, 0.5, &mut rng::seeded(4)).unwrap();
    let a = run_in_process(&params, &ds.q, &ds.w, Seeds::from_master(9)).unwrap();
    let b = run_in_process(&params, &ds.q, &ds.w, Seeds::from_master(9)).unwrap();
    assert_eq!(a.z, b.z);
    assert_eq!(a.report.sender.sent_digest, b.report.sender.sent_digest);
    assert_eq!(a.report.receiver.sent_digest, b.report.receiver.sent_digest);
    assert_eq!(a.report.sender.peer_by_phase, b.report.sender.peer_by_phase);
    assert_eq!(a.report.dealer.invocations, b.report.dealer.invocations);
}
