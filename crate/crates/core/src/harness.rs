//! Dataset generation, the plaintext reference, session runners and the
//! benchmark record pipeline.

use std::collections::BTreeMap;
use std::net::TcpListener;
use std::thread;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::error::ProtocolError;
use crate::fpsi;
use crate::functionalities::{Dealer, DealerReport, FuncError};
use crate::params::{Metric, ParamError, Params};
use crate::point::{Point, PointSet};
use crate::rng::{self, Prg};
use crate::session::{Party, PartyReport, Role, Variant};
use crate::transport::{mem_pair, Channel, Tag, TransportError};

/// An element whose δ-neighbourhood meets another element's in every dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjointWitness {
    pub element: usize,
    /// For each dimension, an element whose neighbourhood overlaps there.
    pub others: Vec<usize>,
}

/// Checks that every element has a dimension in which `[x − δ, x + δ]` is
/// disjoint from all other elements' intervals. Returns the lowest-index
/// element violating this.
pub fn check_disjoint(set: &PointSet, delta: u64) -> Result<(), DisjointWitness> {
    let n = set.len();
    let reach = 2 * delta as u128;
    // conflict[k][i]: some element overlapping i in dimension k
    let mut conflict: Vec<Vec<Option<usize>>> = Vec::with_capacity(set.dim());
    for k in 0..set.dim() {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| set.get(i).coords()[k]);
        let coord = |i: usize| set.get(i).coords()[k] as u128;
        let mut c = vec![None; n];
        for pos in 0..n {
            let i = order[pos];
            if pos > 0 && coord(i) - coord(order[pos - 1]) <= reach {
                c[i] = Some(order[pos - 1]);
            } else if pos + 1 < n && coord(order[pos + 1]) - coord(i) <= reach {
                c[i] = Some(order[pos + 1]);
            }
        }
        conflict.push(c);
    }
    for i in 0..n {
        let others: Option<Vec<usize>> = conflict.iter().map(|c| c[i]).collect();
        if let Some(others) = others {
            return Err(DisjointWitness { element: i, others });
        }
    }
    Ok(())
}

/// Distance under `metric`, compared against δ: `max |·| ≤ δ` or `Σ |·|^p ≤ δ^p`.
pub fn within(q: &Point, w: &Point, metric: Metric, delta: u64) -> bool {
    let diffs = q.coords().iter().zip(w.coords()).map(|(a, b)| a.abs_diff(*b) as u128);
    match metric {
        Metric::Linf => diffs.max().unwrap_or(0) <= delta as u128,
        Metric::Lp(p) => {
            let bound = (delta as u128).saturating_pow(p);
            diffs.map(|x| x.saturating_pow(p)).fold(0u128, u128::saturating_add) <= bound
        }
    }
}

/// Plaintext fuzzy intersection: the elements of `q` within δ of some
/// element of `w`, in `q` order.
pub fn oracle(q: &PointSet, w: &PointSet, metric: Metric, delta: u64) -> Vec<Point> {
    q.iter().filter(|x| w.iter().any(|y| within(x, y, metric, delta))).cloned().collect()
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("match fraction {0} outside [0, 1]")]
    Fraction(f64),
    #[error("{needed} anchor slots of width {stride} do not fit a {bits}-bit domain")]
    DomainTooSmall { needed: usize, stride: u64, bits: u32 },
    #[error("generated sets failed the disjointness check {0} times")]
    RetriesExhausted(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub q: PointSet,
    pub w: PointSet,
    pub expected: Vec<Point>,
}

const GEN_ATTEMPTS: usize = 8;

/// Offset from within the metric ball of radius δ.
fn ball_offset(d: usize, metric: Metric, delta: u64, rng: &mut Prg) -> Vec<i64> {
    let mut t = vec![0i64; d];
    match metric {
        Metric::Linf => t.iter_mut().for_each(|x| *x = rng.random_range(-(delta as i64)..=delta as i64)),
        Metric::Lp(p) => {
            let mut budget = (delta as u128).pow(p);
            let mut dims: Vec<usize> = (0..d).collect();
            dims.shuffle(rng);
            for k in dims {
                let mut r = 0u64;
                while ((r + 1) as u128).pow(p) <= budget {
                    r += 1;
                }
                let mag = rng.random_range(0..=r);
                budget -= (mag as u128).pow(p);
                t[k] = if rng.random::<bool>() { mag as i64 } else { -(mag as i64) };
            }
        }
    }
    t
}

/// Generates a sender set Q of size m and a receiver set W of size n, both
/// satisfying the disjointness assumption, with `round(ρ·n)` elements of W
/// (capped at m) placed δ-close to distinct elements of Q.
///
/// Dimension 0 carries a lattice of anchors `8δ + 4` apart. Q sits on the
/// anchors; matched W elements perturb a Q element within the metric ball;
/// unmatched W elements sit halfway between anchors.
pub fn gen_dataset(params: &Params, rho: f64, rng: &mut Prg) -> Result<Dataset, GenError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(GenError::Fraction(rho));
    }
    params.validate()?;
    for _ in 0..GEN_ATTEMPTS {
        let ds = gen_once(params, rho, rng)?;
        if check_disjoint(&ds.q, params.delta).is_ok()
            && check_disjoint(&ds.w, params.delta).is_ok()
            && params.validate_set(&ds.q).is_ok()
        {
            return Ok(ds);
        }
    }
    Err(GenError::RetriesExhausted(GEN_ATTEMPTS))
}

fn gen_once(params: &Params, rho: f64, rng: &mut Prg) -> Result<Dataset, GenError> {
    let (m, n, d, delta) = (params.m, params.n, params.d, params.delta);
    let top = 1u64 << params.bits;
    let slots = m.max(n).max(1);
    let stride = 8 * delta + 4;
    let lo = 2 * delta;
    let hi = top - 2 * delta; // exclusive bound for anchor-derived coordinates
    let span = |jitter: u64| (slots as u128) * (stride + jitter) as u128 + (4 * delta + 2) as u128;
    let room = (hi - lo) as u128;
    if span(0) >= room {
        return Err(GenError::DomainTooSmall { needed: slots, stride, bits: params.bits });
    }
    let jitter = if span(delta) < room { delta } else { 0 };
    let slack = (room - span(jitter)) as u64;
    let mut pos = lo + rng.random_range(0..=slack.min(1 << 20));
    let mut anchors = Vec::with_capacity(slots);
    for _ in 0..slots {
        anchors.push(pos);
        pos += stride + rng.random_range(0..=jitter);
    }
    anchors.shuffle(rng);

    let free = |rng: &mut Prg| rng.random_range(lo..hi);
    let q: Vec<Point> = anchors[..m]
        .iter()
        .map(|&a| {
            let mut c = vec![a];
            c.extend((1..d).map(|_| free(rng)));
            Point::new(c)
        })
        .collect();

    let matched = ((rho * n as f64).round() as usize).min(m);
    let mut chosen: Vec<usize> = (0..m).collect();
    chosen.shuffle(rng);
    let mut w: Vec<Point> = chosen[..matched]
        .iter()
        .map(|&j| {
            let t = ball_offset(d, params.metric, delta, rng);
            Point::new(q[j].coords().iter().zip(&t).map(|(&c, &t)| c.wrapping_add_signed(t)).collect())
        })
        .collect();
    let mut spare: Vec<usize> = (0..slots).collect();
    spare.shuffle(rng);
    for &s in &spare[..n - matched] {
        let mut c = vec![anchors[s] + 4 * delta + 2];
        c.extend((1..d).map(|_| free(rng)));
        w.push(Point::new(c));
    }
    w.shuffle(rng);

    let q = PointSet::new(d, q);
    let w = PointSet::new(d, w);
    let expected = oracle(&q, &w, params.metric, delta);
    Ok(Dataset { q, w, expected })
}

/// Per-endpoint seeds of one session.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Seeds {
    pub sender: u64,
    pub receiver: u64,
    pub dealer: u64,
}

impl Seeds {
    pub fn from_master(seed: u64) -> Seeds {
        let mut r = rng::derive("session-seeds", &seed.to_le_bytes());
        Seeds { sender: r.random(), receiver: r.random(), dealer: r.random() }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{role}: {source}")]
    Party { role: Role, source: ProtocolError },
    #[error("dealer: {0}")]
    Dealer(FuncError),
    #[error("transport setup: {0}")]
    Setup(#[from] TransportError),
    #[error("{0} thread panicked")]
    Panic(&'static str),
}

impl HarnessError {
    pub fn protocol(&self) -> Option<&ProtocolError> {
        match self {
            HarnessError::Party { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Reports of a completed session.
#[derive(Clone, Debug)]
pub struct SessionReport {
    pub sender: PartyReport,
    pub receiver: PartyReport,
    pub dealer: DealerReport,
    pub wall: Duration,
}

impl SessionReport {
    /// Party-to-party bytes in both directions.
    pub fn party_bytes(&self) -> u64 {
        self.sender.peer.sent + self.receiver.peer.sent
    }

    /// Bytes of so-OPPRF table frames, headers included.
    pub fn table_bytes(&self) -> u64 {
        let tag = Tag::SOPPRF_TABLE.to_string();
        [&self.sender, &self.receiver].iter().map(|r| r.peer_by_tag.get(&tag).map_or(0, |c| c.sent)).sum()
    }

    pub fn dealer_bytes(&self) -> u64 {
        let d = &self.dealer;
        d.sender_counts.sent + d.sender_counts.received + d.receiver_counts.sent + d.receiver_counts.received
    }
}

fn is_secondary(e: &ProtocolError) -> bool {
    matches!(
        e.root(),
        ProtocolError::Transport(TransportError::PeerAbort(_) | TransportError::Closed)
            | ProtocolError::Dealer(FuncError::Abort(_) | FuncError::Transport(TransportError::PeerAbort(_) | TransportError::Closed))
    )
}

type PartyResult<T> = Result<(T, PartyReport), ProtocolError>;

fn party_thread<T, F>(role: Role, params: Params, peer: Channel, dealer: Channel, seed: u64, f: F) -> PartyResult<T>
where
    F: FnOnce(&mut Party) -> crate::error::Result<T>,
{
    let mut party = Party::connect(role, params, peer, dealer, seed)?;
    match f(&mut party) {
        Ok(v) => Ok((v, party.finish()?)),
        Err(e) => {
            let e = e.in_phase(party.phase());
            party.abort(&e.to_string());
            Err(e)
        }
    }
}

/// Picks the root cause among the three endpoints' outcomes.
fn combine<TS, TR>(
    s: Option<PartyResult<TS>>,
    r: Option<PartyResult<TR>>,
    d: Option<Result<DealerReport, FuncError>>,
) -> Result<(TS, TR, PartyReport, PartyReport, DealerReport), HarnessError> {
    let (s, r, d) = match (s, r, d) {
        (Some(s), Some(r), Some(d)) => (s, r, d),
        (None, _, _) => return Err(HarnessError::Panic("sender")),
        (_, None, _) => return Err(HarnessError::Panic("receiver")),
        (_, _, None) => return Err(HarnessError::Panic("dealer")),
    };
    match (s, r, d) {
        (Ok((vs, rs)), Ok((vr, rr)), Ok(dr)) => Ok((vs, vr, rs, rr, dr)),
        (s, r, d) => {
            let mut errs: Vec<HarnessError> = Vec::new();
            let mut secondary: Vec<HarnessError> = Vec::new();
            for (role, res) in [(Role::Sender, s.err()), (Role::Receiver, r.err())] {
                if let Some(e) = res {
                    let bucket = if is_secondary(&e) { &mut secondary } else { &mut errs };
                    bucket.push(HarnessError::Party { role, source: e });
                }
            }
            if let Err(e) = d {
                let primary = matches!(e, FuncError::Mismatch { .. } | FuncError::Wire(_) | FuncError::WidthOverflow(_));
                if primary { &mut errs } else { &mut secondary }.push(HarnessError::Dealer(e));
            }
            Err(errs.into_iter().chain(secondary).next().unwrap_or(HarnessError::Panic("unknown")))
        }
    }
}

/// Runs one session with arbitrary per-party bodies over in-memory channels,
/// with the dealer on a third thread.
pub fn run_session<TS, TR, FS, FR>(
    params: &Params,
    seeds: Seeds,
    fs: FS,
    fr: FR,
) -> Result<(TS, TR, SessionReport), HarnessError>
where
    TS: Send,
    TR: Send,
    FS: FnOnce(&mut Party) -> crate::error::Result<TS> + Send,
    FR: FnOnce(&mut Party) -> crate::error::Result<TR> + Send,
{
    let (peer_s, peer_r) = mem_pair();
    let (ds, sd) = mem_pair();
    let (dr, rd) = mem_pair();
    run_threads(params, seeds, (peer_s, ds, sd), (peer_r, dr, rd), fs, fr)
}

fn run_threads<TS, TR, FS, FR>(
    params: &Params,
    seeds: Seeds,
    (peer_s, s_dealer, mut dealer_s): (Channel, Channel, Channel),
    (peer_r, r_dealer, mut dealer_r): (Channel, Channel, Channel),
    fs: FS,
    fr: FR,
) -> Result<(TS, TR, SessionReport), HarnessError>
where
    TS: Send,
    TR: Send,
    FS: FnOnce(&mut Party) -> crate::error::Result<TS> + Send,
    FR: FnOnce(&mut Party) -> crate::error::Result<TR> + Send,
{
    let start = Instant::now();
    let (s, r, d) = thread::scope(|scope| {
        let ps = params.clone();
        let pr = params.clone();
        let hs = scope.spawn(move || party_thread(Role::Sender, ps, peer_s, s_dealer, seeds.sender, fs));
        let hr = scope.spawn(move || party_thread(Role::Receiver, pr, peer_r, r_dealer, seeds.receiver, fr));
        let hd = scope.spawn(move || Dealer::new(seeds.dealer).serve(&mut dealer_s, &mut dealer_r));
        (hs.join().ok(), hr.join().ok(), hd.join().ok())
    });
    let wall = start.elapsed();
    let (vs, vr, sender, receiver, dealer) = combine(s, r, d)?;
    Ok((vs, vr, SessionReport { sender, receiver, dealer, wall }))
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub z: Vec<Point>,
    pub report: SessionReport,
}

/// End-to-end FPSI over in-memory channels.
pub fn run_in_process(params: &Params, q: &PointSet, w: &PointSet, seeds: Seeds) -> Result<RunOutcome, HarnessError> {
    let (_, z, report) = run_session(params, seeds, |p| fpsi::run(p, q), |p| fpsi::run(p, w))?;
    Ok(RunOutcome { z: z.expect("receiver output"), report })
}

/// End-to-end FPSI over loopback TCP, all three endpoints in this process.
pub fn run_tcp(params: &Params, q: &PointSet, w: &PointSet, seeds: Seeds) -> Result<RunOutcome, HarnessError> {
    let peer_l = TcpListener::bind("127.0.0.1:0").map_err(TransportError::from)?;
    let dealer_l = TcpListener::bind("127.0.0.1:0").map_err(TransportError::from)?;
    let (peer_addr, dealer_addr) = (
        peer_l.local_addr().map_err(TransportError::from)?,
        dealer_l.local_addr().map_err(TransportError::from)?,
    );
    // both preambles must cross before either side returns, so connect on helper threads
    let (peer_pair, s_dealer_pair, r_dealer_pair) = thread::scope(|scope| {
        let c = scope.spawn(|| Channel::connect(peer_addr));
        let a = Channel::accept(&peer_l);
        let peer = c.join().expect("connect thread").and_then(|c| Ok((c, a?)));
        let cs = scope.spawn(|| Channel::connect(dealer_addr));
        let ds = Channel::accept(&dealer_l);
        let s_pair = cs.join().expect("connect thread").and_then(|c| Ok((c, ds?)));
        let cr = scope.spawn(|| Channel::connect(dealer_addr));
        let dr = Channel::accept(&dealer_l);
        let r_pair = cr.join().expect("connect thread").and_then(|c| Ok((c, dr?)));
        (peer, s_pair, r_pair)
    });
    let (peer_s, peer_r) = peer_pair?;
    let (s_dealer, dealer_s) = s_dealer_pair?;
    let (r_dealer, dealer_r) = r_dealer_pair?;
    let (_, z, report) = run_threads(
        params,
        seeds,
        (peer_s, s_dealer, dealer_s),
        (peer_r, r_dealer, dealer_r),
        |p| fpsi::run(p, q),
        |p| fpsi::run(p, w),
    )?;
    Ok(RunOutcome { z: z.expect("receiver output"), report })
}

/// Command-line name of a protocol variant.
pub fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::Linf => "linf",
        Variant::Lp => "lp",
        Variant::PrefixLinf => "linf-prefix",
        Variant::PrefixLp => "lp-prefix",
    }
}

/// Parses a variant name together with the exponent used by the L_p variants.
pub fn parse_variant(name: &str, p: u32) -> Option<(Metric, bool)> {
    match name {
        "linf" => Some((Metric::Linf, false)),
        "lp" => Some((Metric::Lp(p), false)),
        "linf-prefix" => Some((Metric::Linf, true)),
        "lp-prefix" => Some((Metric::Lp(p), true)),
        _ => None,
    }
}

/// One benchmark run as a flat record.
#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub variant: String,
    pub metric: String,
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub delta: u64,
    pub bits: u32,
    pub seed: u64,
    pub party_bytes: u64,
    pub table_bytes: u64,
    pub party_bytes_by_phase: BTreeMap<String, u64>,
    pub dealer_bytes: u64,
    pub wall_ms: f64,
    pub z_len: usize,
    pub oracle_match: bool,
}

impl Record {
    pub fn new(params: &Params, seed: u64, out: &RunOutcome, expected: &[Point]) -> Record {
        let r = &out.report;
        let mut by_phase: BTreeMap<String, u64> = BTreeMap::new();
        for rep in [&r.sender, &r.receiver] {
            for (phase, c) in &rep.peer_by_phase {
                *by_phase.entry(phase.clone()).or_default() += c.sent;
            }
        }
        Record {
            variant: variant_name(Variant::of(params)).to_string(),
            metric: params.metric.to_string(),
            m: params.m,
            n: params.n,
            d: params.d,
            delta: params.delta,
            bits: params.bits,
            seed,
            party_bytes: r.party_bytes(),
            table_bytes: r.table_bytes(),
            party_bytes_by_phase: by_phase,
            dealer_bytes: r.dealer_bytes(),
            wall_ms: r.wall.as_secs_f64() * 1e3,
            z_len: out.z.len(),
            oracle_match: out.z == expected,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bad sweep: {0}")]
    Spec(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Run(#[from] HarnessError),
}

/// A grid of benchmark configurations, written as `key=v1,v2;key=v;...`
/// with keys `variant`, `p`, `m`, `n`, `d`, `delta`, `bits`, `rho`, `seeds`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub variants: Vec<String>,
    pub p: Vec<u32>,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    pub d: Vec<usize>,
    pub delta: Vec<u64>,
    pub bits: u32,
    pub rho: f64,
    pub seeds: u64,
}

impl Default for Sweep {
    fn default() -> Sweep {
        Sweep {
            variants: vec!["linf".into()],
            p: vec![2],
            m: vec![256],
            n: vec![256],
            d: vec![4],
            delta: vec![16],
            bits: 32,
            rho: 0.5,
            seeds: 1,
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, BenchError> {
    v.split(',').map(|x| x.trim().parse().map_err(|_| BenchError::Spec(format!("{key}={x}")))).collect()
}

impl std::str::FromStr for Sweep {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Sweep, BenchError> {
        let mut sw = Sweep::default();
        for item in s.split(';').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| BenchError::Spec(item.to_string()))?;
            match k.trim() {
                "variant" => sw.variants = v.split(',').map(|x| x.trim().to_string()).collect(),
                "p" => sw.p = parse_list(k, v)?,
                "m" => sw.m = parse_list(k, v)?,
                "n" => sw.n = parse_list(k, v)?,
                "d" => sw.d = parse_list(k, v)?,
                "delta" => sw.delta = parse_list(k, v)?,
                "bits" => sw.bits = v.trim().parse().map_err(|_| BenchError::Spec(item.to_string()))?,
                "rho" => sw.rho = v.trim().parse().map_err(|_| BenchError::Spec(item.to_string()))?,
                "seeds" => sw.seeds = v.trim().parse().map_err(|_| BenchError::Spec(item.to_string()))?,
                other => return Err(BenchError::Spec(format!("unknown key {other}"))),
            }
        }
        for v in &sw.variants {
            if parse_variant(v, 1).is_none() {
                return Err(BenchError::Spec(format!("unknown variant {v}")));
            }
        }
        Ok(sw)
    }
}

impl Sweep {
    /// Every parameter combination of the grid. The exponent list only
    /// multiplies the L_p variants.
    pub fn configs(&self) -> Vec<Params> {
        let mut out = Vec::new();
        for v in &self.variants {
            let ps: Vec<u32> = if v.starts_with("lp") { self.p.clone() } else { vec![0] };
            for &p in &ps {
                let (metric, prefix) = parse_variant(v, p).expect("checked on parse");
                for &m in &self.m {
                    for &n in &self.n {
                        for &d in &self.d {
                            for &delta in &self.delta {
                                out.push(Params::new(m, n, d, delta, metric, self.bits, prefix));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Runs every configuration of the sweep for seeds `0..seeds`, calling
/// `emit` after each run.
pub fn bench(sweep: &Sweep, mut emit: impl FnMut(&Record)) -> Result<Vec<Record>, BenchError> {
    let mut out = Vec::new();
    for params in sweep.configs() {
        for seed in 0..sweep.seeds {
            let mut g = rng::derive("bench-dataset", &seed.to_le_bytes());
            let ds = gen_dataset(&params, sweep.rho, &mut g)?;
            let run = run_in_process(&params, &ds.q, &ds.w, Seeds::from_master(seed))?;
            let rec = Record::new(&params, seed, &run, &ds.expected);
            emit(&rec);
            out.push(rec);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(points: &[&[u64]]) -> PointSet {
        PointSet::new(points[0].len(), points.iter().map(|p| Point::new(p.to_vec())).collect())
    }

    #[test]
    fn disjoint_examples() {
        assert_eq!(check_disjoint(&set(&[&[0, 0], &[100, 0]]), 16), Ok(()));
        let w = check_disjoint(&set(&[&[0, 0], &[20, 0]]), 16).unwrap_err();
        assert_eq!(w, DisjointWitness { element: 0, others: vec![1, 1] });
        // exactly 2δ apart still touches
        assert!(check_disjoint(&set(&[&[0], &[32]]), 16).is_err());
        assert!(check_disjoint(&set(&[&[0], &[33]]), 16).is_ok());
    }

    #[test]
    fn oracle_single_pairs() {
        let q = set(&[&[5, 5]]);
        let near = set(&[&[8, 9]]);
        let far = set(&[&[8, 11]]);
        assert_eq!(oracle(&q, &near, Metric::Linf, 5).len(), 1);
        assert!(oracle(&q, &far, Metric::Linf, 5).is_empty());
        assert_eq!(oracle(&q, &near, Metric::Lp(2), 5).len(), 1);
        assert!(oracle(&q, &near, Metric::Lp(1), 5).is_empty());
    }

    #[test]
    fn generated_sets_match_construction() {
        for (metric, rho) in [(Metric::Linf, 0.0), (Metric::Linf, 1.0), (Metric::Lp(1), 0.5), (Metric::Lp(2), 1.0)] {
            let params = Params::new(64, 48, 3, 16, metric, 32, false);
            let ds = gen_dataset(&params, rho, &mut rng::seeded(11)).unwrap();
            assert_eq!(ds.q.len(), 64);
            assert_eq!(ds.w.len(), 48);
            assert_eq!(ds.expected.len(), (rho * 48.0).round() as usize);
            assert!(check_disjoint(&ds.q, 16).is_ok());
            assert!(check_disjoint(&ds.w, 16).is_ok());
        }
    }

    #[test]
    fn sweep_spec_expands() {
        let sw: Sweep = "variant=linf,lp;p=1,2;m=8;n=8;d=2;delta=4,8".parse().unwrap();
        assert_eq!(sw.configs().len(), 2 + 4);
        assert!("variant=l3".parse::<Sweep>().is_err());
    }
}
