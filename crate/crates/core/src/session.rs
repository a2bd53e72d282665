//! A party's view of one protocol session: role, parameters, the peer and
//! dealer channels, and the party's seeded randomness.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::amprf::AmPrfMatrices;
use crate::error::{ProtocolError, Result};
use crate::functionalities::{DealerClient, Side};
use crate::params::{Metric, Params};
use crate::rng::{self, Prg};
use crate::transport::{Channel, Counts, Tag, PROTOCOL_VERSION};
use crate::wire::{Reader, Writer};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Role {
    Sender,
    Receiver,
}

impl Role {
    /// The functionality slot this role fills when the sender is S.
    pub fn side(self) -> Side {
        match self {
            Role::Sender => Side::First,
            Role::Receiver => Side::Second,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Sender => "sender",
            Role::Receiver => "receiver",
        })
    }
}

/// Which of the four end-to-end protocols a parameter set selects.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Variant {
    Linf,
    Lp,
    PrefixLinf,
    PrefixLp,
}

impl Variant {
    pub fn of(params: &Params) -> Variant {
        match (params.prefix, params.metric) {
            (false, Metric::Linf) => Variant::Linf,
            (false, Metric::Lp(_)) => Variant::Lp,
            (true, Metric::Linf) => Variant::PrefixLinf,
            (true, Metric::Lp(_)) => Variant::PrefixLp,
        }
    }

    pub fn id(self) -> u8 {
        match self {
            Variant::Linf => 1,
            Variant::Lp => 2,
            Variant::PrefixLinf => 3,
            Variant::PrefixLp => 4,
        }
    }
}

/// Byte accounting and transcript digests of a finished session.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyReport {
    pub peer: Counts,
    pub peer_by_phase: BTreeMap<String, Counts>,
    pub peer_by_tag: BTreeMap<String, Counts>,
    pub dealer: Counts,
    pub sent_digest: [u8; 32],
    pub received_digest: [u8; 32],
    pub dealer_invocations: u32,
}

pub struct Party {
    role: Role,
    params: Params,
    peer: Channel,
    dealer: DealerClient,
    rng: Prg,
    mats: Arc<AmPrfMatrices>,
    sopprf_calls: u32,
    phase: String,
}

impl fmt::Debug for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Party").field("role", &self.role).field("phase", &self.phase).finish()
    }
}

impl Party {
    /// Validates the parameters and runs the handshake with the peer and the
    /// dealer. The sender chooses the PRF matrix seed.
    pub fn connect(role: Role, params: Params, peer: Channel, dealer: Channel, seed: u64) -> Result<Party> {
        let mut dealer = DealerClient::new(dealer);
        let mut peer = peer;
        let mut rng = rng::derive(&format!("party-{role}"), &seed.to_le_bytes());
        match handshake(role, &params, &mut peer, &mut dealer, &mut rng) {
            Ok(matrix_seed) => Ok(Party {
                role,
                params,
                peer,
                dealer,
                rng,
                mats: Arc::new(AmPrfMatrices::expand(matrix_seed)),
                sopprf_calls: 0,
                phase: String::from("setup"),
            }),
            Err(e) => {
                let reason = e.to_string();
                let _ = peer.send_msg(Tag::ABORT, 0, reason.clone().into_bytes());
                dealer.abort(&reason);
                Err(e.in_phase("handshake"))
            }
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn side(&self) -> Side {
        self.role.side()
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn rng(&mut self) -> &mut Prg {
        &mut self.rng
    }

    pub fn mats(&self) -> &Arc<AmPrfMatrices> {
        &self.mats
    }

    pub fn peer(&mut self) -> &mut Channel {
        &mut self.peer
    }

    pub fn dealer(&mut self) -> &mut DealerClient {
        &mut self.dealer
    }

    pub fn phase(&self) -> &str {
        &self.phase
    }

    /// Names the current protocol step for byte accounting and error reports.
    pub fn set_phase(&mut self, phase: &str) {
        phase.clone_into(&mut self.phase);
        self.peer.set_phase(phase);
        self.dealer.set_phase(phase);
    }

    /// Index for the next so-OPPRF table frame.
    pub(crate) fn next_sopprf_index(&mut self) -> u32 {
        self.sopprf_calls += 1;
        self.sopprf_calls
    }

    /// Best-effort abort notice to the peer and the dealer.
    pub fn abort(&mut self, reason: &str) {
        let _ = self.peer.send_msg(Tag::ABORT, 0, reason.as_bytes().to_vec());
        self.dealer.abort(reason);
    }

    /// Closes the dealer session and returns the byte accounting.
    pub fn finish(mut self) -> Result<PartyReport> {
        self.dealer.bye()?;
        Ok(self.report())
    }

    pub fn report(&self) -> PartyReport {
        let (sent_digest, received_digest) = self.peer.transcript_digests();
        PartyReport {
            peer: self.peer.counts(),
            peer_by_phase: self.peer.counts_by_phase().clone(),
            peer_by_tag: self.peer.counts_by_tag().iter().map(|(t, c)| (t.to_string(), *c)).collect(),
            dealer: self.dealer.counts(),
            sent_digest,
            received_digest,
            dealer_invocations: self.dealer.invocations(),
        }
    }
}

/// Exchanges HELLO frames with the peer and registers with the dealer.
/// Returns the PRF matrix seed, chosen by the sender.
fn handshake(role: Role, params: &Params, peer: &mut Channel, dealer: &mut DealerClient, rng: &mut Prg) -> Result<u128> {
    params.validate()?;
    let text = params.to_text();
    let variant = Variant::of(params).id();
    let hello = |w: &mut Writer| {
        w.u32(PROTOCOL_VERSION).u8(variant).bytes(text.as_bytes());
    };
    let matrix_seed = match role {
        Role::Sender => {
            let matrix_seed: u128 = rng.random();
            let mut w = Writer::new();
            hello(&mut w);
            w.u128(matrix_seed);
            peer.send_msg(Tag::HELLO, 0, w.finish())?;
            let reply = peer.recv(Tag::HELLO)?;
            let mut r = Reader::new(&reply.payload);
            check_hello(&mut r, variant, &text)?;
            r.finish()?;
            matrix_seed
        }
        Role::Receiver => {
            let msg = peer.recv(Tag::HELLO)?;
            let mut r = Reader::new(&msg.payload);
            check_hello(&mut r, variant, &text)?;
            let matrix_seed = r.u128()?;
            r.finish()?;
            let mut w = Writer::new();
            hello(&mut w);
            peer.send_msg(Tag::HELLO, 0, w.finish())?;
            matrix_seed
        }
    };
    dealer.hello(matrix_seed, text.as_bytes())?;
    Ok(matrix_seed)
}

fn check_hello(r: &mut Reader<'_>, variant: u8, text: &str) -> Result<()> {
    let version = r.u32()?;
    if version != PROTOCOL_VERSION {
        return Err(ProtocolError::Handshake(format!("peer speaks version {version}, expected {PROTOCOL_VERSION}")));
    }
    if r.u8()? != variant {
        return Err(ProtocolError::Handshake("protocol variant differs".into()));
    }
    if r.bytes()? != text.as_bytes() {
        return Err(ProtocolError::Handshake("session parameters differ".into()));
    }
    Ok(())
}
