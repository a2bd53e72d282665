//! Shared-output OPPRF in the so-OPRF-hybrid model.
//!
//! The sender holds a programmed list of key/value pairs. Both parties call
//! the dealer's so-OPRF (sender as key holder), then the sender encodes
//! `(q, z ⊕ F_k(q))` into an OKVS table and ships it. For a programmed key
//! the two output shares XOR to `z`; for any other key they XOR to a value
//! that looks random.

use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::amprf::{AmPrfKey, AmPrfMatrices};
use crate::error::{ProtocolError, Result};
use crate::field::{BinElem, Width};
use crate::okvs::{KeyHash, OkvsTable};
use crate::session::Party;
use crate::transport::Tag;

/// Domain byte of padding keys. Real keys start with a protocol domain byte
/// in 0x01..=0x05, so the two key spaces never meet.
const PAD_DOMAIN: &[u8; 3] = b"PAD";

/// Key/value pairs a so-OPPRF sender programs. Keys are hashed on insertion.
#[derive(Clone, Debug)]
pub struct ProgrammedList {
    width: Width,
    entries: Vec<(KeyHash, BinElem)>,
}

impl ProgrammedList {
    pub fn new(width: Width) -> ProgrammedList {
        ProgrammedList { width, entries: Vec::new() }
    }

    pub fn with_capacity(width: Width, cap: usize) -> ProgrammedList {
        ProgrammedList { width, entries: Vec::with_capacity(cap) }
    }

    pub fn push(&mut self, key: &[u8], value: BinElem) {
        self.push_hashed(KeyHash::of(key), value);
    }

    pub fn push_hashed(&mut self, key: KeyHash, value: BinElem) {
        debug_assert!(value.fits(self.width));
        self.entries.push((key, value));
    }

    pub fn width(&self) -> Width {
        self.width
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(KeyHash, BinElem)] {
        &self.entries
    }

    /// Fills the list up to its public size with dummy keys and random values.
    pub fn pad_to<R: RngCore + ?Sized>(&mut self, size: usize, rng: &mut R) -> Result<()> {
        if self.entries.len() > size {
            return Err(ProtocolError::ListOverflow { len: self.entries.len(), max: size });
        }
        let nonce: u128 = rng.random();
        let mut key = Vec::with_capacity(PAD_DOMAIN.len() + 24);
        for counter in 0..(size - self.entries.len()) as u64 {
            key.clear();
            key.extend_from_slice(PAD_DOMAIN);
            key.extend_from_slice(&counter.to_le_bytes());
            key.extend_from_slice(&nonce.to_le_bytes());
            let value = BinElem::random(rng, self.width);
            self.entries.push((KeyHash::of(&key), value));
        }
        Ok(())
    }
}

/// The sender's local view of the programmed function:
/// `F'(q) = F_k(q) ⊕ Decode(D, q)`.
#[derive(Clone, Debug)]
pub struct ProgrammedFn {
    key: AmPrfKey,
    mats: Arc<AmPrfMatrices>,
    table: OkvsTable,
}

impl ProgrammedFn {
    pub fn eval(&self, q: KeyHash) -> BinElem {
        let width = self.table.width();
        self.mats.eval(&self.key, q.0, width) ^ self.table.decode(q)
    }

    pub fn table(&self) -> &OkvsTable {
        &self.table
    }
}

#[derive(Clone, Debug)]
pub struct SenderOutput {
    /// One share per receiver query, in query order.
    pub shares: Vec<BinElem>,
    pub programmed: ProgrammedFn,
}

/// Sender side. `n_queries` is the receiver's public batch size.
pub fn send(party: &mut Party, list: &ProgrammedList, n_queries: usize) -> Result<SenderOutput> {
    let width = list.width();
    let key = AmPrfKey::random(party.rng());
    let shares = party.dealer().so_oprf_key(&key, n_queries, width)?;
    let mats = party.mats().clone();
    let masked: Vec<(KeyHash, BinElem)> =
        list.entries().iter().map(|&(q, z)| (q, z ^ mats.eval(&key, q.0, width))).collect();
    let table = OkvsTable::encode(&masked, width, party.rng())?;
    drop(masked);
    let index = party.next_sopprf_index();
    party.peer().send_msg(Tag::SOPPRF_TABLE, index, table.to_bytes())?;
    Ok(SenderOutput { shares, programmed: ProgrammedFn { key, mats, table } })
}

/// Receiver side: one output share per query.
pub fn receive(party: &mut Party, queries: &[KeyHash], width: Width) -> Result<Vec<BinElem>> {
    let xs: Vec<u128> = queries.iter().map(|q| q.0).collect();
    let f = party.dealer().so_oprf_query(&xs, width)?;
    let index = party.next_sopprf_index();
    let frame = party.peer().recv_indexed(Tag::SOPPRF_TABLE, index)?;
    let table = OkvsTable::from_bytes(&frame.payload, width)?;
    Ok(f.into_iter().zip(queries).map(|(f, &q)| f ^ table.decode(q)).collect())
}
