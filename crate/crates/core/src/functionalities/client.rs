use crate::amprf::AmPrfKey;
use crate::field::{BinElem, Width};
use crate::transport::{Channel, Counts, Tag, TransportError};
use crate::wire::{Reader, Writer};

use super::dealer::write_ot_message;
use super::ideal::OtMessage;
use super::{FuncError, Side, MUX_ARITH, MUX_BIN};

/// A party's connection to the dealer. Invocation indices start at 1 and
/// increase by one per call.
#[derive(Debug)]
pub struct DealerClient {
    chan: Channel,
    next: u32,
}

impl DealerClient {
    pub fn new(chan: Channel) -> DealerClient {
        DealerClient { chan, next: 1 }
    }

    pub fn counts(&self) -> Counts {
        self.chan.counts()
    }

    pub fn channel(&self) -> &Channel {
        &self.chan
    }

    pub fn set_phase(&mut self, phase: &str) {
        self.chan.set_phase(phase);
    }

    pub fn invocations(&self) -> u32 {
        self.next - 1
    }

    /// Registers the session with the dealer. Both parties must send the same
    /// matrix seed and parameter block.
    pub fn hello(&mut self, matrix_seed: u128, session: &[u8]) -> Result<(), FuncError> {
        let mut w = Writer::new();
        w.u128(matrix_seed).bytes(session);
        self.chan.send_msg(Tag::F_HELLO, 0, w.finish())?;
        self.chan.recv(Tag::F_HELLO).map_err(abort_reason)?;
        Ok(())
    }

    pub fn bye(&mut self) -> Result<(), FuncError> {
        self.chan.send_msg(Tag::BYE, self.next, vec![])?;
        Ok(())
    }

    /// Best-effort notice that this party is giving up.
    pub fn abort(&mut self, reason: &str) {
        let _ = self.chan.send_msg(Tag::ABORT, self.next, reason.as_bytes().to_vec());
    }

    fn call(&mut self, tag: Tag, side: Side, batch: usize, aux: &[u8], body: Writer) -> Result<Vec<u8>, FuncError> {
        let index = self.next;
        self.next += 1;
        let body = body.finish();
        let mut w = Writer::with_capacity(body.len() + 16 + aux.len());
        w.u8(side.to_byte()).u32(batch as u32).bytes(aux).raw(&body);
        self.chan.send_msg(tag, index, w.finish())?;
        let frame = self.chan.recv_indexed(tag, index).map_err(abort_reason)?;
        Ok(frame.payload)
    }

    /// so-OPRF as the key holder; returns this side's output shares.
    pub fn so_oprf_key(&mut self, key: &AmPrfKey, batch: usize, width: Width) -> Result<Vec<BinElem>, FuncError> {
        let mut w = Writer::new();
        w.raw(&key.to_bytes());
        let out = self.call(Tag::F_SO_OPRF, Side::First, batch, &width_aux(width), w)?;
        read_all(&out, |r| r.elems(batch, width))
    }

    /// so-OPRF as the querier; `xs` are hashed PRF inputs.
    pub fn so_oprf_query(&mut self, xs: &[u128], width: Width) -> Result<Vec<BinElem>, FuncError> {
        let mut w = Writer::with_capacity(xs.len() * 16);
        for x in xs {
            w.u128(*x);
        }
        let out = self.call(Tag::F_SO_OPRF, Side::Second, xs.len(), &width_aux(width), w)?;
        read_all(&out, |r| r.elems(xs.len(), width))
    }

    /// si-OPRF on shared key and inputs; only the `Second` side gets outputs.
    pub fn si_oprf(
        &mut self,
        side: Side,
        key_share: &AmPrfKey,
        x_shares: &[BinElem],
        in_width: Width,
        out_width: Width,
    ) -> Result<Vec<BinElem>, FuncError> {
        let mut aux = Writer::new();
        aux.u32(in_width.bits()).u32(out_width.bits());
        let mut w = Writer::new();
        w.raw(&key_share.to_bytes()).elems(x_shares, in_width);
        let out = self.call(Tag::F_SI_OPRF, side, x_shares.len(), &aux.finish(), w)?;
        let n = if side == Side::Second { x_shares.len() } else { 0 };
        read_all(&out, |r| r.elems(n, out_width))
    }

    pub fn ot_send(&mut self, pairs: &[(OtMessage, OtMessage)]) -> Result<(), FuncError> {
        let mut w = Writer::new();
        for (z0, z1) in pairs {
            write_ot_message(&mut w, z0);
            write_ot_message(&mut w, z1);
        }
        let out = self.call(Tag::F_OT, Side::First, pairs.len(), &[], w)?;
        read_all(&out, |_| Ok(()))
    }

    pub fn ot_receive(&mut self, bits: &[bool]) -> Result<Vec<OtMessage>, FuncError> {
        let mut w = Writer::new();
        w.bools(bits);
        let out = self.call(Tag::F_OT, Side::Second, bits.len(), &[], w)?;
        read_all(&out, |r| {
            (0..bits.len()).map(|_| Ok(if r.bool()? { Some(r.bytes()?.to_vec()) } else { None })).collect()
        })
    }

    /// Plain equality test; the `Second` side learns the bits.
    pub fn peqt(&mut self, side: Side, xs: &[BinElem], width: Width) -> Result<Vec<bool>, FuncError> {
        let mut w = Writer::new();
        w.elems(xs, width);
        let out = self.call(Tag::F_PEQT, side, xs.len(), &width_aux(width), w)?;
        let n = if side == Side::Second { xs.len() } else { 0 };
        read_all(&out, |r| r.bools(n))
    }

    /// Equality test with XOR-shared output bits.
    pub fn sspeqt(&mut self, side: Side, xs: &[BinElem], width: Width) -> Result<Vec<bool>, FuncError> {
        let mut w = Writer::new();
        w.elems(xs, width);
        let out = self.call(Tag::F_SSPEQT, side, xs.len(), &width_aux(width), w)?;
        read_all(&out, |r| r.bools(xs.len()))
    }

    pub fn mux_bin(&mut self, side: Side, items: &[(bool, BinElem)], width: Width) -> Result<Vec<BinElem>, FuncError> {
        let mut aux = Writer::new();
        aux.u8(MUX_BIN).u32(width.bits());
        let mut w = Writer::new();
        for (b, x) in items {
            w.bool(*b).elem(x, width);
        }
        let out = self.call(Tag::F_MUX, side, items.len(), &aux.finish(), w)?;
        read_all(&out, |r| r.elems(items.len(), width))
    }

    pub fn mux_arith(&mut self, side: Side, items: &[(bool, u64)]) -> Result<Vec<u64>, FuncError> {
        let mut aux = Writer::new();
        aux.u8(MUX_ARITH).u32(64);
        let mut w = Writer::new();
        for (b, x) in items {
            w.bool(*b).u64(*x);
        }
        let out = self.call(Tag::F_MUX, side, items.len(), &aux.finish(), w)?;
        read_all(&out, |r| r.u64s(items.len()))
    }

    /// Converts XOR shares of values of at most 64 bits into shares mod 2^64.
    pub fn b2a(&mut self, side: Side, xs: &[BinElem], width: Width) -> Result<Vec<u64>, FuncError> {
        if width.bits() > 64 {
            return Err(FuncError::WidthOverflow(width.bits()));
        }
        let mut w = Writer::new();
        w.elems(xs, width);
        let out = self.call(Tag::F_B2A, side, xs.len(), &width_aux(width), w)?;
        read_all(&out, |r| r.u64s(xs.len()))
    }

    /// `[x^S + x^R ≤ bound]`; the `Second` side learns the bits.
    pub fn interval(&mut self, side: Side, xs: &[u64], bound: u64) -> Result<Vec<bool>, FuncError> {
        let mut aux = Writer::new();
        aux.u64(bound);
        let mut w = Writer::new();
        w.u64s(xs);
        let out = self.call(Tag::F_INTERVAL, side, xs.len(), &aux.finish(), w)?;
        let n = if side == Side::Second { xs.len() } else { 0 };
        read_all(&out, |r| r.bools(n))
    }

    /// Product of public values (`First`) and shares (`Second`), re-shared.
    pub fn mult(&mut self, side: Side, xs: &[u64]) -> Result<Vec<u64>, FuncError> {
        let mut w = Writer::new();
        w.u64s(xs);
        let out = self.call(Tag::F_MULT, side, xs.len(), &[], w)?;
        read_all(&out, |r| r.u64s(xs.len()))
    }
}

fn width_aux(width: Width) -> [u8; 4] {
    width.bits().to_le_bytes()
}

fn read_all<T>(buf: &[u8], f: impl FnOnce(&mut Reader<'_>) -> Result<T, crate::wire::WireError>) -> Result<T, FuncError> {
    let mut r = Reader::new(buf);
    let v = f(&mut r)?;
    r.finish()?;
    Ok(v)
}

fn abort_reason(e: TransportError) -> FuncError {
    match e {
        TransportError::PeerAbort(reason) => FuncError::Abort(reason),
        other => FuncError::Transport(other),
    }
}
