use crate::amprf::{AmPrfKey, AmPrfMatrices};
use crate::field::Width;
use crate::rng::{self, Prg};
use crate::transport::{Channel, Counts, Frame, Tag, TransportError};
use crate::wire::{Reader, WireError, Writer};

use super::ideal::{self, OtMessage};
use super::{FuncError, Side, MUX_ARITH, MUX_BIN};

/// One served invocation, for audit and replay checks.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Invocation {
    pub tag: Tag,
    pub index: u32,
    pub batch: u32,
}

#[derive(Clone, Debug)]
pub struct DealerReport {
    pub invocations: Vec<Invocation>,
    pub sender_counts: Counts,
    pub receiver_counts: Counts,
}

pub struct Dealer {
    rng: Prg,
    mats: Option<AmPrfMatrices>,
    log: Vec<Invocation>,
}

struct Request<'a> {
    side: Side,
    batch: u32,
    aux: &'a [u8],
    body: Reader<'a>,
}

fn parse_request(payload: &[u8]) -> Result<Request<'_>, WireError> {
    let mut r = Reader::new(payload);
    let side = Side::from_byte(r.u8()?).ok_or(WireError::Invalid("side"))?;
    let batch = r.u32()?;
    let aux = r.bytes()?;
    Ok(Request { side, batch, aux, body: r })
}

fn read_key(r: &mut Reader<'_>) -> Result<AmPrfKey, WireError> {
    AmPrfKey::from_bytes(r.take(64)?).ok_or(WireError::Invalid("key"))
}

fn read_ot_message(r: &mut Reader<'_>) -> Result<OtMessage, WireError> {
    Ok(if r.bool()? { Some(r.bytes()?.to_vec()) } else { None })
}

pub(super) fn write_ot_message(w: &mut Writer, m: &OtMessage) {
    match m {
        Some(bytes) => w.bool(true).bytes(bytes),
        None => w.bool(false),
    };
}

impl Dealer {
    pub fn new(seed: u64) -> Dealer {
        Dealer { rng: rng::derive("dealer", &seed.to_le_bytes()), mats: None, log: Vec::new() }
    }

    pub fn log(&self) -> &[Invocation] {
        &self.log
    }

    /// Serves one session: the handshake, then matched invocations until both
    /// parties say goodbye. On any mismatch both parties receive an abort frame.
    pub fn serve(&mut self, s: &mut Channel, r: &mut Channel) -> Result<DealerReport, FuncError> {
        match self.serve_inner(s, r) {
            Ok(()) => Ok(DealerReport { invocations: self.log.clone(), sender_counts: s.counts(), receiver_counts: r.counts() }),
            Err(e) => {
                let reason = e.to_string();
                // the peers may already be gone
                let _ = s.send_msg(Tag::ABORT, 0, reason.clone().into_bytes());
                let _ = r.send_msg(Tag::ABORT, 0, reason.into_bytes());
                Err(e)
            }
        }
    }

    fn serve_inner(&mut self, s: &mut Channel, r: &mut Channel) -> Result<(), FuncError> {
        let hs = s.recv(Tag::F_HELLO)?;
        let hr = r.recv(Tag::F_HELLO)?;
        if hs.payload != hr.payload {
            return Err(FuncError::Mismatch { tag: Tag::F_HELLO, index: 0, reason: "session parameters differ".into() });
        }
        let seed = Reader::new(&hs.payload).u128()?;
        self.mats = Some(AmPrfMatrices::expand(seed));
        s.send_msg(Tag::F_HELLO, 0, vec![])?;
        r.send_msg(Tag::F_HELLO, 0, vec![])?;

        loop {
            let fs = recv_or_abort(s)?;
            let fr = recv_or_abort(r)?;
            if fs.tag != fr.tag || fs.index != fr.index {
                return Err(FuncError::Mismatch {
                    tag: fs.tag,
                    index: fs.index,
                    reason: format!("peer sent {} #{}", fr.tag, fr.index),
                });
            }
            if fs.tag == Tag::BYE {
                return Ok(());
            }
            let (tag, index) = (fs.tag, fs.index);
            let mismatch = |reason: &str| FuncError::Mismatch { tag, index, reason: reason.to_string() };
            let qs = parse_request(&fs.payload)?;
            let qr = parse_request(&fr.payload)?;
            if qs.side == qr.side {
                return Err(mismatch("both parties claim the same side"));
            }
            if qs.batch != qr.batch {
                return Err(mismatch("batch lengths differ"));
            }
            if qs.aux != qr.aux {
                return Err(mismatch("parameters differ"));
            }
            let batch = qs.batch;
            let s_first = qs.side == Side::First;
            let (first, second) = if s_first { (qs, qr) } else { (qr, qs) };
            let (out_first, out_second) = self.evaluate(tag, batch as usize, first, second).map_err(|e| match e {
                FuncError::Wire(w) => mismatch(&w.to_string()),
                other => other,
            })?;
            self.log.push(Invocation { tag, index, batch });
            let (to_s, to_r) = if s_first { (out_first, out_second) } else { (out_second, out_first) };
            s.send_msg(tag, index, to_s)?;
            r.send_msg(tag, index, to_r)?;
        }
    }

    fn evaluate(&mut self, tag: Tag, n: usize, first: Request<'_>, second: Request<'_>) -> Result<(Vec<u8>, Vec<u8>), FuncError> {
        let (mut a, mut b) = (first.body, second.body);
        let aux = first.aux;
        let mut ra = Reader::new(aux);
        let mats = self.mats.as_ref().expect("handshake sets matrices");
        let rng = &mut self.rng;
        let mut wa = Writer::new();
        let mut wb = Writer::new();
        match tag {
            t if t == Tag::F_SO_OPRF => {
                let width = Width::new(ra.u32()?);
                let key = read_key(&mut a)?;
                let xs: Vec<u128> = (0..n).map(|_| b.u128()).collect::<Result<_, _>>()?;
                let (ys, yr) = ideal::so_oprf(mats, &key, &xs, width, rng);
                wa.elems(&ys, width);
                wb.elems(&yr, width);
            }
            t if t == Tag::F_SI_OPRF => {
                let (win, wout) = (Width::new(ra.u32()?), Width::new(ra.u32()?));
                let (ka, kb) = (read_key(&mut a)?, read_key(&mut b)?);
                let (xa, xb) = (a.elems(n, win)?, b.elems(n, win)?);
                wb.elems(&ideal::si_oprf(mats, &ka, &kb, &xa, &xb, win, wout), wout);
            }
            t if t == Tag::F_OT => {
                let pairs: Vec<(OtMessage, OtMessage)> =
                    (0..n).map(|_| Ok((read_ot_message(&mut a)?, read_ot_message(&mut a)?))).collect::<Result<_, WireError>>()?;
                let bits = b.bools(n)?;
                for m in ideal::ot(&pairs, &bits) {
                    write_ot_message(&mut wb, &m);
                }
            }
            t if t == Tag::F_PEQT => {
                let width = Width::new(ra.u32()?);
                let (xa, xb) = (a.elems(n, width)?, b.elems(n, width)?);
                wb.bools(&ideal::peqt(&xa, &xb));
            }
            t if t == Tag::F_SSPEQT => {
                let width = Width::new(ra.u32()?);
                let (xa, xb) = (a.elems(n, width)?, b.elems(n, width)?);
                let (r1, r0) = ideal::sspeqt(&xa, &xb, rng);
                wa.bools(&r1);
                wb.bools(&r0);
            }
            t if t == Tag::F_MUX => {
                let kind = ra.u8()?;
                let width = Width::new(ra.u32()?);
                match kind {
                    MUX_BIN => {
                        let read = |r: &mut Reader<'_>| (0..n).map(|_| Ok((r.bool()?, r.elem(width)?))).collect::<Result<Vec<_>, WireError>>();
                        let (xa, xb) = (read(&mut a)?, read(&mut b)?);
                        let (ta, tb) = ideal::mux_bin(&xa, &xb, width, rng);
                        wa.elems(&ta, width);
                        wb.elems(&tb, width);
                    }
                    MUX_ARITH => {
                        let read = |r: &mut Reader<'_>| (0..n).map(|_| Ok((r.bool()?, r.u64()?))).collect::<Result<Vec<_>, WireError>>();
                        let (xa, xb) = (read(&mut a)?, read(&mut b)?);
                        let (ta, tb) = ideal::mux_arith(&xa, &xb, rng);
                        wa.u64s(&ta);
                        wb.u64s(&tb);
                    }
                    _ => return Err(WireError::Invalid("mux kind").into()),
                }
            }
            t if t == Tag::F_B2A => {
                let width = Width::new(ra.u32()?);
                if width.bits() > 64 {
                    return Err(FuncError::WidthOverflow(width.bits()));
                }
                let (xa, xb) = (a.elems(n, width)?, b.elems(n, width)?);
                let (da, db) = ideal::b2a(&xa, &xb, rng);
                wa.u64s(&da);
                wb.u64s(&db);
            }
            t if t == Tag::F_INTERVAL => {
                let bound = ra.u64()?;
                let (xa, xb) = (a.u64s(n)?, b.u64s(n)?);
                wb.bools(&ideal::interval(&xa, &xb, bound));
            }
            t if t == Tag::F_MULT => {
                let (xa, xb) = (a.u64s(n)?, b.u64s(n)?);
                let (ma, mb) = ideal::mult(&xa, &xb, rng);
                wa.u64s(&ma);
                wb.u64s(&mb);
            }
            _ => return Err(WireError::Invalid("unknown functionality").into()),
        }
        a.finish()?;
        b.finish()?;
        ra.finish()?;
        Ok((wa.finish(), wb.finish()))
    }
}

fn recv_or_abort(ch: &mut Channel) -> Result<Frame, FuncError> {
    let f = ch.recv_any()?;
    if f.tag == Tag::ABORT {
        return Err(TransportError::PeerAbort(String::from_utf8_lossy(&f.payload).into_owned()).into());
    }
    Ok(f)
}
