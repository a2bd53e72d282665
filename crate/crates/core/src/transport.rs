//! Framed duplex channels over memory or TCP with byte accounting.
//!
//! A frame is an 8-byte ASCII tag, a 32-bit invocation index, a 32-bit payload
//! length and the payload. Every integer is little-endian.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub const HEADER_LEN: usize = 16;
pub const PROTOCOL_VERSION: u32 = 1;
const MAGIC: &[u8; 12] = b"FPSI-FRAMED\0";
/// Frames larger than this are rejected as corrupt.
const MAX_PAYLOAD: usize = u32::MAX as usize;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag(pub [u8; 8]);

impl Tag {
    pub const HELLO: Tag = Tag(*b"HELLO---");
    pub const SOPPRF_TABLE: Tag = Tag(*b"SOPPRF-D");
    pub const ABORT: Tag = Tag(*b"ABORT---");
    pub const BYE: Tag = Tag(*b"BYE-----");
    pub const F_HELLO: Tag = Tag(*b"F-HELLO-");
    pub const F_SO_OPRF: Tag = Tag(*b"F-SOOPRF");
    pub const F_SI_OPRF: Tag = Tag(*b"F-SIOPRF");
    pub const F_OT: Tag = Tag(*b"F-OT----");
    pub const F_PEQT: Tag = Tag(*b"F-PEQT--");
    pub const F_SSPEQT: Tag = Tag(*b"F-SSPEQT");
    pub const F_MUX: Tag = Tag(*b"F-MUX---");
    pub const F_B2A: Tag = Tag(*b"F-B2A---");
    pub const F_INTERVAL: Tag = Tag(*b"F-INTRVL");
    pub const F_MULT: Tag = Tag(*b"F-MULT--");

    pub const REGISTRY: [Tag; 14] = [
        Tag::HELLO,
        Tag::SOPPRF_TABLE,
        Tag::ABORT,
        Tag::BYE,
        Tag::F_HELLO,
        Tag::F_SO_OPRF,
        Tag::F_SI_OPRF,
        Tag::F_OT,
        Tag::F_PEQT,
        Tag::F_SSPEQT,
        Tag::F_MUX,
        Tag::F_B2A,
        Tag::F_INTERVAL,
        Tag::F_MULT,
    ];

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).unwrap_or("????????")
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tag({})", self.as_str())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Frame {
    pub tag: Tag,
    pub index: u32,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(tag: Tag, index: u32, payload: Vec<u8>) -> Frame {
        Frame { tag, index, payload }
    }

    pub fn wire_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }

    fn header(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[..8].copy_from_slice(&self.tag.0);
        h[8..12].copy_from_slice(&self.index.to_le_bytes());
        h[12..].copy_from_slice(&(self.payload.len() as u32).to_le_bytes());
        h
    }

    /// Parses a header into (tag, index, payload length).
    fn parse_header(h: &[u8; HEADER_LEN]) -> Result<(Tag, u32, usize), TransportError> {
        let tag = Tag(h[..8].try_into().unwrap());
        if !Tag::REGISTRY.contains(&tag) {
            return Err(TransportError::UnknownTag(tag));
        }
        let index = u32::from_le_bytes(h[8..12].try_into().unwrap());
        let len = u32::from_le_bytes(h[12..].try_into().unwrap()) as usize;
        Ok((tag, index, len))
    }
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("protocol desync: expected {expected}, got {actual}")]
    Desync { expected: Tag, actual: Tag },
    #[error("protocol desync: expected invocation {expected}, got {actual}")]
    IndexMismatch { expected: u32, actual: u32 },
    #[error("unknown frame tag {0:?}")]
    UnknownTag(Tag),
    #[error("truncated frame")]
    Truncated,
    #[error("peer closed the channel")]
    Closed,
    #[error("peer aborted: {0}")]
    PeerAbort(String),
    #[error("bad preamble")]
    Preamble,
    #[error(transparent)]
    Io(#[from] io::Error),
}

enum Link {
    Mem { tx: mpsc::Sender<Frame>, rx: mpsc::Receiver<Frame> },
    Tcp { reader: BufReader<TcpStream>, writer: BufWriter<TcpStream> },
}

/// Sent and received byte totals.
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
pub struct Counts {
    pub sent: u64,
    pub received: u64,
}

/// One endpoint of a framed duplex channel.
pub struct Channel {
    link: Link,
    totals: Counts,
    by_tag: BTreeMap<Tag, Counts>,
    by_phase: BTreeMap<String, Counts>,
    phase: String,
    sent_digest: Sha256,
    recv_digest: Sha256,
}

impl fmt::Debug for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Channel").field("totals", &self.totals).field("phase", &self.phase).finish()
    }
}

/// A connected pair of in-memory endpoints.
pub fn mem_pair() -> (Channel, Channel) {
    let (tx_a, rx_b) = mpsc::channel();
    let (tx_b, rx_a) = mpsc::channel();
    (Channel::from_link(Link::Mem { tx: tx_a, rx: rx_a }), Channel::from_link(Link::Mem { tx: tx_b, rx: rx_b }))
}

fn preamble() -> [u8; 16] {
    let mut p = [0u8; 16];
    p[..12].copy_from_slice(MAGIC);
    p[12..].copy_from_slice(&PROTOCOL_VERSION.to_le_bytes());
    p
}

impl Channel {
    fn from_link(link: Link) -> Channel {
        Channel {
            link,
            totals: Counts::default(),
            by_tag: BTreeMap::new(),
            by_phase: BTreeMap::new(),
            phase: String::from("setup"),
            sent_digest: Sha256::new(),
            recv_digest: Sha256::new(),
        }
    }

    /// Wraps a connected stream after exchanging preambles. The preamble is
    /// not counted.
    pub fn from_tcp(stream: TcpStream) -> Result<Channel, TransportError> {
        stream.set_nodelay(true)?;
        let mut writer = BufWriter::new(stream.try_clone()?);
        let mut reader = BufReader::new(stream);
        writer.write_all(&preamble())?;
        writer.flush()?;
        let mut got = [0u8; 16];
        reader.read_exact(&mut got).map_err(eof_as(TransportError::Preamble))?;
        if got != preamble() {
            return Err(TransportError::Preamble);
        }
        Ok(Channel::from_link(Link::Tcp { reader, writer }))
    }

    pub fn connect<A: ToSocketAddrs>(addr: A) -> Result<Channel, TransportError> {
        Channel::from_tcp(TcpStream::connect(addr)?)
    }

    pub fn accept(listener: &TcpListener) -> Result<Channel, TransportError> {
        let (stream, _) = listener.accept()?;
        Channel::from_tcp(stream)
    }

    pub fn set_phase(&mut self, phase: &str) {
        phase.clone_into(&mut self.phase);
    }

    pub fn phase(&self) -> &str {
        &self.phase
    }

    pub fn counts(&self) -> Counts {
        self.totals
    }

    pub fn counts_by_tag(&self) -> &BTreeMap<Tag, Counts> {
        &self.by_tag
    }

    pub fn counts_by_phase(&self) -> &BTreeMap<String, Counts> {
        &self.by_phase
    }

    /// SHA-256 over every sent frame and every received frame, in order.
    pub fn transcript_digests(&self) -> ([u8; 32], [u8; 32]) {
        (self.sent_digest.clone().finalize().into(), self.recv_digest.clone().finalize().into())
    }

    pub fn send(&mut self, frame: Frame) -> Result<(), TransportError> {
        if frame.payload.len() > MAX_PAYLOAD {
            return Err(TransportError::Io(io::Error::new(io::ErrorKind::InvalidInput, "payload too large")));
        }
        let header = frame.header();
        self.sent_digest.update(header);
        self.sent_digest.update(&frame.payload);
        let n = frame.wire_len() as u64;
        self.totals.sent += n;
        self.by_tag.entry(frame.tag).or_default().sent += n;
        self.by_phase.entry(self.phase.clone()).or_default().sent += n;
        match &mut self.link {
            Link::Mem { tx, .. } => tx.send(frame).map_err(|_| TransportError::Closed),
            Link::Tcp { writer, .. } => {
                writer.write_all(&header)?;
                writer.write_all(&frame.payload)?;
                writer.flush()?;
                Ok(())
            }
        }
    }

    pub fn send_msg(&mut self, tag: Tag, index: u32, payload: Vec<u8>) -> Result<(), TransportError> {
        self.send(Frame::new(tag, index, payload))
    }

    /// Receives the next frame whatever its tag.
    pub fn recv_any(&mut self) -> Result<Frame, TransportError> {
        let frame = match &mut self.link {
            Link::Mem { rx, .. } => rx.recv().map_err(|_| TransportError::Closed)?,
            Link::Tcp { reader, .. } => {
                let mut header = [0u8; HEADER_LEN];
                reader.read_exact(&mut header).map_err(eof_as(TransportError::Closed))?;
                let (tag, index, len) = Frame::parse_header(&header)?;
                let mut payload = vec![0u8; len];
                reader.read_exact(&mut payload).map_err(eof_as(TransportError::Truncated))?;
                Frame { tag, index, payload }
            }
        };
        self.recv_digest.update(frame.header());
        self.recv_digest.update(&frame.payload);
        let n = frame.wire_len() as u64;
        self.totals.received += n;
        self.by_tag.entry(frame.tag).or_default().received += n;
        self.by_phase.entry(self.phase.clone()).or_default().received += n;
        Ok(frame)
    }

    /// Receives the next frame and checks its tag. An abort frame from the
    /// peer surfaces as [`TransportError::PeerAbort`].
    pub fn recv(&mut self, expect: Tag) -> Result<Frame, TransportError> {
        let frame = self.recv_any()?;
        if frame.tag == expect {
            return Ok(frame);
        }
        if frame.tag == Tag::ABORT {
            return Err(TransportError::PeerAbort(String::from_utf8_lossy(&frame.payload).into_owned()));
        }
        Err(TransportError::Desync { expected: expect, actual: frame.tag })
    }

    /// Like [`Channel::recv`], also checking the invocation index.
    pub fn recv_indexed(&mut self, expect: Tag, index: u32) -> Result<Frame, TransportError> {
        let frame = self.recv(expect)?;
        if frame.index != index {
            return Err(TransportError::IndexMismatch { expected: index, actual: frame.index });
        }
        Ok(frame)
    }
}

fn eof_as(err: TransportError) -> impl FnOnce(io::Error) -> TransportError {
    move |e| if e.kind() == io::ErrorKind::UnexpectedEof { err } else { TransportError::Io(e) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_payload_counts_header_only() {
        let (mut a, mut b) = mem_pair();
        a.send_msg(Tag::HELLO, 0, vec![]).unwrap();
        let f = b.recv(Tag::HELLO).unwrap();
        assert!(f.payload.is_empty());
        assert_eq!(a.counts().sent, HEADER_LEN as u64);
        assert_eq!(b.counts().received, HEADER_LEN as u64);
    }

    #[test]
    fn wrong_tag_is_desync() {
        let (mut a, mut b) = mem_pair();
        a.send_msg(Tag::BYE, 0, vec![1]).unwrap();
        match b.recv(Tag::HELLO) {
            Err(TransportError::Desync { expected, actual }) => {
                assert_eq!((expected, actual), (Tag::HELLO, Tag::BYE));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn abort_frame_surfaces_reason() {
        let (mut a, mut b) = mem_pair();
        a.send_msg(Tag::ABORT, 0, b"bad".to_vec()).unwrap();
        assert!(matches!(b.recv(Tag::HELLO), Err(TransportError::PeerAbort(r)) if r == "bad"));
    }

    #[test]
    fn closed_peer_detected() {
        let (a, mut b) = mem_pair();
        drop(a);
        assert!(matches!(b.recv_any(), Err(TransportError::Closed)));
    }

    #[test]
    fn tcp_echo_one_mebibyte() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let server = std::thread::spawn(move || {
            let mut ch = Channel::accept(&listener).unwrap();
            let f = ch.recv(Tag::SOPPRF_TABLE).unwrap();
            ch.send(f).unwrap();
            ch.counts()
        });
        let payload: Vec<u8> = (0..1 << 20).map(|i: u32| (i.wrapping_mul(2654435761) >> 13) as u8).collect();
        let mut ch = Channel::connect(addr).unwrap();
        ch.send_msg(Tag::SOPPRF_TABLE, 3, payload.clone()).unwrap();
        let back = ch.recv_indexed(Tag::SOPPRF_TABLE, 3).unwrap();
        assert_eq!(back.payload, payload);
        let server_counts = server.join().unwrap();
        assert_eq!(ch.counts().sent, server_counts.received);
        assert_eq!(ch.counts().received, server_counts.sent);
        assert_eq!(ch.counts().sent, (HEADER_LEN + (1 << 20)) as u64);
    }

    #[test]
    fn mem_and_tcp_transcripts_agree() {
        let frames = [Frame::new(Tag::HELLO, 0, b"hi".to_vec()), Frame::new(Tag::BYE, 1, vec![])];
        let (mut a, mut b) = mem_pair();
        for f in &frames {
            a.send(f.clone()).unwrap();
            b.recv_any().unwrap();
        }
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let sent = frames.clone();
        let t = std::thread::spawn(move || {
            let mut c = Channel::connect(addr).unwrap();
            for f in sent {
                c.send(f).unwrap();
            }
            c.transcript_digests()
        });
        let mut s = Channel::accept(&listener).unwrap();
        for _ in 0..frames.len() {
            s.recv_any().unwrap();
        }
        let tcp_sender = t.join().unwrap();
        assert_eq!(tcp_sender, a.transcript_digests());
        assert_eq!(s.transcript_digests(), b.transcript_digests());
        assert_eq!(a.transcript_digests().0, b.transcript_digests().1);
    }
}
