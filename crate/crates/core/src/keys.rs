//! Byte encodings of so-OPPRF keys. Every key starts with a domain byte so
//! keys of different protocol steps (and padding keys) never collide.

use crate::field::{BinElem, Width};
use crate::okvs::KeyHash;
use crate::prefix::PrefixStr;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[repr(u8)]
pub enum Domain {
    Fmap = 0x01,
    FmapPrefix = 0x02,
    Filter = 0x03,
    FilterPrefix = 0x04,
    FilterPrefixLp = 0x05,
}

/// Reusable key buffer: domain ∥ [id] ∥ dimension (u16) ∥ [half] ∥ coordinate or prefix.
#[derive(Debug)]
pub struct KeyBuilder {
    buf: Vec<u8>,
    stem: usize,
}

impl KeyBuilder {
    pub fn new(domain: Domain, id: Option<(&BinElem, Width)>) -> KeyBuilder {
        let mut buf = Vec::with_capacity(48);
        buf.push(domain as u8);
        if let Some((id, width)) = id {
            id.write_le(width, &mut buf);
        }
        let stem = buf.len();
        KeyBuilder { buf, stem }
    }

    fn start(&mut self, dim: usize) {
        self.buf.truncate(self.stem);
        self.buf.extend_from_slice(&(dim as u16).to_le_bytes());
    }

    pub fn coord(&mut self, dim: usize, x: u64) -> KeyHash {
        self.start(dim);
        self.buf.extend_from_slice(&x.to_le_bytes());
        KeyHash::of(&self.buf)
    }

    pub fn prefix(&mut self, dim: usize, half: Option<u8>, p: &PrefixStr) -> KeyHash {
        self.start(dim);
        if let Some(h) = half {
            self.buf.push(h);
        }
        p.write_bytes(&mut self.buf);
        KeyHash::of(&self.buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let id = BinElem::from_u64(0x0102);
        let mut kb = KeyBuilder::new(Domain::Filter, Some((&id, Width::ID)));
        let h = kb.coord(3, 7);
        let mut expect = vec![0x03, 0x02, 0x01, 0, 0, 0, 0, 0, 0, 0, 0, 3, 0];
        expect.extend_from_slice(&7u64.to_le_bytes());
        assert_eq!(h, KeyHash::of(&expect));
        // the builder resets between keys
        assert_eq!(kb.coord(3, 7), h);
        assert_ne!(kb.coord(4, 7), h);
    }

    #[test]
    fn domains_separate() {
        let a = KeyBuilder::new(Domain::Fmap, None).coord(0, 5);
        let b = KeyBuilder::new(Domain::Filter, None).coord(0, 5);
        assert_ne!(a, b);
        let p = PrefixStr::parse("0101").unwrap();
        let mut kb = KeyBuilder::new(Domain::FilterPrefixLp, None);
        assert_ne!(kb.prefix(0, Some(0), &p), kb.prefix(0, Some(1), &p));
    }
}
