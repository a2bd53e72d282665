//! Little-endian payload encoding helpers.

use thiserror::Error;

use crate::field::{BinElem, Width};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("payload truncated")]
    Truncated,
    #[error("{0} trailing bytes in payload")]
    Trailing(usize),
    #[error("invalid encoding: {0}")]
    Invalid(&'static str),
}

#[derive(Default, Debug)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Writer {
        Writer::default()
    }

    pub fn with_capacity(n: usize) -> Writer {
        Writer { buf: Vec::with_capacity(n) }
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn bool(&mut self, v: bool) -> &mut Self {
        self.u8(v as u8)
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn u128(&mut self, v: u128) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn raw(&mut self, bytes: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(bytes);
        self
    }

    /// Length-prefixed byte string.
    pub fn bytes(&mut self, bytes: &[u8]) -> &mut Self {
        self.u32(bytes.len() as u32).raw(bytes)
    }

    pub fn elem(&mut self, e: &BinElem, width: Width) -> &mut Self {
        e.write_le(width, &mut self.buf);
        self
    }

    pub fn elems(&mut self, es: &[BinElem], width: Width) -> &mut Self {
        self.buf.reserve(es.len() * width.bytes());
        for e in es {
            e.write_le(width, &mut self.buf);
        }
        self
    }

    pub fn u64s(&mut self, vs: &[u64]) -> &mut Self {
        self.buf.reserve(vs.len() * 8);
        for v in vs {
            self.u64(*v);
        }
        self
    }

    pub fn bools(&mut self, bs: &[bool]) -> &mut Self {
        self.buf.extend(bs.iter().map(|&b| b as u8));
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug)]
pub struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Reader<'a> {
        Reader { buf }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.buf.len() < n {
            return Err(WireError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    pub fn bool(&mut self) -> Result<bool, WireError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(WireError::Invalid("bit")),
        }
    }

    pub fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn u128(&mut self) -> Result<u128, WireError> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], WireError> {
        let n = self.u32()? as usize;
        self.take(n)
    }

    pub fn elem(&mut self, width: Width) -> Result<BinElem, WireError> {
        let e = BinElem::read_le(self.take(width.bytes())?, width);
        if !e.fits(width) {
            return Err(WireError::Invalid("element exceeds width"));
        }
        Ok(e)
    }

    pub fn elems(&mut self, n: usize, width: Width) -> Result<Vec<BinElem>, WireError> {
        (0..n).map(|_| self.elem(width)).collect()
    }

    pub fn u64s(&mut self, n: usize) -> Result<Vec<u64>, WireError> {
        (0..n).map(|_| self.u64()).collect()
    }

    pub fn bools(&mut self, n: usize) -> Result<Vec<bool>, WireError> {
        (0..n).map(|_| self.bool()).collect()
    }

    pub fn remaining(&self) -> usize {
        self.buf.len()
    }

    pub fn finish(self) -> Result<(), WireError> {
        match self.buf.len() {
            0 => Ok(()),
            n => Err(WireError::Trailing(n)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let mut w = Writer::new();
        w.u8(7).u32(9).u64(u64::MAX).u128(5).bytes(b"abc").elem(&BinElem::from_u64(0xff), Width::ID).bools(&[true, false]);
        let buf = w.finish();
        let mut r = Reader::new(&buf);
        assert_eq!(r.u8().unwrap(), 7);
        assert_eq!(r.u32().unwrap(), 9);
        assert_eq!(r.u64().unwrap(), u64::MAX);
        assert_eq!(r.u128().unwrap(), 5);
        assert_eq!(r.bytes().unwrap(), b"abc");
        assert_eq!(r.elem(Width::ID).unwrap(), BinElem::from_u64(0xff));
        assert_eq!(r.bools(2).unwrap(), vec![true, false]);
        r.finish().unwrap();
    }

    #[test]
    fn truncation_and_trailing() {
        assert_eq!(Reader::new(&[1, 2]).u32(), Err(WireError::Truncated));
        assert_eq!(Reader::new(&[1, 2]).finish(), Err(WireError::Trailing(2)));
        assert_eq!(Reader::new(&[2]).bool(), Err(WireError::Invalid("bit")));
    }
}
