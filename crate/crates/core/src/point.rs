//! Input points and the dataset file format.
//!
//! ```text
//! d=<d> bits=<u> n=<n>
//! <c_1> <c_2> ... <c_d>
//! ...
//! ```

use std::fmt::Write as _;

use thiserror::Error;

/// A point of U^d with unsigned coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Vec<u64>);

impl Point {
    pub fn new(coords: Vec<u64>) -> Point {
        Point(coords)
    }

    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Canonical serialization: each coordinate as 8 little-endian bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.0.iter().flat_map(|c| c.to_le_bytes()).collect()
    }

    pub fn from_bytes(bytes: &[u8]) -> Point {
        Point(bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

/// An ordered set of points of equal dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    d: usize,
    points: Vec<Point>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DatasetError {
    #[error("missing or malformed header (expected `d=<d> bits=<u> n=<n>`)")]
    Header,
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("header announces {expected} points, found {actual}")]
    Count { expected: usize, actual: usize },
}

impl PointSet {
    /// Panics if a point's dimension differs from `d`.
    pub fn new(d: usize, points: Vec<Point>) -> PointSet {
        assert!(points.iter().all(|p| p.dim() == d), "dimension mismatch");
        PointSet { d, points }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn to_text(&self, bits: u32) -> String {
        let mut out = format!("d={} bits={} n={}\n", self.d, bits, self.points.len());
        for p in &self.points {
            let line: Vec<String> = p.coords().iter().map(u64::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Parses a dataset file; returns the set and the announced bit-length.
    pub fn from_text(text: &str) -> Result<(PointSet, u32), DatasetError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(DatasetError::Header)?;
        let mut d = None;
        let mut bits = None;
        let mut n = None;
        for field in header.split_whitespace() {
            let (k, v) = field.split_once('=').ok_or(DatasetError::Header)?;
            let v: u64 = v.parse().map_err(|_| DatasetError::Header)?;
            match k {
                "d" => d = Some(v as usize),
                "bits" => bits = Some(v as u32),
                "n" => n = Some(v as usize),
                _ => return Err(DatasetError::Header),
            }
        }
        let (d, bits, n) = (d.ok_or(DatasetError::Header)?, bits.ok_or(DatasetError::Header)?, n.ok_or(DatasetError::Header)?);
        let mut points = Vec::with_capacity(n);
        for (idx, line) in lines {
            let coords = line
                .split_whitespace()
                .map(|c| c.parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| DatasetError::Line { line: idx + 1, reason: e.to_string() })?;
            if coords.len() != d {
                return Err(DatasetError::Line {
                    line: idx + 1,
                    reason: format!("expected {d} coordinates, found {}", coords.len()),
                });
            }
            points.push(Point(coords));
        }
        if points.len() != n {
            return Err(DatasetError::Count { expected: n, actual: points.len() });
        }
        Ok((PointSet { d, points }, bits))
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_text_roundtrip() {
        let set = PointSet::new(2, vec![Point::new(vec![16, 40]), Point::new(vec![100, 7])]);
        let text = set.to_text(12);
        assert!(text.starts_with("d=2 bits=12 n=2\n16 40\n"));
        assert_eq!(PointSet::from_text(&text), Ok((set, 12)));
    }

    #[test]
    fn dataset_errors() {
        assert_eq!(PointSet::from_text(""), Err(DatasetError::Header));
        assert!(matches!(PointSet::from_text("d=2 bits=8 n=1\n1 2 3\n"), Err(DatasetError::Line { line: 2, .. })));
        assert_eq!(
            PointSet::from_text("d=1 bits=8 n=2\n5\n"),
            Err(DatasetError::Count { expected: 2, actual: 1 })
        );
    }
}
