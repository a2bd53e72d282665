//! Session parameters and their side conditions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::point::PointSet;

/// Computational security parameter κ.
pub const KAPPA: u32 = 128;
/// Statistical security parameter λ.
pub const LAMBDA: u32 = 40;

/// Distance metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    Linf,
    /// L_p with the given exponent p ≥ 1.
    Lp(u32),
}

impl Metric {
    pub fn exponent(self) -> Option<u32> {
        match self {
            Metric::Linf => None,
            Metric::Lp(p) => Some(p),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Linf => f.write_str("linf"),
            Metric::Lp(p) => write!(f, "l{p}"),
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linf" | "inf" => Ok(Metric::Linf),
            _ => s
                .strip_prefix('l')
                .and_then(|p| p.parse().ok())
                .map(Metric::Lp)
                .ok_or_else(|| format!("unknown metric `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("dimension must be at least 1")]
    DimensionZero,
    #[error("coordinate bit-length {0} outside [2, 62]")]
    BitsOutOfRange(u32),
    #[error("delta must be at least 1")]
    DeltaZero,
    #[error("delta not a power of two")]
    DeltaNotPowerOfTwo,
    #[error("delta {delta} leaves no admissible coordinates in a {bits}-bit domain")]
    DeltaTooLarge { delta: u64, bits: u32 },
    #[error("metric exponent must be at least 1")]
    ExponentZero,
    #[error("prefix protocols support p in {{1, 2}}, got p = {0}")]
    PrefixExponentUnsupported(u32),
    #[error("identifier width {actual} below required {required} bits (lambda + 2 log max(m, n))")]
    IdWidthTooSmall { required: u32, actual: u32 },
    #[error("value width {actual} below required {required} bits")]
    ValueWidthTooSmall { required: u32, actual: u32 },
    #[error("value width {0} exceeds the 64-bit arithmetic share domain")]
    ValueWidthExceedsArithmetic(u32),
    #[error("tag width {actual} below required {required} bits")]
    TagWidthTooSmall { required: u32, actual: u32 },
    #[error("distance bound d*(2*delta)^p does not fit below 2^63")]
    DistanceOverflow,
    #[error("set holds {actual} points, session expects {expected}")]
    SetSizeMismatch { expected: usize, actual: usize },
    #[error("point {element} shares every dimension's delta-neighbourhood with other points (first conflict: point {other})")]
    ProjectionOverlap { element: usize, other: usize },
    #[error("set dimension {actual} does not match session dimension {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("coordinate {value} of point {index} exceeds the {bits}-bit domain")]
    CoordinateOutOfRange { index: usize, value: u64, bits: u32 },
    #[error("point within delta of domain boundary (point {index}, dimension {dim}, value {value})")]
    PointNearBoundary { index: usize, dim: usize, value: u64 },
    #[error("malformed parameter block: {0}")]
    Malformed(String),
}

/// Parameters shared by both parties of a session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    /// Sender set size.
    pub m: usize,
    /// Receiver set size.
    pub n: usize,
    pub d: usize,
    pub delta: u64,
    pub metric: Metric,
    /// Coordinate bit-length u.
    pub bits: u32,
    pub kappa: u32,
    pub lambda: u32,
    pub id_bits: u32,
    pub value_bits: u32,
    pub tag_bits: u32,
    pub prefix: bool,
}

fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

impl Params {
    /// Parameters with the default share widths: ℓ_id = 80, σ_v = 64, τ = 64.
    pub fn new(m: usize, n: usize, d: usize, delta: u64, metric: Metric, bits: u32, prefix: bool) -> Params {
        Params {
            m,
            n,
            d,
            delta,
            metric,
            bits,
            kappa: KAPPA,
            lambda: LAMBDA,
            id_bits: 80,
            value_bits: 64,
            tag_bits: 64,
            prefix,
        }
    }

    /// log2 δ for power-of-two thresholds.
    pub fn log_delta(&self) -> u32 {
        self.delta.trailing_zeros()
    }

    /// Smallest identifier width meeting |F| ≥ max(m, n)² · 2^λ.
    pub fn min_id_bits(&self) -> u32 {
        self.lambda + 2 * ceil_log2(self.m.max(self.n) as u128)
    }

    /// Smallest refined-filtering value width: λ + log m (+ p log δ for L_p).
    pub fn min_value_bits(&self) -> u32 {
        let base = self.lambda + ceil_log2(self.m as u128);
        match self.metric {
            Metric::Linf => base,
            Metric::Lp(p) => {
                let extra = (p as f64 * (self.delta as f64).log2()).ceil() as u32;
                base + extra
            }
        }
    }

    /// Smallest tag width covering every EQSel candidate with λ bits of slack.
    pub fn min_tag_bits(&self) -> u32 {
        let candidates = self.m.max(self.n) as u128 * self.d as u128 * (2 + self.log_delta() as u128) * 2;
        self.lambda + ceil_log2(candidates)
    }

    /// δ^p, the bound of the interval test (saturating; validation rules out overflow).
    pub fn delta_pow(&self) -> u64 {
        let p = self.metric.exponent().unwrap_or(1);
        self.delta.saturating_pow(p)
    }

    /// Checks every side condition on the parameters themselves.
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.d == 0 {
            return Err(ParamError::DimensionZero);
        }
        if !(2..=62).contains(&self.bits) {
            return Err(ParamError::BitsOutOfRange(self.bits));
        }
        if self.delta == 0 {
            return Err(ParamError::DeltaZero);
        }
        if self.prefix && !self.delta.is_power_of_two() {
            return Err(ParamError::DeltaNotPowerOfTwo);
        }
        if self.delta.checked_mul(2).is_none_or(|w| w >= 1u64 << self.bits) {
            return Err(ParamError::DeltaTooLarge { delta: self.delta, bits: self.bits });
        }
        if let Metric::Lp(p) = self.metric {
            if p == 0 {
                return Err(ParamError::ExponentZero);
            }
            if self.prefix && p > 2 {
                return Err(ParamError::PrefixExponentUnsupported(p));
            }
            if self.value_bits > 64 {
                return Err(ParamError::ValueWidthExceedsArithmetic(self.value_bits));
            }
            let bound = (2 * self.delta as u128)
                .checked_pow(p)
                .and_then(|x| x.checked_mul(self.d as u128));
            if bound.is_none_or(|b| b >= 1u128 << 63) {
                return Err(ParamError::DistanceOverflow);
            }
        }
        if self.id_bits < self.min_id_bits() {
            return Err(ParamError::IdWidthTooSmall { required: self.min_id_bits(), actual: self.id_bits });
        }
        if self.value_bits < self.min_value_bits() {
            return Err(ParamError::ValueWidthTooSmall {
                required: self.min_value_bits(),
                actual: self.value_bits,
            });
        }
        if self.prefix && self.tag_bits < self.min_tag_bits() {
            return Err(ParamError::TagWidthTooSmall { required: self.min_tag_bits(), actual: self.tag_bits });
        }
        Ok(())
    }

    /// Checks that a party's set matches the session: dimension, domain, and
    /// the rule that every coordinate lies in [δ, 2^u − δ).
    pub fn validate_set(&self, set: &PointSet) -> Result<(), ParamError> {
        if set.dim() != self.d {
            return Err(ParamError::DimensionMismatch { expected: self.d, actual: set.dim() });
        }
        let top = 1u64 << self.bits;
        for (index, point) in set.iter().enumerate() {
            for (dim, &value) in point.coords().iter().enumerate() {
                if value >= top {
                    return Err(ParamError::CoordinateOutOfRange { index, value, bits: self.bits });
                }
                if value < self.delta || value >= top - self.delta {
                    return Err(ParamError::PointNearBoundary { index, dim, value });
                }
            }
        }
        Ok(())
    }

    /// Flat `key=value` text block, one pair per line.
    pub fn to_text(&self) -> String {
        let p = self.metric.exponent().unwrap_or(0);
        format!(
            "m={}\nn={}\nd={}\ndelta={}\nmetric={}\np={}\nbits={}\nkappa={}\nlambda={}\nid_bits={}\nvalue_bits={}\ntag_bits={}\nprefix={}\n",
            self.m,
            self.n,
            self.d,
            self.delta,
            if p == 0 { "linf" } else { "lp" },
            p,
            self.bits,
            self.kappa,
            self.lambda,
            self.id_bits,
            self.value_bits,
            self.tag_bits,
            self.prefix
        )
    }

    pub fn from_text(text: &str) -> Result<Params, ParamError> {
        let mut kv = BTreeMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ParamError::Malformed(format!("line `{line}` has no `=`")))?;
            kv.insert(k.trim(), v.trim());
        }
        fn get<T: FromStr>(kv: &BTreeMap<&str, &str>, key: &str) -> Result<T, ParamError> {
            kv.get(key)
                .ok_or_else(|| ParamError::Malformed(format!("missing `{key}`")))?
                .parse()
                .map_err(|_| ParamError::Malformed(format!("bad value for `{key}`")))
        }
        let metric = match kv.get("metric").copied() {
            Some("linf") => Metric::Linf,
            Some("lp") => Metric::Lp(get(&kv, "p")?),
            _ => return Err(ParamError::Malformed("bad metric".into())),
        };
        Ok(Params {
            m: get(&kv, "m")?,
            n: get(&kv, "n")?,
            d: get(&kv, "d")?,
            delta: get(&kv, "delta")?,
            metric,
            bits: get(&kv, "bits")?,
            kappa: get(&kv, "kappa")?,
            lambda: get(&kv, "lambda")?,
            id_bits: get(&kv, "id_bits")?,
            value_bits: get(&kv, "value_bits")?,
            tag_bits: get(&kv, "tag_bits")?,
            prefix: get(&kv, "prefix")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;

    fn base() -> Params {
        Params::new(256, 256, 4, 16, Metric::Linf, 32, false)
    }

    #[test]
    fn reference_parameters_validate() {
        let p = base();
        assert_eq!(p.validate(), Ok(()));
        // λ + 2·log2(256) = 40 + 16
        assert_eq!(p.min_id_bits(), 56);
        assert!(p.id_bits >= p.min_id_bits());
    }

    #[test]
    fn prefix_requires_power_of_two() {
        let mut p = base();
        p.delta = 15;
        p.prefix = true;
        let err = p.validate().unwrap_err();
        assert_eq!(err, ParamError::DeltaNotPowerOfTwo);
        assert_eq!(err.to_string(), "delta not a power of two");
        p.prefix = false;
        assert_eq!(p.validate(), Ok(()));
    }

    #[test]
    fn boundary_points_rejected() {
        let p = base();
        let set = PointSet::new(4, vec![Point::new(vec![3, 100, 100, 100])]);
        let err = p.validate_set(&set).unwrap_err();
        assert!(matches!(err, ParamError::PointNearBoundary { index: 0, dim: 0, value: 3 }));
        assert!(err.to_string().starts_with("point within delta of domain boundary"));
        let top = (1u64 << 32) - 16;
        let set = PointSet::new(4, vec![Point::new(vec![16, 100, top - 1, 100])]);
        assert_eq!(p.validate_set(&set), Ok(()));
        let set = PointSet::new(4, vec![Point::new(vec![16, 100, top, 100])]);
        assert!(p.validate_set(&set).is_err());
    }

    #[test]
    fn each_violation_is_named() {
        let mut p = base();
        p.id_bits = 50;
        assert!(matches!(p.validate(), Err(ParamError::IdWidthTooSmall { required: 56, actual: 50 })));

        let mut p = base();
        p.value_bits = 47;
        assert!(matches!(p.validate(), Err(ParamError::ValueWidthTooSmall { required: 48, .. })));

        let mut p = base();
        p.metric = Metric::Lp(2);
        p.value_bits = 64;
        // 40 + 8 + 2·4 = 56
        assert_eq!(p.min_value_bits(), 56);
        assert_eq!(p.validate(), Ok(()));
        p.value_bits = 128;
        assert_eq!(p.validate(), Err(ParamError::ValueWidthExceedsArithmetic(128)));

        let mut p = base();
        p.metric = Metric::Lp(3);
        p.prefix = true;
        assert_eq!(p.validate(), Err(ParamError::PrefixExponentUnsupported(3)));

        let mut p = base();
        p.delta = 0;
        assert_eq!(p.validate(), Err(ParamError::DeltaZero));

        let mut p = base();
        p.d = 0;
        assert_eq!(p.validate(), Err(ParamError::DimensionZero));

        let mut p = Params::new(4, 4, 4, 1 << 20, Metric::Lp(3), 62, false);
        p.value_bits = 64;
        assert_eq!(p.validate(), Err(ParamError::DistanceOverflow));
    }

    #[test]
    fn text_block_roundtrip() {
        let mut p = base();
        p.metric = Metric::Lp(2);
        p.prefix = true;
        let text = p.to_text();
        assert!(text.contains("delta=16\n"));
        assert_eq!(Params::from_text(&text), Ok(p));
        assert!(Params::from_text("m=1").is_err());
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("linf".parse::<Metric>(), Ok(Metric::Linf));
        assert_eq!("l2".parse::<Metric>(), Ok(Metric::Lp(2)));
        assert!("cosine".parse::<Metric>().is_err());
    }
}
