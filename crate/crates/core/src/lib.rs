//! Fuzzy private set intersection for high-dimensional points under L∞ and
//! L_p, built from a shared-output OPPRF over an OKVS, with the base
//! two-party functionalities served by a trusted dealer.

pub mod amprf;
pub mod eqsel;
pub mod error;
pub mod field;
pub mod fmap;
pub mod fpsi;
pub mod functionalities;
pub mod harness;
pub mod keys;
pub mod okvs;
pub mod params;
pub mod point;
pub mod prefix;
pub mod rng;
pub mod session;
pub mod soopprf;
pub mod transport;
pub mod wire;
