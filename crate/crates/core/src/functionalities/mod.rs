//! Trusted-dealer backend for the base two-party functionalities.
//!
//! Each invocation is a request frame from both parties carrying the
//! functionality tag, a monotone call index, the caller's side, the batch
//! length and an auxiliary parameter block that both sides must agree on.
//! The dealer checks the two requests against each other, evaluates the
//! functionality from [`ideal`] and answers each party on its own channel.

mod client;
mod dealer;
pub mod ideal;

pub use client::DealerClient;
pub use dealer::{Dealer, DealerReport, Invocation};

use thiserror::Error;

use crate::transport::{Tag, TransportError};
use crate::wire::WireError;

/// Which input slot of a functionality a party fills. `First` is the party
/// called S in the functionality (the key holder for so-OPRF, the OT sender,
/// the party with no output in PEQT and interval tests).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Side {
    First,
    Second,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::First => Side::Second,
            Side::Second => Side::First,
        }
    }

    fn to_byte(self) -> u8 {
        match self {
            Side::First => 0,
            Side::Second => 1,
        }
    }

    fn from_byte(b: u8) -> Option<Side> {
        match b {
            0 => Some(Side::First),
            1 => Some(Side::Second),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum FuncError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("malformed dealer message: {0}")]
    Wire(#[from] WireError),
    #[error("dealer aborted: {0}")]
    Abort(String),
    #[error("request mismatch on {tag} #{index}: {reason}")]
    Mismatch { tag: Tag, index: u32, reason: String },
    #[error("width {0} bits exceeds the 64-bit arithmetic domain")]
    WidthOverflow(u32),
}

/// Kinds of MUX value domain.
const MUX_BIN: u8 = 0;
const MUX_ARITH: u8 = 1;
