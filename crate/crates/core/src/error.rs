use thiserror::Error;

use crate::functionalities::FuncError;
use crate::okvs::OkvsError;
use crate::params::ParamError;
use crate::prefix::PrefixError;
use crate::transport::TransportError;
use crate::wire::WireError;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Dealer(#[from] FuncError),
    #[error(transparent)]
    Okvs(#[from] OkvsError),
    #[error("malformed message: {0}")]
    Wire(#[from] WireError),
    #[error(transparent)]
    Prefix(#[from] PrefixError),
    #[error("handshake failed: {0}")]
    Handshake(String),
    #[error("programmed list holds {len} entries, more than its public size {max}")]
    ListOverflow { len: usize, max: usize },
    #[error("selection over an empty candidate group")]
    EmptySelection,
    #[error("{phase}: {source}")]
    InPhase {
        phase: String,
        #[source]
        source: Box<ProtocolError>,
    },
}

impl ProtocolError {
    /// Attaches the protocol phase in which the error surfaced.
    pub fn in_phase(self, phase: &str) -> ProtocolError {
        match self {
            e @ ProtocolError::InPhase { .. } => e,
            e => ProtocolError::InPhase { phase: phase.to_string(), source: Box::new(e) },
        }
    }

    pub fn phase(&self) -> Option<&str> {
        match self {
            ProtocolError::InPhase { phase, .. } => Some(phase),
            _ => None,
        }
    }

    /// The error without phase attribution.
    pub fn root(&self) -> &ProtocolError {
        match self {
            ProtocolError::InPhase { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn is_validation(&self) -> bool {
        matches!(self.root(), ProtocolError::Params(_))
    }

    pub fn is_desync(&self) -> bool {
        matches!(
            self.root(),
            ProtocolError::Transport(TransportError::Desync { .. } | TransportError::IndexMismatch { .. })
                | ProtocolError::Dealer(FuncError::Transport(
                    TransportError::Desync { .. } | TransportError::IndexMismatch { .. }
                ))
        )
    }

    pub fn is_dealer_abort(&self) -> bool {
        matches!(self.root(), ProtocolError::Dealer(FuncError::Abort(_) | FuncError::Mismatch { .. }))
    }
}

pub type Result<T, E = ProtocolError> = std::result::Result<T, E>;
