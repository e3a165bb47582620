use thiserror::Error;

/// Errors shared by every layer of the codec.
#[derive(Debug, Error)]
pub enum Error {
    /// Dimension or block-size mismatch.
    #[error("size error: {0}")]
    Size(String),

    /// Invalid argument value (zero vector, non-positive step, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// No reconstructed neighbors are available for prediction.
    #[error("no neighbors available")]
    NeighborsUnavailable,

    /// The bitstream cannot be decoded. `position` is the byte offset within
    /// the stream (or container) where decoding gave up.
    #[error("decode error at byte {position}: {reason}")]
    Decode { position: usize, reason: String },

    /// Unsupported or malformed input file.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn size(msg: impl Into<String>) -> Self {
        Error::Size(msg.into())
    }

    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn decode(position: usize, reason: impl Into<String>) -> Self {
        Error::Decode {
            position,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
