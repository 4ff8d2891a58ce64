use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wav error: {0}")]
    Wav(#[from] hound::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported wav encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("audio data is empty")]
    Empty,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("invalid sample rate {0}")]
    InvalidRate(u32),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    RateMismatch(u32, u32),
    #[error("loudness is unmeasurable (all blocks gated)")]
    Unmeasurable,
    #[error("input is silent")]
    Silent,
    #[error("non-finite value in {0}")]
    NonFiniteValue(String),
    #[error("no non-silent segment found after {0} attempts")]
    NoSegment(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
