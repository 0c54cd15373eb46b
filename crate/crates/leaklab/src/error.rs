//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by library operations.
///
/// Oracle lookups that are *protocol-level* failures (decrypting a foreign
/// ciphertext, evaluating a malformed handle) are not errors; they return
/// `None` ("bottom") so callers can model them as adversary-visible outcomes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("plaintext width {0} outside supported range 1..=62")]
    WidthOutOfRange(u8),
    #[error("plaintext value {value} outside domain [1, 2^{width}]")]
    ValueOutOfRange { value: u64, width: u8 },
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(u8, u8),
    #[error("exhaustive bisection check supports width <= {max}, got {got}")]
    ExhaustiveBudget { max: u8, got: u8 },
    #[error("unknown secret key handle")]
    UnknownKey,
    #[error("dataset must hold at least one example")]
    EmptyDataset,
    #[error("learner requires exact-distance leakage, got {0}")]
    UnsupportedLeakage(String),
    #[error("privacy parameters out of range: epsilon={epsilon}, delta={delta}")]
    BadPrivacyParams { epsilon: f64, delta: f64 },
    #[error("subsampling amplification requires epsilon <= 1, got {0}")]
    EpsilonTooLarge(f64),
    #[error("subsampling amplification requires n >= 2m, got m={m}, n={n}")]
    SubsampleRatio { m: u64, n: u64 },
    #[error("sample values must be sorted ascending")]
    UnsortedSample,
    #[error("operation requires n >= {min}, got {got}")]
    SampleTooSmall { min: usize, got: usize },
    #[error("example kind does not match the running game")]
    ExampleKindMismatch,
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
