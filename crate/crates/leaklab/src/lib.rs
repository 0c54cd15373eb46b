//! Simulation toolkit for distance-induced leakage in order-revealing
//! encryption, and for the learning problems that leakage enables.
//!
//! The crate models an idealized function-revealing encryption scheme whose
//! evaluation oracle leaks, for any ciphertext triple, the pairwise order
//! relations plus one extra bit: whether the closer pair of the sorted
//! triple sits to the left or to the right. On top of that oracle it builds
//!
//! - mistake-bounded online learners for encrypted threshold concepts,
//! - a security game in which an adversary submits two plaintext vectors
//!   with identical leakage and must tell which one was encrypted,
//! - a reduction that turns any accurate, distribution-free learner into
//!   a distinguisher for that game, and
//! - differential-privacy bookkeeping (group privacy, composition,
//!   subsampling) together with a private threshold learner based on the
//!   exponential mechanism.
//!
//! Monte Carlo verifiers for the combinatorial lemmas behind the reduction
//! live in [`lemmas`], and reproducible experiment drivers in [`exp`].
//! The `examples/` directory demonstrates each capability end to end; the
//! `leaklab` binary exposes the same runners as subcommands.
//!
//! All randomness flows from explicit seeds through counter-mode streams,
//! so every result in this crate is reproducible bit for bit, independent
//! of thread count.

pub mod attack;
pub mod concepts;
pub mod dp;
pub mod error;
pub mod exp;
pub mod fre;
pub mod leakage;
pub mod lemmas;
pub mod online;

pub use error::{Error, Result};
pub use leakage::{DistanceFunctionKind, LeakOutput, Plaintext};
