//! Post-processing toolkit for device-independent quantum key distribution.
//!
//! The crate is organised along the protocol pipeline:
//!
//! * [`model`] simulates honest device statistics and CHSH scoring.
//! * [`ec`] builds spatially-coupled LDPC codes and reconciles Alice's string
//!   at Bob's side with belief propagation, plus finite-size overhead bounds.
//! * [`hashing`] provides the 64-bit almost-Δ-universal family, Wegman-Carter
//!   tags and the pre-shared key `K0`.
//! * [`trevisan`] is the Trevisan extractor used for privacy amplification.
//! * [`keylen`] evaluates the finite-size secure key length.
//! * [`protocol`] runs the two parties as independent state machines over a
//!   framed transport.

pub mod bits;
pub mod ec;
pub mod entropy;
pub mod hashing;
pub mod keylen;
pub mod model;
pub mod protocol;
pub mod rng;
pub mod trevisan;

pub use ec::{DecoderPriors, ScLdpcCode};
pub use hashing::{HashSeed, SharedKeyK0, Tag64};
pub use keylen::{KeyLengthBreakdown, SecurityParams};
pub use model::{DeviceModel, InputPolicy, RoundData};
pub use protocol::{ProtocolParams, RunOutcome};
pub use rng::SimRng;
pub use trevisan::ExtractorParams;
