//! Two-stage coding over the Z-channel.
//!
//! The crate is organised around the objects the theory works with:
//!
//! * [`zcore`]: binary words, asymmetric distances, Z-balls and list-decoding radii.
//! * [`lp_tau`]: exact rational linear programs giving the maximal correctable
//!   fraction `tau(M)` of a code with `M` codewords, with primal/dual certificates.
//! * [`bounds`]: closed-form size and rate bounds plus the random-coding
//!   machinery for list-decodable codes (`g`, `delta`, `tau*`).
//! * [`twostage`]: the rate optimizer for two-stage encoding with one use of
//!   feedback, and the Plotkin-type point where the rate drops to zero.
//! * [`oracle`]: exhaustive and randomized searches over small codes.
//! * [`protocol`]: an executable two-stage encoder/decoder checked against an
//!   exhaustive adaptive adversary.
//! * [`report`]: CSV/JSON writers and the run manifest used by the CLI.

pub mod bounds;
pub mod error;
pub mod lp_tau;
pub mod oracle;
pub mod protocol;
pub mod rational;
pub mod report;
pub mod twostage;
pub mod zcore;

pub use error::{Error, Result};
pub use rational::Rational;
pub use zcore::{BitWord, Code};
