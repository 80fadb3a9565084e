//! Non-binary (J=2, L) quantum CSS LDPC codes over GF(2^e).
//!
//! The crate builds orthogonal pairs `(H_Gamma, H_Delta)` of F_q check
//! matrices, decodes depolarizing noise with a joint sum-product decoder over
//! both Tanner graphs, and resolves decoder stalls on single length-2L cycles
//! by classifying the cycle against the partner matrix and solving the small
//! cycle system directly.

pub mod channel;
pub mod code;
pub mod cycle;
pub mod decoder;
pub mod gf;
pub mod linalg;
pub mod oracle;
pub mod post;
pub mod sparse;
pub mod trap;

pub use code::{build_code, BuildError, BuildOptions, BuildParams, CodeParams, CssCode};
pub use cycle::{CycleType, CycleWitness, Side};
pub use gf::{Field, Gf};
pub use channel::{DepolarizingParams, NoisePair, SyndromePair};
pub use decoder::{DecodeOutcome, DecodeStatus, Decoder, DecoderConfig};
pub use oracle::{DegeneracyOracle, SuccessVerdict};
