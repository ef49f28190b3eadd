//! Grammar-based compression laboratory.
//!
//! The crate implements straight-line programs (SLPs), two variants of the
//! RePair global compressor, a family of words on which RePair compresses
//! poorly compared to a small hand-built grammar, an exact smallest-grammar
//! oracle for short words, and the analysis plumbing that turns the structural
//! claims about that family into executable checks.

pub mod analysis;
pub mod budget;
pub mod oracle;
pub mod repair;
pub mod slp;
pub mod text;
pub mod witness;
pub mod word;

mod suffix;

pub use budget::{ByteBudget, CapacityError};
pub use repair::{compress, compress_bytes, Candidate, Compressor, RoundTrace, Variant};
pub use slp::{validate, GrammarSize, NtId, Production, Slp, SlpBuilder, Symbol};
pub use witness::WitnessFamily;
pub use word::RleWord;
