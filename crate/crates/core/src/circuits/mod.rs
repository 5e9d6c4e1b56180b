//! Closed-form circuit MPOs and gate-group sequences.

mod qfa;
mod qft;
mod sequence;
mod shor;
mod simon;

pub use qfa::*;
pub use qft::*;
pub use sequence::*;
pub use shor::*;
pub use simon::*;
