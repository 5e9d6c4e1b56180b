//! Tensor-train containers and algebra.

mod core;
mod mpo;
mod mps;
mod ortho;
mod states;

pub use self::core::{CMatrix, Core, C64};
pub use mpo::Mpo;
pub use mps::{Canonical, Mps};
pub use ortho::TruncationPolicy;
pub use states::NamedState;

/// Builds an MPS for one of the named entangled states.
pub fn named_state(name: &str, n: usize) -> crate::Result<Mps> {
    name.parse::<NamedState>()?.build(n)
}
