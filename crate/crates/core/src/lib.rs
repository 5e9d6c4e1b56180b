//! Quantum circuit simulation with tensor trains.
//!
//! States are matrix product states ([`Mps`]), gates and whole circuits are
//! matrix product operators ([`Mpo`]). The crate provides
//!
//! * the tensor-train algebra (contraction, orthonormalization, truncation,
//!   diagonal lifting, core transformations) in [`tensor`],
//! * low-rank MPOs for single-qubit and (multi-)controlled gates in [`gates`],
//! * closed-form MPOs for the quantum full adder, adder networks, Simon's
//!   circuit, QFT gate groups and the modular exponentiation oracle of Shor's
//!   algorithm in [`circuits`],
//! * exact marginals, postselection and generative qubit-wise sampling in
//!   [`sampling`],
//! * an independent brute-force statevector simulator in [`dense`] that the
//!   test suites use as ground truth.
//!
//! Qubit positions in gate and circuit constructors are 1-based and the first
//! qubit is the most significant bit of a basis-state index. Core indices in
//! the tensor API are 0-based.

pub mod circuits;
pub mod dense;
mod error;
pub mod gates;
pub mod sampling;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use gates::{GateMatrix, GatePlacement};
pub use tensor::{Core, Mpo, Mps, NamedState, TruncationPolicy, C64};

/// Upper bound on the number of entries any dense path may materialize.
///
/// Defaults to 2^20 and can be overridden with the `MPOQ_DENSE_CAP`
/// environment variable.
pub fn dense_cap() -> usize {
    std::env::var("MPOQ_DENSE_CAP")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(1 << 20)
}

pub(crate) fn check_dense_cap(requested: usize) -> Result<()> {
    let cap = dense_cap();
    if requested > cap {
        return Err(Error::DenseCapExceeded { requested, cap });
    }
    Ok(())
}
