//! Quantum error correction for qubits dephased by a shared, correlated
//! bosonic bath.
//!
//! The crate computes syndrome-history statistics of a repetition code
//! exactly for a Gaussian bath, evaluates the vertex-operator expectations
//! behind them, and analyses how correlations between error-correction
//! cycles fall off with their separation.

pub mod bath;
pub mod dynamics;
pub mod error;
pub mod ope;
pub mod oracle;
pub mod pauli;
pub mod quadrature;
pub mod stabilizer;
pub mod summation;
pub mod vertex;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/bath.md")]
    mod bath {}
    #[doc = include_str!("../../../book/src/vertex.md")]
    mod vertex {}
    #[doc = include_str!("../../../book/src/stabilizer.md")]
    mod stabilizer {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/ope.md")]
    mod ope {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
