//! Sampling-based classical simulation of `exp(iHt)ψ` for sparse
//! Hamiltonians with row access and prefix weight marginals.

pub mod error;
pub mod exact;
pub mod hamiltonian;
pub mod hermitian;
pub mod linalg;
pub mod pipeline;
pub mod planner;
pub mod psd;
pub mod sampler;

pub use error::{Error, Result};
