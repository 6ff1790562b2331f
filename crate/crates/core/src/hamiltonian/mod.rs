//! Implicit row-computable Hamiltonians.
//!
//! A [`RowOracle`] exposes the rows of a `2ⁿ × 2ⁿ` Hermitian matrix on demand,
//! together with prefix weight marginals over the binary tree of row indices.
//! Prefixes address the most-significant bits of a 0-based row index.

mod coo;
mod families;
mod sparse;
mod tree;

pub use coo::{load_coo, load_state, parse_coo, parse_state, CooHeader};
pub use families::{builtin_hamiltonian, Family, FamilyParams, InverseDiagonal, LaplacianPath};
pub use sparse::{sparse_dot, SparseRow, SparseState};
pub use tree::{StoredOracle, WeightTree};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of qubits; the matrix dimension is `2ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitCount(u32);

impl QubitCount {
    pub const MAX: u32 = 62;

    pub fn new(n: u32) -> Result<Self> {
        if (1..=Self::MAX).contains(&n) {
            Ok(QubitCount(n))
        } else {
            Err(Error::Usage(format!(
                "qubit count must be in 1..={}, got {n}",
                Self::MAX
            )))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn dim(self) -> u64 {
        1u64 << self.0
    }
}

impl fmt::Display for QubitCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Declared structure of an oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Psd,
    Hermitian,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psd" => Ok(Mode::Psd),
            "hermitian" => Ok(Mode::Hermitian),
            other => Err(Error::Usage(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Psd => "psd",
            Mode::Hermitian => "hermitian",
        })
    }
}

/// Per-row weight used for marginals and sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    /// `H_ii`; a valid sampling weight only for PSD oracles.
    Diagonal,
    /// `‖h_i‖²`.
    SquaredRowNorm,
}

/// A binary prefix `L` of a row index, `|L| ≤ n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Prefix {
    bits: u64,
    len: u32,
}

impl Prefix {
    pub const EMPTY: Prefix = Prefix { bits: 0, len: 0 };

    pub fn new(bits: u64, len: u32) -> Self {
        debug_assert!(len <= QubitCount::MAX);
        debug_assert!(len == 64 || bits >> len == 0);
        Prefix { bits, len }
    }

    /// The full-length prefix naming row `index`.
    pub fn leaf(index: u64, n: QubitCount) -> Self {
        Prefix::new(index, n.get())
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn len(self) -> u32 {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn child(self, bit: u8) -> Prefix {
        Prefix {
            bits: (self.bits << 1) | u64::from(bit & 1),
            len: self.len + 1,
        }
    }

    /// Half-open row range `[lo, hi)` covered by `S(L)`.
    pub fn range(self, n: QubitCount) -> (u64, u64) {
        let shift = n.get() - self.len;
        (self.bits << shift, (self.bits + 1) << shift)
    }
}

/// Row access to an implicit Hermitian matrix of dimension `2ⁿ`.
///
/// Implementations are immutable after construction and may be shared across
/// threads.
pub trait RowOracle: Send + Sync {
    fn qubits(&self) -> QubitCount;

    fn mode(&self) -> Mode;

    /// Nonzero entries of row `i`, columns strictly increasing.
    fn row(&self, i: u64) -> SparseRow;

    /// Real diagonal entry `H_ii`.
    fn diag(&self, i: u64) -> f64;

    /// `‖h_i‖²`.
    fn row_sq_norm(&self, i: u64) -> f64;

    /// `w(S(L)) = Σ_{i ∈ S(L)} h(i)` for the requested weight kind.
    fn marginal(&self, prefix: Prefix, kind: WeightKind) -> f64;

    fn dim(&self) -> u64 {
        self.qubits().dim()
    }

    fn weight(&self, i: u64, kind: WeightKind) -> f64 {
        match kind {
            WeightKind::Diagonal => self.diag(i),
            WeightKind::SquaredRowNorm => self.row_sq_norm(i),
        }
    }

    /// `w({0,1}ⁿ)`: the trace or the squared Frobenius norm.
    fn total_weight(&self, kind: WeightKind) -> f64 {
        self.marginal(Prefix::EMPTY, kind)
    }
}

impl<O: RowOracle + ?Sized> RowOracle for &O {
    fn qubits(&self) -> QubitCount {
        (**self).qubits()
    }
    fn mode(&self) -> Mode {
        (**self).mode()
    }
    fn row(&self, i: u64) -> SparseRow {
        (**self).row(i)
    }
    fn diag(&self, i: u64) -> f64 {
        (**self).diag(i)
    }
    fn row_sq_norm(&self, i: u64) -> f64 {
        (**self).row_sq_norm(i)
    }
    fn marginal(&self, prefix: Prefix, kind: WeightKind) -> f64 {
        (**self).marginal(prefix, kind)
    }
}

impl<O: RowOracle + ?Sized> RowOracle for Box<O> {
    fn qubits(&self) -> QubitCount {
        (**self).qubits()
    }
    fn mode(&self) -> Mode {
        (**self).mode()
    }
    fn row(&self, i: u64) -> SparseRow {
        (**self).row(i)
    }
    fn diag(&self, i: u64) -> f64 {
        (**self).diag(i)
    }
    fn row_sq_norm(&self, i: u64) -> f64 {
        (**self).row_sq_norm(i)
    }
    fn marginal(&self, prefix: Prefix, kind: WeightKind) -> f64 {
        (**self).marginal(prefix, kind)
    }
}

/// `(Hψ)_i = Σ_j H_ij ψ_j`.
pub fn apply_row<O: RowOracle + ?Sized>(oracle: &O, psi: &SparseState, i: u64) -> Complex64 {
    sparse_dot(oracle.row(i).entries(), psi.entries())
}

/// Largest `|H_ij − conj(H_ji)|` over `pairs` random index pairs.
pub fn hermitian_mismatch<O: RowOracle + ?Sized>(oracle: &O, pairs: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = oracle.dim();
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let i = rng.random_range(0..dim);
        // Bias half the probes onto stored entries of row i so the check is not vacuous.
        let j = if rng.random_bool(0.5) {
            let row = oracle.row(i);
            if row.is_empty() {
                rng.random_range(0..dim)
            } else {
                row.entries()[rng.random_range(0..row.len())].0
            }
        } else {
            rng.random_range(0..dim)
        };
        let hij = oracle.row(i).get(j);
        let hji = oracle.row(j).get(i);
        worst = worst.max((hij - hji.conj()).norm());
    }
    worst
}
