#![allow(dead_code)]

use hamsim::hamiltonian::{builtin_hamiltonian, Family, FamilyParams, Mode, QubitCount, RowOracle, SparseState, StoredOracle};
use hamsim::linalg::CMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn q(n: u32) -> QubitCount {
    QubitCount::new(n).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Unit state supported on `nnz` distinct random basis vectors.
pub fn random_state(n: QubitCount, nnz: usize, rng: &mut ChaCha8Rng) -> SparseState {
    let mut idx: Vec<u64> = Vec::new();
    while idx.len() < nnz.min(n.dim() as usize) {
        let i = rng.random_range(0..n.dim());
        if !idx.contains(&i) {
            idx.push(i);
        }
    }
    let entries = idx.into_iter().map(|i| (i, complex(rng))).collect();
    SparseState::normalized(n, entries).unwrap()
}

/// Dense `m × m` PSD `GG*` of the given rank, exactly Hermitian.
pub fn random_dense_psd(m: usize, rank: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(m, rank, |_, _| complex(rng));
    let h = &g * g.adjoint();
    (&h + h.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn random_dense_hermitian(m: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(m, m, |_, _| complex(rng));
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Stores `block` in the top-left corner of a `2ⁿ × 2ⁿ` zero matrix.
pub fn padded_oracle(block: &CMatrix, mode: Mode) -> StoredOracle {
    let m = block.nrows();
    let n = (m as f64).log2().ceil().max(1.0) as u32;
    let mut entries = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if block[(i, j)] != Complex64::new(0.0, 0.0) {
                entries.push((i as u64, j as u64, block[(i, j)]));
            }
        }
    }
    StoredOracle::from_entries(q(n), mode, entries).unwrap()
}

/// A family member rescaled so that `‖H‖ ≤ max_norm` and, for psd
/// families, `tr H ≤ max_trace`.
pub fn bounded_instance(
    family: Family,
    n: QubitCount,
    params: &FamilyParams,
    seed: u64,
    max_trace: f64,
    max_norm: f64,
) -> Box<dyn RowOracle> {
    let unit = builtin_hamiltonian(family, n, params, seed).unwrap();
    let stats = hamsim::planner::compute_stats(&*unit, hamsim::planner::StatsMethod::ExactDense).unwrap();
    let mut scale = params.scale * max_norm / stats.spec_norm;
    if stats.trace_h > 0.0 {
        scale = scale.min(params.scale * max_trace / stats.trace_h);
    }
    let p = FamilyParams {
        scale,
        ..params.clone()
    };
    builtin_hamiltonian(family, n, &p, seed).unwrap()
}
