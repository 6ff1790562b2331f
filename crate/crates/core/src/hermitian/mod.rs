//! Evolution for general Hermitian Hamiltonians.
//!
//! Rows are drawn with `p(i) = ‖h_i‖²/‖H‖²_F` and stacked into
//! `A = [h_{t_1}/√(M p(t_1)), …]`, so that `E[AA*] = H²`. With
//! `u = Hψ`, `v = A*ψ`, `z = A*u` and `B = A*A`,
//!
//! `ψ̂ = ψ + itu + t² A f_K(t²B) v + it³ A g_K(t²B) z`.

mod series;
mod shift;

pub use series::{f_exact, g_exact, SeriesKind, TruncatedSeries};
pub use shift::{trace_shift, ShiftedOracle};

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{sparse_dot, RowOracle, SparseRow, SparseState, WeightKind};
use crate::linalg::{CMatrix, CVector};
use crate::psd::{check_memory, densify, ColumnCombination, SketchOptions, MAX_DENSE_QUBITS};
use crate::sampler::SampleBatch;

#[derive(Debug, Clone)]
pub struct SketchHermitian {
    /// Sampled rows `t_j`: distinct and sorted when folded.
    pub columns: Vec<u64>,
    /// Column scale `1/√(M p(t_j))`; a row drawn `c` times and folded carries `√c` more.
    pub scales: Vec<f64>,
    /// Number of draws `M`.
    pub sampled: usize,
    /// Unscaled rows `h_{t_j}`.
    pub rows: Vec<SparseRow>,
    /// Gram matrix `A*A`.
    pub b: CMatrix,
    /// `u = Hψ`, sorted by index.
    pub u: Vec<(u64, Complex64)>,
    pub v: CVector,
    pub z: CVector,
}

impl SketchHermitian {
    pub fn u_at(&self, i: u64) -> Complex64 {
        match self.u.binary_search_by_key(&i, |e| e.0) {
            Ok(k) => self.u[k].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }
}

/// `Hψ` by scattering the columns selected by `ψ`'s support.
pub fn apply_hamiltonian<O: RowOracle + ?Sized>(oracle: &O, psi: &SparseState) -> Vec<(u64, Complex64)> {
    let mut out: BTreeMap<u64, Complex64> = BTreeMap::new();
    for &(c, a) in psi.entries() {
        for &(i, h) in oracle.row(c).entries() {
            *out.entry(i).or_default() += h.conj() * a;
        }
    }
    out.into_iter().collect()
}

pub fn build_sketch_hermitian<O: RowOracle + ?Sized>(
    oracle: &O,
    batch: &SampleBatch,
    psi: &SparseState,
    opts: &SketchOptions,
) -> Result<SketchHermitian> {
    if batch.kind != WeightKind::SquaredRowNorm {
        return Err(Error::Usage(
            "hermitian sketch needs a batch drawn with squared-row-norm weights".into(),
        ));
    }
    let m = batch.len() as f64;
    let (columns, scales): (Vec<u64>, Vec<f64>) = if opts.fold_duplicates {
        let mut grouped: BTreeMap<u64, (usize, f64)> = BTreeMap::new();
        for (&i, &p) in batch.indices.iter().zip(&batch.probabilities) {
            grouped.entry(i).or_insert((0, p)).0 += 1;
        }
        grouped
            .into_iter()
            .map(|(i, (count, p))| (i, (count as f64 / (m * p)).sqrt()))
            .unzip()
    } else {
        batch
            .indices
            .iter()
            .zip(&batch.probabilities)
            .map(|(&i, &p)| (i, 1.0 / (m * p).sqrt()))
            .unzip()
    };
    assert!(
        batch.probabilities.iter().all(|&p| p > 0.0),
        "sampler produced a zero-probability row"
    );
    let mut sketch = sketch_from_scaled_columns(oracle, columns, scales, psi, opts)?;
    sketch.sampled = batch.len();
    Ok(sketch)
}

/// Every nonzero row once with unit scale, so `AA* = H²` exactly.
pub fn census_sketch<O: RowOracle + ?Sized>(
    oracle: &O,
    psi: &SparseState,
    opts: &SketchOptions,
) -> Result<SketchHermitian> {
    if oracle.qubits().get() > MAX_DENSE_QUBITS {
        return Err(Error::Usage(format!("census sketch is limited to n ≤ {MAX_DENSE_QUBITS}")));
    }
    let columns: Vec<u64> = (0..oracle.dim()).filter(|&i| oracle.row_sq_norm(i) > 0.0).collect();
    let scales = vec![1.0; columns.len()];
    sketch_from_scaled_columns(oracle, columns, scales, psi, opts)
}

pub fn sketch_from_scaled_columns<O: RowOracle + ?Sized>(
    oracle: &O,
    columns: Vec<u64>,
    scales: Vec<f64>,
    psi: &SparseState,
    opts: &SketchOptions,
) -> Result<SketchHermitian> {
    if psi.qubits() != oracle.qubits() {
        return Err(Error::Usage("state and Hamiltonian qubit counts differ".into()));
    }
    if columns.len() != scales.len() {
        return Err(Error::Usage("one scale per sketch column is required".into()));
    }
    let m = columns.len();
    check_memory(m, 3, opts)?;

    let rows: Vec<SparseRow> = columns.par_iter().map(|&c| oracle.row(c)).collect();
    let conj_rows: Vec<Vec<(u64, Complex64)>> = rows
        .iter()
        .map(|r| r.entries().iter().map(|&(c, v)| (c, v.conj())).collect())
        .collect();
    // B_jk = s_j s_k Σ_i H_{t_j,i} conj(H_{t_k,i}); upper triangle then mirror.
    let upper: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|j| {
            (j..m)
                .map(|k| sparse_dot(rows[j].entries(), &conj_rows[k]) * (scales[j] * scales[k]))
                .collect()
        })
        .collect();
    let mut b = CMatrix::zeros(m, m);
    for (j, row) in upper.iter().enumerate() {
        for (off, &val) in row.iter().enumerate() {
            let k = j + off;
            b[(j, k)] = val;
            b[(k, j)] = val.conj();
        }
        b[(j, j)].im = 0.0;
    }

    let u = apply_hamiltonian(oracle, psi);
    let v = CVector::from_iterator(
        m,
        rows.iter()
            .zip(&scales)
            .map(|(r, &s)| sparse_dot(r.entries(), psi.entries()) * s),
    );
    let z = CVector::from_iterator(
        m,
        rows.iter().zip(&scales).map(|(r, &s)| sparse_dot(r.entries(), &u) * s),
    );
    Ok(SketchHermitian {
        columns,
        scales,
        sampled: m,
        rows,
        b,
        u,
        v,
        z,
    })
}

/// Result of [`evolve_hermitian`]; amplitudes are evaluated on demand.
#[derive(Debug, Clone)]
pub struct HermitianEvolved {
    pub t: f64,
    pub order: usize,
    u: Vec<(u64, Complex64)>,
    combination: ColumnCombination,
}

pub fn evolve_hermitian(
    sketch: &SketchHermitian,
    psi: &SparseState,
    t: f64,
    order: usize,
) -> Result<HermitianEvolved> {
    let t2 = t * t;
    let by = &sketch.b * Complex64::new(t2, 0.0);
    let p1 = TruncatedSeries::f(order).eval_matrix(&by, &sketch.v)?;
    let p2 = TruncatedSeries::g(order).eval_matrix(&by, &sketch.z)?;
    let w1 = Complex64::new(t2, 0.0);
    let w2 = Complex64::new(0.0, t2 * t);
    let per_position: Vec<Complex64> = (0..sketch.columns.len())
        .map(|j| (p1[j] * w1 + p2[j] * w2) * sketch.scales[j])
        .collect();
    Ok(HermitianEvolved {
        t,
        order,
        u: sketch.u.clone(),
        combination: ColumnCombination::new(psi.clone(), &sketch.columns, &per_position),
    })
}

impl HermitianEvolved {
    fn u_at(&self, i: u64) -> Complex64 {
        match self.u.binary_search_by_key(&i, |e| e.0) {
            Ok(k) => self.u[k].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `ψ_i + it(Hψ)_i + t²(A p₁)_i + it³(A p₂)_i`.
    pub fn amplitude<O: RowOracle + ?Sized>(&self, oracle: &O, i: u64) -> Complex64 {
        self.combination.psi.amplitude(i)
            + Complex64::new(0.0, self.t) * self.u_at(i)
            + self.combination.correction(oracle, i)
    }

    pub fn sparse_state<O: RowOracle + ?Sized>(&self, oracle: &O) -> Vec<(u64, Complex64)> {
        let mut out = self.combination.correction_support(oracle);
        let it = Complex64::new(0.0, self.t);
        for &(i, a) in &self.u {
            *out.entry(i).or_default() += it * a;
        }
        for &(i, a) in self.combination.psi.entries() {
            *out.entry(i).or_default() += a;
        }
        out.into_iter().collect()
    }

    pub fn dense_state<O: RowOracle + ?Sized>(&self, oracle: &O) -> Result<Vec<Complex64>> {
        densify(oracle.qubits().get(), self.sparse_state(oracle))
    }
}
