//! Nyström evolution for positive semidefinite Hamiltonians.
//!
//! With sampled columns `t_1..t_M`, `A_ij = H_{i,t_j}` and `B = H[t, t]`, the
//! approximation `Ĥ = A B⁺ A*` gives
//! `e^{iĤt}ψ = ψ + A g(D) B⁺ A*ψ` with `D = B⁺ A*A` and
//! `g(x) = Σ_{k≥1} (it)^k x^{k-1} / k!`. The truncated `g_K` is applied through
//! the recurrence `b_j = (it)^{K-j}/(K-j)! · v + D b_{j-1}`, `v = B⁺ A*ψ`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{Mode, RowOracle, SparseRow, SparseState, WeightKind};
use crate::linalg::{all_finite, default_pinv_rtol, pinv_hermitian, CMatrix, CVector, HermitianPinv};
use crate::sampler::SampleBatch;

/// Largest `n` for which a dense state vector may be materialized.
pub const MAX_DENSE_QUBITS: u32 = 24;

/// How `A*A` and `A*ψ` are accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accumulation {
    /// Only rows that intersect the sampled columns' support (all other rows
    /// of `A` are zero).
    Reachable,
    /// Every row of `H`, block by block. Limited to `n ≤ 24`.
    FullScan,
}

#[derive(Debug, Clone)]
pub struct SketchOptions {
    /// Rows per accumulation block.
    pub block_size: usize,
    /// Collapse repeated sampled indices (see each evolver for the identity used).
    pub fold_duplicates: bool,
    /// Relative eigenvalue cutoff for `B⁺`; `None` uses `max(M, 16)·ε_mach`.
    pub pinv_rtol: Option<f64>,
    pub accumulation: Accumulation,
    pub memory_budget_bytes: usize,
}

impl Default for SketchOptions {
    fn default() -> Self {
        SketchOptions {
            block_size: 4096,
            fold_duplicates: true,
            pinv_rtol: None,
            accumulation: Accumulation::Reachable,
            memory_budget_bytes: 4 << 30,
        }
    }
}

/// Sorted distinct columns plus, for each, the sketch positions holding it.
#[derive(Debug, Clone)]
pub(crate) struct ColumnIndex {
    pub unique: Vec<u64>,
    pub positions: Vec<Vec<usize>>,
}

impl ColumnIndex {
    pub fn new(columns: &[u64]) -> Self {
        let mut map: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (j, &c) in columns.iter().enumerate() {
            map.entry(c).or_default().push(j);
        }
        let (unique, positions) = map.into_iter().unzip();
        ColumnIndex { unique, positions }
    }

    /// Calls `f(position, H_{i,column})` for every sampled column hit by `row`.
    pub fn for_each_hit(&self, row: &SparseRow, mut f: impl FnMut(usize, Complex64)) {
        let entries = row.entries();
        let (mut a, mut b) = (0, 0);
        while a < entries.len() && b < self.unique.len() {
            match entries[a].0.cmp(&self.unique[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    for &j in &self.positions[b] {
                        f(j, entries[a].1);
                    }
                    a += 1;
                    b += 1;
                }
            }
        }
    }
}

pub(crate) fn check_memory(m: usize, matrices: usize, opts: &SketchOptions) -> Result<()> {
    let bytes = (m as u128) * (m as u128) * 16 * matrices as u128
        + (opts.block_size as u128) * (m as u128) * 16;
    if bytes > opts.memory_budget_bytes as u128 {
        return Err(Error::Resource(format!(
            "sketch with {m} columns needs about {} MiB, budget is {} MiB",
            bytes >> 20,
            opts.memory_budget_bytes >> 20
        )));
    }
    Ok(())
}

/// Everything the PSD recurrence needs.
#[derive(Debug, Clone)]
pub struct SketchPsd {
    /// Sketch columns `t_j`: distinct and sorted when folded, draw order otherwise.
    pub columns: Vec<u64>,
    /// Number of draws `M` the sketch was built from.
    pub sampled: usize,
    /// `B_jk = H_{t_j,t_k}`.
    pub b: CMatrix,
    /// `A*A`.
    pub gram: CMatrix,
    pub b_pinv: HermitianPinv,
    /// `D = B⁺ A*A`.
    pub d: CMatrix,
    /// `v = B⁺ A*ψ`.
    pub v: CVector,
    pub pinv_tolerance: f64,
}

pub fn build_sketch_psd<O: RowOracle + ?Sized>(
    oracle: &O,
    batch: &SampleBatch,
    psi: &SparseState,
    opts: &SketchOptions,
) -> Result<SketchPsd> {
    if batch.kind != WeightKind::Diagonal {
        return Err(Error::Usage("psd sketch needs a batch drawn with diagonal weights".into()));
    }
    let columns = if opts.fold_duplicates {
        let mut c = batch.indices.clone();
        c.sort_unstable();
        c.dedup();
        c
    } else {
        batch.indices.clone()
    };
    let mut sketch = sketch_from_columns(oracle, columns, psi, opts)?;
    sketch.sampled = batch.len();
    Ok(sketch)
}

/// Builds the sketch for an explicit column list (repeats allowed).
pub fn sketch_from_columns<O: RowOracle + ?Sized>(
    oracle: &O,
    columns: Vec<u64>,
    psi: &SparseState,
    opts: &SketchOptions,
) -> Result<SketchPsd> {
    if oracle.mode() != Mode::Psd {
        return Err(Error::Usage("psd evolution requires a psd oracle".into()));
    }
    if psi.qubits() != oracle.qubits() {
        return Err(Error::Usage("state and Hamiltonian qubit counts differ".into()));
    }
    if columns.is_empty() {
        return Err(Error::Usage("sketch needs at least one column".into()));
    }
    if opts.block_size == 0 {
        return Err(Error::Usage("block size must be positive".into()));
    }
    let m = columns.len();
    check_memory(m, 5, opts)?;
    let index = ColumnIndex::new(&columns);

    let sampled_rows: Vec<SparseRow> = columns.par_iter().map(|&c| oracle.row(c)).collect();
    let mut b = CMatrix::zeros(m, m);
    for (j, row) in sampled_rows.iter().enumerate() {
        index.for_each_hit(row, |k, v| b[(j, k)] = v);
    }

    let rows: Vec<u64> = match opts.accumulation {
        Accumulation::Reachable => {
            let mut r: Vec<u64> = sampled_rows
                .iter()
                .flat_map(|row| row.entries().iter().map(|e| e.0))
                .collect();
            r.sort_unstable();
            r.dedup();
            r
        }
        Accumulation::FullScan => {
            if oracle.qubits().get() > MAX_DENSE_QUBITS {
                return Err(Error::Usage(format!(
                    "full-scan accumulation is limited to n ≤ {MAX_DENSE_QUBITS}"
                )));
            }
            (0..oracle.dim()).collect()
        }
    };
    let (gram, at_psi) = accumulate_blocks(oracle, &rows, &index, psi, m, opts.block_size);

    let rtol = opts.pinv_rtol.unwrap_or_else(|| default_pinv_rtol(m));
    let b_pinv = pinv_hermitian(&b, rtol)?;
    let floor = -1e-10 * b_pinv.max_eigenvalue.abs().max(1.0);
    if b_pinv.min_eigenvalue < floor {
        return Err(Error::Domain(format!(
            "sampled principal submatrix has eigenvalue {:.3e}; Hamiltonian is not psd",
            b_pinv.min_eigenvalue
        )));
    }
    let d = &b_pinv.pinv * &gram;
    let v = &b_pinv.pinv * &at_psi;
    if !all_finite(d.iter().copied()) || !all_finite(v.iter().copied()) {
        return Err(Error::numerical("psd sketch: D or v is not finite"));
    }
    Ok(SketchPsd {
        columns,
        sampled: m,
        pinv_tolerance: b_pinv.cutoff,
        b,
        gram,
        b_pinv,
        d,
        v,
    })
}

/// Blocks of rows are reduced in parallel and summed in block order.
fn accumulate_blocks<O: RowOracle + ?Sized>(
    oracle: &O,
    rows: &[u64],
    index: &ColumnIndex,
    psi: &SparseState,
    m: usize,
    block_size: usize,
) -> (CMatrix, CVector) {
    const BLOCKS_PER_ROUND: usize = 16;
    let mut gram = CMatrix::zeros(m, m);
    let mut at_psi = CVector::zeros(m);
    let blocks: Vec<&[u64]> = rows.chunks(block_size).collect();
    for round in blocks.chunks(BLOCKS_PER_ROUND) {
        let partials: Vec<(CMatrix, CVector)> = round
            .par_iter()
            .map(|block| {
                let mut g = CMatrix::zeros(m, m);
                let mut a = CVector::zeros(m);
                let mut hits: Vec<(usize, Complex64)> = Vec::new();
                for &i in block.iter() {
                    hits.clear();
                    index.for_each_hit(&oracle.row(i), |j, v| hits.push((j, v)));
                    if hits.is_empty() {
                        continue;
                    }
                    let psi_i = psi.amplitude(i);
                    for &(j, ej) in &hits {
                        let cj = ej.conj();
                        for &(k, ek) in &hits {
                            g[(j, k)] += cj * ek;
                        }
                        a[j] += cj * psi_i;
                    }
                }
                (g, a)
            })
            .collect();
        for (g, a) in partials {
            gram += g;
            at_psi += a;
        }
    }
    (gram, at_psi)
}

/// `(it)^k / k!` for `k = 0..=order`, by incremental multiplication.
pub fn taylor_coefficients(t: f64, order: usize) -> Vec<Complex64> {
    let it = Complex64::new(0.0, t);
    let mut out = Vec::with_capacity(order + 1);
    let mut c = Complex64::new(1.0, 0.0);
    out.push(c);
    for k in 1..=order {
        c = c * it / k as f64;
        out.push(c);
    }
    out
}

/// `g_K(D) v` via the `b_j` recurrence; returns `b_{K-1}`.
pub fn psd_recurrence(d: &CMatrix, v: &CVector, t: f64, order: usize) -> Result<CVector> {
    if order == 0 {
        return Err(Error::Usage("truncation order K must be at least 1".into()));
    }
    let c = taylor_coefficients(t, order);
    let mut b = v * c[order];
    for j in 1..order {
        b = d * &b + v * c[order - j];
        if !all_finite(b.iter().copied()) {
            return Err(Error::numerical(format!("psd recurrence stage {j}")));
        }
    }
    if !all_finite(b.iter().copied()) {
        return Err(Error::numerical("psd recurrence stage 0"));
    }
    Ok(b)
}

/// `ψ̂ = ψ + Σ_c β_c H_{:,c}` with per-column coefficients `β`.
#[derive(Debug, Clone)]
pub struct ColumnCombination {
    pub psi: SparseState,
    /// Sorted distinct columns.
    pub columns: Vec<u64>,
    pub coefficients: Vec<Complex64>,
}

impl ColumnCombination {
    pub(crate) fn new(psi: SparseState, columns: &[u64], per_position: &[Complex64]) -> Self {
        let index = ColumnIndex::new(columns);
        let coefficients = index
            .positions
            .iter()
            .map(|pos| pos.iter().map(|&j| per_position[j]).sum())
            .collect();
        ColumnCombination {
            psi,
            columns: index.unique,
            coefficients,
        }
    }

    /// `Σ_c H_{i,c} β_c`: one row fetch and a sorted merge.
    pub fn correction<O: RowOracle + ?Sized>(&self, oracle: &O, i: u64) -> Complex64 {
        let row = oracle.row(i);
        let entries = row.entries();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut rest: &[u64] = &self.columns;
        for &(c, h) in entries {
            match rest.binary_search(&c) {
                Ok(k) => {
                    let pos = self.columns.len() - rest.len() + k;
                    acc += h * self.coefficients[pos];
                    rest = &rest[k + 1..];
                }
                Err(k) => rest = &rest[k..],
            }
            if rest.is_empty() {
                break;
            }
        }
        acc
    }

    /// Every nonzero of `Σ_c β_c H_{:,c}`, scattered from the columns.
    pub fn correction_support<O: RowOracle + ?Sized>(&self, oracle: &O) -> BTreeMap<u64, Complex64> {
        let mut out: BTreeMap<u64, Complex64> = BTreeMap::new();
        for (&c, &beta) in self.columns.iter().zip(&self.coefficients) {
            // Column c of a Hermitian matrix is the conjugate of row c.
            for &(i, h) in oracle.row(c).entries() {
                *out.entry(i).or_default() += h.conj() * beta;
            }
        }
        out
    }
}

/// Result of [`evolve_psd`]; amplitudes are evaluated on demand.
#[derive(Debug, Clone)]
pub struct PsdEvolved {
    pub t: f64,
    pub order: usize,
    combination: ColumnCombination,
}

pub fn evolve_psd(sketch: &SketchPsd, psi: &SparseState, t: f64, order: usize) -> Result<PsdEvolved> {
    let b = psd_recurrence(&sketch.d, &sketch.v, t, order)?;
    let per_position: Vec<Complex64> = b.iter().copied().collect();
    Ok(PsdEvolved {
        t,
        order,
        combination: ColumnCombination::new(psi.clone(), &sketch.columns, &per_position),
    })
}

impl PsdEvolved {
    /// `ψ̂_i = ψ_i + (A b_{K-1})_i`.
    pub fn amplitude<O: RowOracle + ?Sized>(&self, oracle: &O, i: u64) -> Complex64 {
        self.combination.psi.amplitude(i) + self.combination.correction(oracle, i)
    }

    /// All nonzero amplitudes, sorted by index.
    pub fn sparse_state<O: RowOracle + ?Sized>(&self, oracle: &O) -> Vec<(u64, Complex64)> {
        let mut out = self.combination.correction_support(oracle);
        for &(i, a) in self.combination.psi.entries() {
            *out.entry(i).or_default() += a;
        }
        out.into_iter().collect()
    }

    pub fn dense_state<O: RowOracle + ?Sized>(&self, oracle: &O) -> Result<Vec<Complex64>> {
        densify(oracle.qubits().get(), self.sparse_state(oracle))
    }
}

pub(crate) fn densify(n: u32, entries: Vec<(u64, Complex64)>) -> Result<Vec<Complex64>> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Usage(format!(
            "full-state output is limited to n ≤ {MAX_DENSE_QUBITS}"
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); 1usize << n];
    for (i, a) in entries {
        out[i as usize] = a;
    }
    Ok(out)
}
