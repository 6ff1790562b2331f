use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{Mode, Prefix, QubitCount, RowOracle, SparseRow, WeightKind};
use crate::error::{Error, Result};

/// Absolute tolerance on `|H_ij − conj(H_ji)|` for stored matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Binary tree of prefix weight sums over the nonzero leaves of `{0,1}ⁿ`.
///
/// Level `l` holds the sums for every length-`l` prefix with at least one
/// nonzero leaf beneath it. Each parent is the floating-point sum of its two
/// children, so additivity holds exactly.
#[derive(Debug, Clone)]
pub struct WeightTree {
    levels: Vec<Vec<(u64, f64)>>,
}

impl WeightTree {
    /// `leaves` must be sorted by index; zero weights are skipped.
    pub fn build(n: QubitCount, leaves: impl IntoIterator<Item = (u64, f64)>) -> Self {
        let depth = n.get() as usize;
        let mut levels = vec![Vec::new(); depth + 1];
        levels[depth] = leaves.into_iter().filter(|&(_, w)| w != 0.0).collect();
        debug_assert!(levels[depth].windows(2).all(|w| w[0].0 < w[1].0));
        for l in (0..depth).rev() {
            let mut parents: Vec<(u64, f64)> = Vec::with_capacity(levels[l + 1].len().div_ceil(2));
            for &(bits, w) in &levels[l + 1] {
                let parent = bits >> 1;
                match parents.last_mut() {
                    Some(last) if last.0 == parent => last.1 += w,
                    _ => parents.push((parent, w)),
                }
            }
            levels[l] = parents;
        }
        WeightTree { levels }
    }

    pub fn marginal(&self, prefix: Prefix) -> f64 {
        let level = &self.levels[prefix.len() as usize];
        match level.binary_search_by_key(&prefix.bits(), |e| e.0) {
            Ok(k) => level[k].1,
            Err(_) => 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.marginal(Prefix::EMPTY)
    }
}

/// An explicitly stored sparse Hermitian matrix with prebuilt weight trees.
#[derive(Debug, Clone)]
pub struct StoredOracle {
    n: QubitCount,
    mode: Mode,
    rows: Vec<(u64, SparseRow)>,
    diagonal: WeightTree,
    squared_norms: WeightTree,
}

impl StoredOracle {
    /// Builds from a complete entry list (both triangles present).
    ///
    /// Exact zeros are dropped. Fails on duplicates, out-of-range indices,
    /// Hermitian mismatches above [`SYMMETRY_TOLERANCE`], or a negative
    /// diagonal in PSD mode.
    pub fn from_entries(
        n: QubitCount,
        mode: Mode,
        entries: impl IntoIterator<Item = (u64, u64, Complex64)>,
    ) -> Result<Self> {
        let dim = n.dim();
        let mut map = BTreeMap::new();
        for (i, j, v) in entries {
            if i >= dim || j >= dim {
                return Err(Error::Domain(format!("entry ({i}, {j}) outside dimension {dim}")));
            }
            if map.insert((i, j), v).is_some() {
                return Err(Error::Domain(format!("duplicate entry ({i}, {j})")));
            }
        }
        Self::from_map(n, mode, map)
    }

    pub(crate) fn from_map(
        n: QubitCount,
        mode: Mode,
        mut map: BTreeMap<(u64, u64), Complex64>,
    ) -> Result<Self> {
        let zero = Complex64::new(0.0, 0.0);
        for (&(i, j), &v) in &map {
            let mirror = map.get(&(j, i)).copied().unwrap_or(zero);
            let mismatch = (v - mirror.conj()).norm();
            if mismatch > SYMMETRY_TOLERANCE {
                return Err(Error::Symmetry { i, j, mismatch });
            }
        }
        for ((i, j), v) in map.iter_mut() {
            if i == j {
                v.im = 0.0;
            }
        }
        map.retain(|_, v| *v != zero);

        let mut rows: Vec<(u64, SparseRow)> = Vec::new();
        let mut current: Option<(u64, Vec<(u64, Complex64)>)> = None;
        for ((i, j), v) in map {
            match &mut current {
                Some((r, list)) if *r == i => list.push((j, v)),
                _ => {
                    if let Some((r, list)) = current.take() {
                        rows.push((r, SparseRow::from_sorted(list)));
                    }
                    current = Some((i, vec![(j, v)]));
                }
            }
        }
        if let Some((r, list)) = current {
            rows.push((r, SparseRow::from_sorted(list)));
        }

        if mode == Mode::Psd {
            if let Some((i, d)) = rows
                .iter()
                .map(|(i, row)| (*i, row.get(*i).re))
                .find(|&(_, d)| d < 0.0)
            {
                return Err(Error::Domain(format!(
                    "negative diagonal H[{i},{i}] = {d} in psd mode"
                )));
            }
        }

        let diagonal = WeightTree::build(n, rows.iter().map(|(i, row)| (*i, row.get(*i).re)));
        let squared_norms = WeightTree::build(n, rows.iter().map(|(i, row)| (*i, row.sq_norm())));
        Ok(StoredOracle {
            n,
            mode,
            rows,
            diagonal,
            squared_norms,
        })
    }

    /// Number of rows with at least one nonzero.
    pub fn nonzero_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|(_, r)| r.len()).sum()
    }

    /// Same matrix, different declared mode (re-validated).
    pub fn with_mode(self, mode: Mode) -> Result<Self> {
        if mode == Mode::Psd {
            if let Some((i, row)) = self.rows.iter().find(|(i, row)| row.get(*i).re < 0.0) {
                return Err(Error::Domain(format!(
                    "negative diagonal H[{i},{i}] = {} in psd mode",
                    row.get(*i).re
                )));
            }
        }
        Ok(StoredOracle { mode, ..self })
    }

    fn stored_row(&self, i: u64) -> Option<&SparseRow> {
        self.rows
            .binary_search_by_key(&i, |e| e.0)
            .ok()
            .map(|k| &self.rows[k].1)
    }
}

impl RowOracle for StoredOracle {
    fn qubits(&self) -> QubitCount {
        self.n
    }

    fn mode(&self) -> Mode {
        self.mode
    }

    fn row(&self, i: u64) -> SparseRow {
        self.stored_row(i).cloned().unwrap_or_default()
    }

    fn diag(&self, i: u64) -> f64 {
        self.stored_row(i).map_or(0.0, |r| r.get(i).re)
    }

    fn row_sq_norm(&self, i: u64) -> f64 {
        self.stored_row(i).map_or(0.0, SparseRow::sq_norm)
    }

    fn marginal(&self, prefix: Prefix, kind: WeightKind) -> f64 {
        match kind {
            WeightKind::Diagonal => self.diagonal.marginal(prefix),
            WeightKind::SquaredRowNorm => self.squared_norms.marginal(prefix),
        }
    }
}
