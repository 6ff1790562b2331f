use num_complex::Complex64;

use super::QubitCount;
use crate::error::{Error, Result};

/// Nonzero entries of one matrix row, columns strictly increasing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseRow {
    entries: Vec<(u64, Complex64)>,
}

impl SparseRow {
    /// Validates ordering and range; exact zeros are dropped.
    pub fn new(entries: Vec<(u64, Complex64)>, dim: u64) -> Result<Self> {
        let mut prev: Option<u64> = None;
        for &(c, _) in &entries {
            if c >= dim {
                return Err(Error::Domain(format!("column {c} out of range for dimension {dim}")));
            }
            if prev.is_some_and(|p| p >= c) {
                return Err(Error::Domain("row columns must be strictly increasing".into()));
            }
            prev = Some(c);
        }
        Ok(Self::from_sorted(entries))
    }

    /// Caller guarantees strictly increasing columns.
    pub(crate) fn from_sorted(mut entries: Vec<(u64, Complex64)>) -> Self {
        entries.retain(|(_, v)| *v != Complex64::new(0.0, 0.0));
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        SparseRow { entries }
    }

    pub fn entries(&self) -> &[(u64, Complex64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, col: u64) -> Complex64 {
        match self.entries.binary_search_by_key(&col, |e| e.0) {
            Ok(k) => self.entries[k].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn sq_norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v.norm_sqr()).sum()
    }
}

/// `Σ_k a_k b_k` over two sorted sparse vectors (no conjugation).
///
/// Walks the shorter list and binary-searches the longer one.
pub fn sparse_dot(a: &[(u64, Complex64)], b: &[(u64, Complex64)]) -> Complex64 {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut acc = Complex64::new(0.0, 0.0);
    let mut rest = long;
    for &(idx, x) in short {
        if rest.is_empty() {
            break;
        }
        match rest.binary_search_by_key(&idx, |e| e.0) {
            Ok(k) => {
                acc += x * rest[k].1;
                rest = &rest[k + 1..];
            }
            Err(k) => rest = &rest[k..],
        }
    }
    acc
}

/// A sparse unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    n: QubitCount,
    entries: Vec<(u64, Complex64)>,
}

impl SparseState {
    pub const NORM_TOLERANCE: f64 = 1e-12;

    /// Entries may arrive in any order; duplicate indices are an error and
    /// exact zeros are dropped. The norm must be 1 within [`Self::NORM_TOLERANCE`].
    pub fn new(n: QubitCount, entries: Vec<(u64, Complex64)>) -> Result<Self> {
        let state = Self::collect(n, entries)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::Domain(format!("state norm is {norm}, expected 1")));
        }
        Ok(state)
    }

    /// Like [`SparseState::new`] but rescales to unit norm.
    pub fn normalized(n: QubitCount, entries: Vec<(u64, Complex64)>) -> Result<Self> {
        let mut state = Self::collect(n, entries)?;
        let norm = state.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Domain("cannot normalize a zero state".into()));
        }
        for (_, a) in &mut state.entries {
            *a /= norm;
        }
        Ok(state)
    }

    pub fn basis(n: QubitCount, index: u64) -> Result<Self> {
        Self::new(n, vec![(index, Complex64::new(1.0, 0.0))])
    }

    fn collect(n: QubitCount, mut entries: Vec<(u64, Complex64)>) -> Result<Self> {
        entries.retain(|(_, a)| *a != Complex64::new(0.0, 0.0));
        entries.sort_by_key(|e| e.0);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Domain(format!("duplicate state index {}", w[0].0)));
            }
        }
        if let Some(&(last, _)) = entries.last() {
            if last >= n.dim() {
                return Err(Error::Domain(format!("state index {last} out of range")));
            }
        }
        Ok(SparseState { n, entries })
    }

    pub fn qubits(&self) -> QubitCount {
        self.n
    }

    pub fn entries(&self) -> &[(u64, Complex64)] {
        &self.entries
    }

    /// Number of stored nonzeros `q`.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        match self.entries.binary_search_by_key(&index, |e| e.0) {
            Ok(k) => self.entries[k].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Dense copy; callers keep `n` small.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n.dim() as usize];
        for &(i, a) in &self.entries {
            out[i as usize] = a;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn row_rejects_unsorted_and_out_of_range() {
        assert!(SparseRow::new(vec![(2, c(1.0, 0.0)), (1, c(1.0, 0.0))], 4).is_err());
        assert!(SparseRow::new(vec![(4, c(1.0, 0.0))], 4).is_err());
        let row = SparseRow::new(vec![(0, c(0.0, 0.0)), (3, c(2.0, 0.0))], 4).unwrap();
        assert_eq!(row.len(), 1);
        assert_eq!(row.get(3), c(2.0, 0.0));
        assert_eq!(row.get(1), c(0.0, 0.0));
    }

    #[test]
    fn state_norm_is_checked() {
        let n = QubitCount::new(2).unwrap();
        assert!(SparseState::new(n, vec![(0, c(0.5, 0.0))]).is_err());
        let s = SparseState::normalized(n, vec![(3, c(1.0, 1.0)), (0, c(1.0, -1.0))]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert_eq!(s.entries()[0].0, 0);
        assert!(SparseState::new(n, vec![(1, c(1.0, 0.0)), (1, c(0.0, 0.0))]).is_ok());
        assert!(SparseState::basis(n, 4).is_err());
    }

    proptest! {
        #[test]
        fn sparse_dot_matches_dense(
            a in proptest::collection::btree_map(0u64..40, (-2.0f64..2.0, -2.0f64..2.0), 0..20),
            b in proptest::collection::btree_map(0u64..40, (-2.0f64..2.0, -2.0f64..2.0), 0..20),
        ) {
            let a: Vec<_> = a.into_iter().map(|(k, (x, y))| (k, c(x, y))).collect();
            let b: Vec<_> = b.into_iter().map(|(k, (x, y))| (k, c(x, y))).collect();
            let mut da = vec![c(0.0, 0.0); 40];
            let mut db = vec![c(0.0, 0.0); 40];
            for &(k, v) in &a { da[k as usize] = v; }
            for &(k, v) in &b { db[k as usize] = v; }
            let want: Complex64 = da.iter().zip(&db).map(|(x, y)| x * y).sum();
            prop_assert!((sparse_dot(&a, &b) - want).norm() < 1e-12);
        }
    }
}
