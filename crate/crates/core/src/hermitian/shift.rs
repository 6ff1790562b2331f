use num_complex::Complex64;

use crate::hamiltonian::{Mode, Prefix, QubitCount, RowOracle, SparseRow, WeightKind};

/// `H̃ = H − αI`. Evolving `H̃` and multiplying by `e^{iαt}` reproduces the
/// evolution under `H`.
///
/// Marginals stay closed-form in terms of the base marginals:
/// `Σ H̃_ii = Σ H_ii − α|S|` and `Σ ‖h̃_i‖² = Σ ‖h_i‖² − 2α Σ H_ii + α²|S|`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedOracle<'a, O: RowOracle + ?Sized> {
    base: &'a O,
    alpha: f64,
}

impl<'a, O: RowOracle + ?Sized> ShiftedOracle<'a, O> {
    pub fn new(base: &'a O, alpha: f64) -> Self {
        ShiftedOracle { base, alpha }
    }

    pub fn base(&self) -> &'a O {
        self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `e^{iαt}`, multiplied into every output amplitude.
    pub fn phase(&self, t: f64) -> Complex64 {
        Complex64::new(0.0, self.alpha * t).exp()
    }
}

/// Shift by `α = tr(H)/2ⁿ`, which minimizes `‖H − αI‖_F`.
///
/// Falls back to `α = 0` with a warning when the diagonal marginal is not
/// finite.
pub fn trace_shift<O: RowOracle + ?Sized>(oracle: &O) -> ShiftedOracle<'_, O> {
    let trace = oracle.total_weight(WeightKind::Diagonal);
    let alpha = if trace.is_finite() {
        trace / oracle.dim() as f64
    } else {
        log::warn!("diagonal marginal unavailable ({trace}); trace shift disabled");
        0.0
    };
    ShiftedOracle::new(oracle, alpha)
}

impl<O: RowOracle + ?Sized> RowOracle for ShiftedOracle<'_, O> {
    fn qubits(&self) -> QubitCount {
        self.base.qubits()
    }

    fn mode(&self) -> Mode {
        if self.alpha == 0.0 {
            self.base.mode()
        } else {
            Mode::Hermitian
        }
    }

    fn row(&self, i: u64) -> SparseRow {
        if self.alpha == 0.0 {
            return self.base.row(i);
        }
        let mut entries = self.base.row(i).entries().to_vec();
        match entries.binary_search_by_key(&i, |e| e.0) {
            Ok(k) => entries[k].1 -= self.alpha,
            Err(k) => entries.insert(k, (i, Complex64::new(-self.alpha, 0.0))),
        }
        SparseRow::from_sorted(entries)
    }

    fn diag(&self, i: u64) -> f64 {
        self.base.diag(i) - self.alpha
    }

    fn row_sq_norm(&self, i: u64) -> f64 {
        if self.alpha == 0.0 {
            return self.base.row_sq_norm(i);
        }
        self.row(i).sq_norm()
    }

    fn marginal(&self, prefix: Prefix, kind: WeightKind) -> f64 {
        if self.alpha == 0.0 {
            return self.base.marginal(prefix, kind);
        }
        let (lo, hi) = prefix.range(self.qubits());
        let count = (hi - lo) as f64;
        let diag = self.base.marginal(prefix, WeightKind::Diagonal);
        match kind {
            WeightKind::Diagonal => diag - self.alpha * count,
            WeightKind::SquaredRowNorm => {
                let sq = self.base.marginal(prefix, WeightKind::SquaredRowNorm);
                (sq - 2.0 * self.alpha * diag + self.alpha * self.alpha * count).max(0.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{
        builtin_hamiltonian, hermitian_mismatch, Family, FamilyParams, StoredOracle,
    };

    fn q(n: u32) -> QubitCount {
        QubitCount::new(n).unwrap()
    }

    fn diag_oracle(values: &[f64]) -> StoredOracle {
        let n = q(values.len().trailing_zeros());
        StoredOracle::from_entries(
            n,
            Mode::Hermitian,
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| (i as u64, i as u64, Complex64::new(v, 0.0))),
        )
        .unwrap()
    }

    #[test]
    fn scalar_matrix_shifts_to_zero() {
        let h = diag_oracle(&[2.5; 4]);
        let s = trace_shift(&h);
        assert_eq!(s.alpha(), 2.5);
        assert_eq!(s.total_weight(WeightKind::SquaredRowNorm), 0.0);
        for i in 0..4 {
            assert!(s.row(i).is_empty());
        }
    }

    #[test]
    fn diag_three_one() {
        let h = diag_oracle(&[3.0, 1.0]);
        let s = trace_shift(&h);
        assert_eq!(s.alpha(), 2.0);
        assert_eq!(s.diag(0), 1.0);
        assert_eq!(s.diag(1), -1.0);
        assert_eq!(s.total_weight(WeightKind::SquaredRowNorm), 2.0);
        assert_eq!(h.total_weight(WeightKind::SquaredRowNorm), 10.0);
    }

    #[test]
    fn traceless_is_noop() {
        let h = diag_oracle(&[1.0, -1.0]);
        let s = trace_shift(&h);
        assert_eq!(s.alpha(), 0.0);
        assert_eq!(s.row(0), h.row(0));
        assert_eq!(s.mode(), Mode::Hermitian);
    }

    #[test]
    fn shifted_marginals_match_shifted_rows() {
        for fam in [Family::RandomSparseHermitian, Family::RandomSparsePsd, Family::LaplacianPath] {
            let h = builtin_hamiltonian(fam, q(5), &FamilyParams::default(), 21).unwrap();
            let s = trace_shift(&*h);
            for len in 0..=5 {
                for bits in 0..(1u64 << len) {
                    let p = Prefix::new(bits, len);
                    let (lo, hi) = p.range(q(5));
                    let d: f64 = (lo..hi).map(|i| s.row(i).get(i).re).sum();
                    let sq: f64 = (lo..hi).map(|i| s.row(i).sq_norm()).sum();
                    assert!((s.marginal(p, WeightKind::Diagonal) - d).abs() < 1e-12);
                    assert!((s.marginal(p, WeightKind::SquaredRowNorm) - sq).abs() < 1e-12);
                }
            }
            assert!(s.total_weight(WeightKind::Diagonal).abs() < 1e-12);
            assert!(hermitian_mismatch(&s, 500, 1) <= 1e-12);
            assert!(
                s.total_weight(WeightKind::SquaredRowNorm)
                    <= h.total_weight(WeightKind::SquaredRowNorm) + 1e-12
            );
        }
    }
}
