//! Built-in Hamiltonian families.
//!
//! `inverse-diag` and `laplacian-path` are procedural with closed-form
//! marginals and scale to `n = 62`. The random families are generated once and
//! stored explicitly.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Mode, Prefix, QubitCount, RowOracle, SparseRow, StoredOracle, WeightKind};
use crate::error::{Error, Result};

/// Largest `n` for families that are stored explicitly.
pub const MAX_STORED_QUBITS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    InverseDiag,
    RandomSparsePsd,
    RandomSparseHermitian,
    RankRPsd,
    LaplacianPath,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::InverseDiag,
        Family::RandomSparsePsd,
        Family::RandomSparseHermitian,
        Family::RankRPsd,
        Family::LaplacianPath,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::InverseDiag => "inverse-diag",
            Family::RandomSparsePsd => "random-sparse-psd",
            Family::RandomSparseHermitian => "random-sparse-hermitian",
            Family::RankRPsd => "rank-r-psd",
            Family::LaplacianPath => "laplacian-path",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown Hamiltonian family `{s}`")))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Knobs shared by the families. `scale` multiplies the normalized matrix:
/// random PSD matrices are normalized to unit trace, random Hermitian ones to
/// unit maximum absolute row sum.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    /// Off-diagonal entries drawn per row (random sparse families).
    pub row_nnz: usize,
    /// Rank of `rank-r-psd`.
    pub rank: usize,
    /// Support size of each `rank-r-psd` factor; defaults to `min(2ⁿ, 8)`.
    pub support: Option<usize>,
    pub scale: f64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            row_nnz: 2,
            rank: 1,
            support: None,
            scale: 1.0,
        }
    }
}

pub fn builtin_hamiltonian(
    family: Family,
    n: QubitCount,
    params: &FamilyParams,
    seed: u64,
) -> Result<Box<dyn RowOracle>> {
    if !(params.scale.is_finite() && params.scale > 0.0) {
        return Err(Error::Usage(format!("family scale must be positive, got {}", params.scale)));
    }
    let stored = |f: fn(QubitCount, &FamilyParams, &mut ChaCha8Rng) -> Result<StoredOracle>| {
        if n.get() > MAX_STORED_QUBITS {
            return Err(Error::Resource(format!(
                "family `{family}` is stored explicitly and limited to n ≤ {MAX_STORED_QUBITS}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        f(n, params, &mut rng).map(|o| Box::new(o) as Box<dyn RowOracle>)
    };
    match family {
        Family::InverseDiag => Ok(Box::new(InverseDiagonal::new(n, params.scale))),
        Family::LaplacianPath => Ok(Box::new(LaplacianPath::new(n, params.scale))),
        Family::RandomSparsePsd => stored(random_sparse_psd),
        Family::RandomSparseHermitian => stored(random_sparse_hermitian),
        Family::RankRPsd => stored(rank_r_psd),
    }
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn other_index(rng: &mut ChaCha8Rng, i: u64, dim: u64) -> u64 {
    let j = rng.random_range(0..dim - 1);
    if j >= i {
        j + 1
    } else {
        j
    }
}

/// Diagonally dominant with log-normal diagonal slack, so row weights are
/// uneven and a few rows carry most of the trace.
fn random_sparse_psd(n: QubitCount, p: &FamilyParams, rng: &mut ChaCha8Rng) -> Result<StoredOracle> {
    let dim = n.dim();
    let slack: Vec<f64> = (0..dim)
        .map(|_| (1.5 * rng.sample::<f64, _>(StandardNormal)).exp())
        .collect();
    let mut map: BTreeMap<(u64, u64), Complex64> = BTreeMap::new();
    for i in 0..dim {
        for _ in 0..p.row_nnz {
            let j = other_index(rng, i, dim);
            let v = complex_normal(rng) * (slack[i as usize] * slack[j as usize]).sqrt() * 0.5;
            *map.entry((i, j)).or_default() += v;
            *map.entry((j, i)).or_default() += v.conj();
        }
    }
    let mut offdiag_abs = vec![0.0; dim as usize];
    for (&(i, _), v) in &map {
        offdiag_abs[i as usize] += v.norm();
    }
    for i in 0..dim {
        map.insert((i, i), Complex64::new(slack[i as usize] + offdiag_abs[i as usize], 0.0));
    }
    let trace: f64 = (0..dim).map(|i| map[&(i, i)].re).sum();
    let factor = p.scale / trace;
    map.values_mut().for_each(|v| *v *= factor);
    StoredOracle::from_map(n, Mode::Psd, map)
}

fn random_sparse_hermitian(
    n: QubitCount,
    p: &FamilyParams,
    rng: &mut ChaCha8Rng,
) -> Result<StoredOracle> {
    let dim = n.dim();
    let mut map: BTreeMap<(u64, u64), Complex64> = BTreeMap::new();
    for i in 0..dim {
        let d: f64 = rng.sample(StandardNormal);
        *map.entry((i, i)).or_default() += Complex64::new(d, 0.0);
        for _ in 0..p.row_nnz {
            let j = other_index(rng, i, dim);
            let v = complex_normal(rng);
            *map.entry((i, j)).or_default() += v;
            *map.entry((j, i)).or_default() += v.conj();
        }
    }
    let mut row_abs = vec![0.0f64; dim as usize];
    for (&(i, _), v) in &map {
        row_abs[i as usize] += v.norm();
    }
    let bound = row_abs.iter().cloned().fold(0.0, f64::max);
    let factor = p.scale / bound;
    map.values_mut().for_each(|v| *v *= factor);
    StoredOracle::from_map(n, Mode::Hermitian, map)
}

/// `Σ_k λ_k v_k v_k*` with sparse unit vectors `v_k` and `λ_k ∈ [1/2, 1]`.
fn rank_r_psd(n: QubitCount, p: &FamilyParams, rng: &mut ChaCha8Rng) -> Result<StoredOracle> {
    let dim = n.dim();
    let support = p.support.unwrap_or(8).min(dim as usize).max(1);
    if p.rank == 0 || p.rank as u64 > dim {
        return Err(Error::Usage(format!("rank must be in 1..={dim}, got {}", p.rank)));
    }
    let mut map: BTreeMap<(u64, u64), Complex64> = BTreeMap::new();
    for _ in 0..p.rank {
        let lambda = rng.random_range(0.5..=1.0);
        let mut idx: Vec<u64> = Vec::with_capacity(support);
        while idx.len() < support {
            let k = rng.random_range(0..dim);
            if !idx.contains(&k) {
                idx.push(k);
            }
        }
        let mut v: Vec<Complex64> = (0..support).map(|_| complex_normal(rng)).collect();
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                *map.entry((ia, ib)).or_default() += v[a] * v[b].conj() * lambda * p.scale;
            }
        }
    }
    // Force exact Hermitian symmetry after accumulation.
    let keys: Vec<_> = map.keys().copied().filter(|&(i, j)| i < j).collect();
    for (i, j) in keys {
        let avg = (map[&(i, j)] + map[&(j, i)].conj()) * 0.5;
        map.insert((i, j), avg);
        map.insert((j, i), avg.conj());
    }
    StoredOracle::from_map(n, Mode::Psd, map)
}

/// `H_kk = scale/(k+1)`: exponentially many nonzeros, closed-form marginals.
#[derive(Debug, Clone)]
pub struct InverseDiagonal {
    n: QubitCount,
    scale: f64,
}

impl InverseDiagonal {
    pub fn new(n: QubitCount, scale: f64) -> Self {
        InverseDiagonal { n, scale }
    }
}

const DIRECT_TERMS: u64 = 1024;

/// `Σ_{m=a}^{b} 1/m` for `1 ≤ a ≤ b`.
fn harmonic_sum(a: u64, b: u64) -> f64 {
    if b - a < DIRECT_TERMS {
        return (a..=b).rev().map(|m| 1.0 / m as f64).sum();
    }
    if a < DIRECT_TERMS {
        return harmonic_sum(a, DIRECT_TERMS - 1) + harmonic_sum(DIRECT_TERMS, b);
    }
    // digamma(b + 1) − digamma(a), asymptotic series with differences formed
    // analytically so nothing cancels.
    let (af, bf) = (a as f64, (b + 1) as f64);
    let d = (b + 1 - a) as f64;
    let inv1 = d / (af * bf);
    let inv2 = d * (af + bf) / (af * af * bf * bf);
    let inv4 = af.powi(-4) - bf.powi(-4);
    let inv6 = af.powi(-6) - bf.powi(-6);
    (d / af).ln_1p() + inv1 / 2.0 + inv2 / 12.0 - inv4 / 120.0 + inv6 / 252.0
}

/// `Σ_{m=a}^{b} 1/m²` for `1 ≤ a ≤ b`.
fn inverse_square_sum(a: u64, b: u64) -> f64 {
    if b - a < DIRECT_TERMS {
        return (a..=b).rev().map(|m| (m as f64).powi(-2)).sum();
    }
    if a < DIRECT_TERMS {
        return inverse_square_sum(a, DIRECT_TERMS - 1) + inverse_square_sum(DIRECT_TERMS, b);
    }
    // trigamma(a) − trigamma(b + 1).
    let (af, bf) = (a as f64, (b + 1) as f64);
    let d = (b + 1 - a) as f64;
    let inv1 = d / (af * bf);
    let inv2 = d * (af + bf) / (af * af * bf * bf);
    let inv3 = d * (af * af + af * bf + bf * bf) / (af * bf).powi(3);
    let inv5 = af.powi(-5) - bf.powi(-5);
    let inv7 = af.powi(-7) - bf.powi(-7);
    inv1 + inv2 / 2.0 + inv3 / 6.0 - inv5 / 30.0 + inv7 / 42.0
}

impl RowOracle for InverseDiagonal {
    fn qubits(&self) -> QubitCount {
        self.n
    }

    fn mode(&self) -> Mode {
        Mode::Psd
    }

    fn row(&self, i: u64) -> SparseRow {
        SparseRow::from_sorted(vec![(i, Complex64::new(self.diag(i), 0.0))])
    }

    fn diag(&self, i: u64) -> f64 {
        self.scale / (i + 1) as f64
    }

    fn row_sq_norm(&self, i: u64) -> f64 {
        self.diag(i).powi(2)
    }

    fn marginal(&self, prefix: Prefix, kind: WeightKind) -> f64 {
        let (lo, hi) = prefix.range(self.n);
        match kind {
            WeightKind::Diagonal => self.scale * harmonic_sum(lo + 1, hi),
            WeightKind::SquaredRowNorm => self.scale * self.scale * inverse_square_sum(lo + 1, hi),
        }
    }
}

/// Graph Laplacian of the path `0 − 1 − … − (2ⁿ−1)`, times `scale`.
#[derive(Debug, Clone)]
pub struct LaplacianPath {
    n: QubitCount,
    scale: f64,
}

impl LaplacianPath {
    pub fn new(n: QubitCount, scale: f64) -> Self {
        LaplacianPath { n, scale }
    }

    fn degree(&self, i: u64) -> u64 {
        u64::from(i > 0) + u64::from(i + 1 < self.n.dim())
    }

    /// Number of path endpoints inside `[lo, hi)`.
    fn ends(&self, lo: u64, hi: u64) -> u64 {
        u64::from(lo == 0) + u64::from(hi == self.n.dim())
    }
}

impl RowOracle for LaplacianPath {
    fn qubits(&self) -> QubitCount {
        self.n
    }

    fn mode(&self) -> Mode {
        Mode::Psd
    }

    fn row(&self, i: u64) -> SparseRow {
        let off = Complex64::new(-self.scale, 0.0);
        let mut entries = Vec::with_capacity(3);
        if i > 0 {
            entries.push((i - 1, off));
        }
        entries.push((i, Complex64::new(self.diag(i), 0.0)));
        if i + 1 < self.n.dim() {
            entries.push((i + 1, off));
        }
        SparseRow::from_sorted(entries)
    }

    fn diag(&self, i: u64) -> f64 {
        self.scale * self.degree(i) as f64
    }

    fn row_sq_norm(&self, i: u64) -> f64 {
        let d = self.degree(i) as f64;
        self.scale * self.scale * (d * d + d)
    }

    fn marginal(&self, prefix: Prefix, kind: WeightKind) -> f64 {
        let (lo, hi) = prefix.range(self.n);
        let count = (hi - lo) as f64;
        let ends = self.ends(lo, hi) as f64;
        match kind {
            WeightKind::Diagonal => self.scale * (2.0 * count - ends),
            WeightKind::SquaredRowNorm => self.scale * self.scale * (6.0 * count - 4.0 * ends),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::hermitian_mismatch;

    fn q(n: u32) -> QubitCount {
        QubitCount::new(n).unwrap()
    }

    fn all_families(n: u32) -> Vec<Box<dyn RowOracle>> {
        let p = FamilyParams {
            rank: 2,
            ..Default::default()
        };
        Family::ALL
            .iter()
            .map(|&f| builtin_hamiltonian(f, q(n), &p, 11).unwrap())
            .collect()
    }

    #[test]
    fn inverse_diag_small() {
        let h = builtin_hamiltonian(Family::InverseDiag, q(2), &FamilyParams::default(), 0).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| h.diag(i)).collect();
        assert_eq!(diag, vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
        assert!((h.total_weight(WeightKind::Diagonal) - 25.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn harmonic_sums_match_direct_summation() {
        for &(a, b) in &[(1u64, 5000u64), (900, 3000), (1024, 100_000), (50_000, 50_001)] {
            let direct: f64 = (a..=b).rev().map(|m| 1.0 / m as f64).sum();
            let direct2: f64 = (a..=b).rev().map(|m| 1.0 / (m as f64 * m as f64)).sum();
            assert!((harmonic_sum(a, b) - direct).abs() <= 1e-13 * direct, "{a}..{b}");
            assert!((inverse_square_sum(a, b) - direct2).abs() <= 1e-13 * direct2, "{a}..{b}");
        }
    }

    #[test]
    fn inverse_diag_large_n_marginals_are_additive() {
        let h = InverseDiagonal::new(q(62), 1.0);
        let mut p = Prefix::EMPTY;
        for depth in 0..62u32 {
            for kind in [WeightKind::Diagonal, WeightKind::SquaredRowNorm] {
                let whole = h.marginal(p, kind);
                let parts = h.marginal(p.child(0), kind) + h.marginal(p.child(1), kind);
                assert!((whole - parts).abs() <= 1e-12 * whole, "depth {depth} {kind:?}");
            }
            p = p.child((depth % 2) as u8);
        }
        let leaf = Prefix::leaf(12345, q(62));
        assert!((h.marginal(leaf, WeightKind::Diagonal) - 1.0 / 12346.0).abs() < 1e-20);
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        for n in 1..=4 {
            let h = LaplacianPath::new(q(n), 1.0);
            for i in 0..h.dim() {
                let s: Complex64 = h.row(i).entries().iter().map(|e| e.1).sum();
                assert_eq!(s, Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn marginals_are_consistent_for_every_family() {
        for n in 1..=6 {
            for h in all_families(n) {
                let nq = h.qubits();
                for len in 0..=n {
                    for bits in 0..(1u64 << len) {
                        let p = Prefix::new(bits, len);
                        for kind in [WeightKind::Diagonal, WeightKind::SquaredRowNorm] {
                            let w = h.marginal(p, kind);
                            let (lo, hi) = p.range(nq);
                            let direct: f64 = (lo..hi).map(|i| h.weight(i, kind)).sum();
                            assert!((w - direct).abs() <= 1e-12 * direct.abs().max(1e-300));
                            if len < n {
                                let parts = h.marginal(p.child(0), kind) + h.marginal(p.child(1), kind);
                                assert!((w - parts).abs() <= 1e-12 * w.abs().max(1e-300));
                            }
                        }
                    }
                }
                for i in 0..h.dim() {
                    assert!((h.row(i).sq_norm() - h.row_sq_norm(i)).abs() < 1e-14);
                    assert_eq!(h.row(i).get(i).re, h.diag(i));
                    if h.mode() == Mode::Psd {
                        assert!(h.diag(i) >= 0.0);
                    }
                }
                assert!(hermitian_mismatch(&h, 1000, 3) <= 1e-12);
            }
        }
    }

    #[test]
    fn unknown_family_is_usage_error() {
        assert!(matches!("heisenberg".parse::<Family>(), Err(Error::Usage(_))));
        assert_eq!("rank-r-psd".parse::<Family>().unwrap(), Family::RankRPsd);
    }

    #[test]
    fn stored_families_are_capped() {
        let r = builtin_hamiltonian(Family::RandomSparsePsd, q(21), &FamilyParams::default(), 0);
        assert!(matches!(r, Err(Error::Resource(_))));
        assert!(builtin_hamiltonian(Family::LaplacianPath, q(40), &FamilyParams::default(), 0).is_ok());
    }

    #[test]
    fn random_psd_is_normalized_to_scale() {
        let p = FamilyParams {
            scale: 2.0,
            ..Default::default()
        };
        let h = builtin_hamiltonian(Family::RandomSparsePsd, q(5), &p, 4).unwrap();
        assert!((h.total_weight(WeightKind::Diagonal) - 2.0).abs() < 1e-12);
    }
}
