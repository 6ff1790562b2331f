//! Dense reference evolution and dense reconstructions of sketch operators.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{QubitCount, RowOracle};
use crate::hermitian::SketchHermitian;
use crate::linalg::{default_pinv_rtol, hermitian_eigen, pinv_hermitian, CMatrix, CVector};

pub const MAX_EXACT_QUBITS: u32 = 12;
/// Size limits for dense reconstructions.
pub const MAX_RECONSTRUCT_QUBITS: u32 = 8;
pub const MAX_RECONSTRUCT_COLUMNS: usize = 64;

/// Absolute Hermitian defect tolerated when assembling.
pub const DENSE_SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct DenseHermitian {
    pub n: QubitCount,
    pub matrix: CMatrix,
}

impl DenseHermitian {
    /// Assembles the matrix row by row.
    pub fn from_oracle<O: RowOracle + ?Sized>(oracle: &O) -> Result<Self> {
        let n = oracle.qubits();
        if n.get() > MAX_EXACT_QUBITS {
            return Err(Error::Usage(format!(
                "dense reference is limited to n ≤ {MAX_EXACT_QUBITS}"
            )));
        }
        let dim = n.dim() as usize;
        let mut matrix = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for &(j, h) in oracle.row(i as u64).entries() {
                matrix[(i, j as usize)] = h;
            }
        }
        Self::from_matrix(n, matrix)
    }

    pub fn from_matrix(n: QubitCount, matrix: CMatrix) -> Result<Self> {
        let dim = n.dim() as usize;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Usage(format!(
                "expected a {dim}x{dim} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for i in 0..dim {
            for j in i..dim {
                let mismatch = (matrix[(i, j)] - matrix[(j, i)].conj()).norm();
                if mismatch > DENSE_SYMMETRY_TOLERANCE {
                    return Err(Error::Symmetry {
                        i: i as u64,
                        j: j as u64,
                        mismatch,
                    });
                }
            }
        }
        Ok(DenseHermitian { n, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frob_sq(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Result<DVector<f64>> {
        Ok(hermitian_eigen(&self.matrix)?.0)
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().fold(0.0f64, |a, &x| a.max(x.abs())))
    }

    pub fn propagator(&self) -> Result<Propagator> {
        let (values, vectors) = hermitian_eigen(&self.matrix)?;
        Ok(Propagator { values, vectors })
    }

    /// Hermitian square root factor `S` with `H = SS*`; requires `H ⪰ 0`.
    pub fn psd_factor(&self) -> Result<CMatrix> {
        let (values, vectors) = hermitian_eigen(&self.matrix)?;
        let max = values.iter().fold(0.0f64, |a, &x| a.max(x));
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-10 * max.max(1.0) {
            return Err(Error::Domain(format!(
                "matrix has eigenvalue {min:.3e}; no psd factor"
            )));
        }
        let mut scaled = vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::new(values[k].max(0.0).sqrt(), 0.0);
        }
        Ok(scaled * vectors.adjoint())
    }
}

/// `e^{iHt}` through a stored eigendecomposition `H = UΛU*`.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl Propagator {
    pub fn apply(&self, psi: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
        if psi.len() != self.vectors.nrows() {
            return Err(Error::Usage(format!(
                "state of length {} against a {}-dimensional Hamiltonian",
                psi.len(),
                self.vectors.nrows()
            )));
        }
        let x = CVector::from_column_slice(psi);
        let mut y = self.vectors.adjoint() * x;
        for (k, yk) in y.iter_mut().enumerate() {
            *yk *= Complex64::new(0.0, self.values[k] * t).exp();
        }
        let out = &self.vectors * y;
        if !out.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::numerical("exact evolution produced non-finite amplitudes"));
        }
        Ok(out.iter().copied().collect())
    }

    pub fn matrix(&self, t: f64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::new(0.0, self.values[k] * t).exp();
        }
        scaled * self.vectors.adjoint()
    }
}

/// `e^{iHt}ψ` for a dense state.
pub fn exact_evolve(h: &DenseHermitian, psi: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    h.propagator()?.apply(psi, t)
}

/// Euclidean distance between two dense states.
pub fn state_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn check_reconstruct(h: &DenseHermitian, m: usize) -> Result<()> {
    if h.n.get() > MAX_RECONSTRUCT_QUBITS || m > MAX_RECONSTRUCT_COLUMNS {
        return Err(Error::Usage(format!(
            "dense reconstruction is limited to n ≤ {MAX_RECONSTRUCT_QUBITS}, M ≤ {MAX_RECONSTRUCT_COLUMNS}"
        )));
    }
    if m == 0 {
        return Err(Error::Usage("reconstruction needs at least one column".into()));
    }
    Ok(())
}

fn column_block(h: &DenseHermitian, columns: &[u64]) -> CMatrix {
    CMatrix::from_fn(h.dim(), columns.len(), |i, j| h.matrix[(i, columns[j] as usize)])
}

/// `Ĥ = A B⁺ A*` with `A = H[:, cols]`, `B = H[cols, cols]`.
pub fn reconstruct_nystrom(h: &DenseHermitian, columns: &[u64]) -> Result<CMatrix> {
    check_reconstruct(h, columns.len())?;
    let a = column_block(h, columns);
    let b = CMatrix::from_fn(columns.len(), columns.len(), |j, k| {
        h.matrix[(columns[j] as usize, columns[k] as usize)]
    });
    let pinv = pinv_hermitian(&b, default_pinv_rtol(columns.len()))?;
    Ok(&a * pinv.pinv * a.adjoint())
}

/// `AA*` for the rescaled-row sketch.
pub fn reconstruct_aa_star(sketch: &SketchHermitian, n: QubitCount) -> Result<CMatrix> {
    let a = sketch_matrix(sketch, n)?;
    Ok(&a * a.adjoint())
}

/// Dense `A`, column `j` equal to `s_j H_{:,t_j}`.
pub fn sketch_matrix(sketch: &SketchHermitian, n: QubitCount) -> Result<CMatrix> {
    if n.get() > MAX_EXACT_QUBITS {
        return Err(Error::Usage(format!(
            "dense sketch matrix is limited to n ≤ {MAX_EXACT_QUBITS}"
        )));
    }
    let mut a = CMatrix::zeros(n.dim() as usize, sketch.columns.len());
    for (j, row) in sketch.rows.iter().enumerate() {
        for &(i, h) in row.entries() {
            a[(i as usize, j)] = h.conj() * sketch.scales[j];
        }
    }
    Ok(a)
}

/// `P̂ = S*V*(VSS*V*)⁺VS` for `H = SS*` and the coordinate selection `V`.
pub fn reconstruct_projection(h: &DenseHermitian, columns: &[u64]) -> Result<CMatrix> {
    check_reconstruct(h, columns.len())?;
    let s = h.psd_factor()?;
    let vs = CMatrix::from_fn(columns.len(), h.dim(), |j, k| s[(columns[j] as usize, k)]);
    let b = &vs * vs.adjoint();
    let pinv = pinv_hermitian(&b, default_pinv_rtol(columns.len()))?;
    Ok(vs.adjoint() * pinv.pinv * vs)
}

/// Requires a psd oracle; used by density-matrix runs.
pub fn require_psd(h: &DenseHermitian) -> Result<()> {
    h.psd_factor().map(|_| ())
}
