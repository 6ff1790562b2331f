mod common;

use common::*;
use hamsim::exact::{reconstruct_nystrom, sketch_matrix, state_distance, DenseHermitian};
use hamsim::hamiltonian::{builtin_hamiltonian, Family, FamilyParams, Mode, SparseState, WeightKind};
use hamsim::hermitian::{build_sketch_hermitian, evolve_hermitian, TruncatedSeries};
use hamsim::linalg::{hermitian_norm, max_abs_hermitian_defect, CMatrix, CVector};
use hamsim::pipeline::{simulate, SimulationConfig};
use hamsim::psd::{build_sketch_psd, evolve_psd, sketch_from_columns, taylor_coefficients, SketchOptions};
use hamsim::sampler::draw_batch;
use num_complex::Complex64;
use proptest::prelude::*;

fn dense_of(entries: Vec<(u64, Complex64)>, dim: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (i, a) in entries {
        out[i as usize] = a;
    }
    out
}

/// Σ_{k=1}^{K} (it)^k M^{k-1} / k! by explicit powers.
fn g_poly(m: &CMatrix, t: f64, order: usize) -> CMatrix {
    let c = taylor_coefficients(t, order);
    let dim = m.nrows();
    let mut power = CMatrix::identity(dim, dim);
    let mut acc = CMatrix::zeros(dim, dim);
    for ck in c.iter().skip(1) {
        acc += &power * *ck;
        power = &power * m;
    }
    acc
}

#[test]
fn spanning_columns_recover_h() {
    let mut r = rng(8);
    let h = DenseHermitian::from_matrix(q(3), random_dense_psd(8, 8, &mut r)).unwrap();
    let hat = reconstruct_nystrom(&h, &(0..8).collect::<Vec<_>>()).unwrap();
    assert!((hat - &h.matrix).norm() <= 1e-8);

    let low = random_dense_psd(8, 3, &mut r);
    let h = DenseHermitian::from_matrix(q(3), low).unwrap();
    let hat = reconstruct_nystrom(&h, &[1, 4, 6]).unwrap();
    assert!((hat - &h.matrix).norm() <= 1e-8 * h.matrix.norm());
}

#[test]
fn spanning_sketch_converges_to_exact_evolution() {
    for (n, seed) in [(3u32, 1u64), (5, 2), (6, 3)] {
        let p = FamilyParams {
            rank: 2,
            support: Some(5),
            ..Default::default()
        };
        let o = builtin_hamiltonian(Family::RankRPsd, q(n), &p, seed).unwrap();
        let support: Vec<u64> = (0..o.dim()).filter(|&i| o.diag(i) > 0.0).collect();
        let psi = random_state(q(n), 3, &mut rng(seed));
        let sketch = sketch_from_columns(&*o, support, &psi, &SketchOptions::default()).unwrap();
        let approx = evolve_psd(&sketch, &psi, 1.3, 200).unwrap().dense_state(&*o).unwrap();
        let exact = DenseHermitian::from_oracle(&*o).unwrap().propagator().unwrap().apply(&psi.to_dense(), 1.3).unwrap();
        assert!(state_distance(&approx, &exact) <= 1e-8, "n={n}");
    }
}

#[test]
fn planned_psd_eight_by_eight() {
    let o = bounded_instance(Family::RandomSparsePsd, q(3), &FamilyParams::default(), 12, 2.0, f64::INFINITY);
    let psi = random_state(q(3), 2, &mut rng(12));
    let config = SimulationConfig {
        t: 1.0,
        epsilon: 0.1,
        delta: 0.1,
        seed: 4,
        ..Default::default()
    };
    let sim = simulate(&*o, &psi, &config).unwrap();
    let exact = DenseHermitian::from_oracle(&*o).unwrap().propagator().unwrap().apply(&psi.to_dense(), 1.0).unwrap();
    assert!(state_distance(&sim.dense_state().unwrap(), &exact) <= 0.1);
}

#[test]
fn mean_row_sketch_is_close_to_h_squared() {
    let o = builtin_hamiltonian(Family::RandomSparseHermitian, q(3), &FamilyParams::default(), 21).unwrap();
    let h = DenseHermitian::from_oracle(&*o).unwrap();
    let h2 = &h.matrix * &h.matrix;
    let m = 10_000;
    let psi = SparseState::basis(q(3), 0).unwrap();
    let batch = draw_batch(&*o, WeightKind::SquaredRowNorm, m, 3).unwrap();
    let sketch = build_sketch_hermitian(&*o, &batch, &psi, &SketchOptions::default()).unwrap();
    let a = sketch_matrix(&sketch, q(3)).unwrap();
    let err = hermitian_norm(&(&a * a.adjoint() - h2)).unwrap();
    assert!(err <= 4.0 * h.frob_sq() / (m as f64).sqrt(), "{err}");
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut r = vec![0.0; v.len()];
    for (rank, &i) in idx.iter().enumerate() {
        r[i] = rank as f64;
    }
    r
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

#[test]
fn hermitian_error_decays_with_samples() {
    let p = FamilyParams {
        row_nnz: 3,
        ..Default::default()
    };
    let o = builtin_hamiltonian(Family::RandomSparseHermitian, q(3), &p, 77).unwrap();
    let psi = random_state(q(3), 3, &mut rng(77));
    let exact = DenseHermitian::from_oracle(&*o).unwrap().propagator().unwrap().apply(&psi.to_dense(), 1.0).unwrap();
    let grid = [4usize, 16, 64, 256, 1024];
    let medians: Vec<f64> = grid
        .iter()
        .map(|&m| {
            let mut errs: Vec<f64> = (0..25u64)
                .map(|seed| {
                    let config = SimulationConfig {
                        mode: Mode::Hermitian,
                        t: 1.0,
                        samples: Some(m),
                        order: Some(200),
                        seed,
                        ..Default::default()
                    };
                    let sim = simulate(&*o, &psi, &config).unwrap();
                    state_distance(&sim.dense_state().unwrap(), &exact)
                })
                .collect();
            errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            errs[errs.len() / 2]
        })
        .collect();
    let xs: Vec<f64> = grid.iter().map(|&m| m as f64).collect();
    let rho = spearman(&xs, &medians);
    assert!(rho < -0.9, "medians {medians:?}, rho {rho}");
}

#[test]
fn split_identity_at_random_points() {
    let f = TruncatedSeries::f(80);
    let g = TruncatedSeries::g(80);
    let mut r = rng(100);
    for _ in 0..100 {
        let x: f64 = rand::Rng::random_range(&mut r, -20.0..20.0);
        let y = x * x;
        let split = Complex64::new(1.0 + f.eval_scalar(y) * y, x + g.eval_scalar(y) * y * x);
        assert!((split - Complex64::new(0.0, x).exp()).norm() <= 1e-10, "x = {x}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn push_through_identity(n in 1u32..=5, seed in any::<u64>(), m in 1usize..12, order in 1usize..=20, t in 0.1f64..2.0) {
        let o = builtin_hamiltonian(Family::RandomSparsePsd, q(n), &FamilyParams::default(), seed).unwrap();
        let psi = random_state(q(n), 2, &mut rng(seed));
        let batch = draw_batch(&*o, WeightKind::Diagonal, m, seed).unwrap();
        let sketch = build_sketch_psd(&*o, &batch, &psi, &SketchOptions::default()).unwrap();
        prop_assert!(max_abs_hermitian_defect(&sketch.b) <= 1e-12);
        prop_assert!(sketch.b_pinv.min_eigenvalue >= -1e-10);
        let h = DenseHermitian::from_oracle(&*o).unwrap();
        let hat = reconstruct_nystrom(&h, &sketch.columns).unwrap();
        let dim = 1usize << n;
        let lhs = g_poly(&hat, t, order) * &hat * CVector::from_vec(psi.to_dense());
        let rhs = evolve_psd(&sketch, &psi, t, order).unwrap().dense_state(&*o).unwrap();
        let psi_dense = psi.to_dense();
        for i in 0..dim {
            prop_assert!((rhs[i] - psi_dense[i] - lhs[i]).norm() <= 1e-8);
        }
    }

    #[test]
    fn spectral_commutation(n in 1u32..=5, seed in any::<u64>(), m in 1usize..=8, t in 0.1f64..1.5) {
        let o = builtin_hamiltonian(Family::RandomSparseHermitian, q(n), &FamilyParams::default(), seed).unwrap();
        let psi = SparseState::basis(q(n), 0).unwrap();
        let batch = draw_batch(&*o, WeightKind::SquaredRowNorm, m, seed).unwrap();
        let sketch = build_sketch_hermitian(&*o, &batch, &psi, &SketchOptions::default()).unwrap();
        let a = sketch_matrix(&sketch, q(n)).unwrap();
        let f = TruncatedSeries::f(30);
        let t2 = Complex64::new(t * t, 0.0);
        let by_small = (a.adjoint() * &a) * t2;
        let aa = &a * a.adjoint();
        let by_big = &aa * t2;
        let dim = 1usize << n;
        let a_star = a.adjoint();
        for col in 0..dim {
            let left = &a * f.eval_matrix(&by_small, &a_star.column(col).into_owned()).unwrap();
            let right = f.eval_matrix(&by_big, &aa.column(col).into_owned()).unwrap();
            prop_assert!((left - right).norm() <= 1e-8);
        }
    }

    #[test]
    fn hermitian_sketch_gram_is_psd(n in 1u32..=6, seed in any::<u64>(), m in 1usize..40) {
        let o = builtin_hamiltonian(Family::RandomSparseHermitian, q(n), &FamilyParams::default(), seed).unwrap();
        let psi = random_state(q(n), 2, &mut rng(seed));
        let batch = draw_batch(&*o, WeightKind::SquaredRowNorm, m, seed).unwrap();
        let sketch = build_sketch_hermitian(&*o, &batch, &psi, &SketchOptions::default()).unwrap();
        prop_assert!(max_abs_hermitian_defect(&sketch.b) <= 1e-12);
        let (vals, _) = hamsim::linalg::hermitian_eigen(&sketch.b).unwrap();
        prop_assert!(vals.iter().all(|&x| x >= -1e-10));
        let e = evolve_hermitian(&sketch, &psi, 0.9, 20).unwrap();
        let dense = dense_of(e.sparse_state(&*o), 1usize << n);
        for (i, a) in dense.iter().enumerate() {
            prop_assert!((e.amplitude(&*o, i as u64) - a).norm() < 1e-12);
        }
    }
}
