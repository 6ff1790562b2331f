//! Truncation order and sample count from accuracy targets.
//!
//! All logarithms are natural.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{DenseHermitian, MAX_EXACT_QUBITS};
use crate::hamiltonian::{Mode, QubitCount, RowOracle, WeightKind};

pub const FORMULA_VERSION: u32 = 1;
/// Largest `n` for which power iteration materializes dense vectors.
pub const MAX_POWER_ITERATION_QUBITS: u32 = 20;
pub const POWER_ITERATION_STEPS: usize = 200;
pub const POWER_ITERATION_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatsSource {
    ExactDense,
    MarginalTree,
    UserSuppliedBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsMethod {
    ExactDense,
    Tree,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HamiltonianStats {
    pub trace_h: f64,
    /// `‖H‖²_F`.
    pub frob_sq: f64,
    /// `‖H‖`, or an upper bound on it when `spec_norm_exact` is false.
    pub spec_norm: f64,
    pub spec_norm_exact: bool,
    pub n: u32,
    pub source: StatsSource,
}

impl HamiltonianStats {
    /// Replaces the spectral norm by a caller-certified upper bound.
    pub fn with_spec_norm_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::Usage(format!("spectral norm bound must be positive, got {bound}")));
        }
        self.spec_norm = bound;
        self.spec_norm_exact = false;
        self.source = StatsSource::UserSuppliedBound;
        Ok(self)
    }

    /// `‖H‖²_F − tr(H)²/2ⁿ`, the Frobenius mass left after the optimal trace shift.
    pub fn shifted_mass(&self) -> f64 {
        self.frob_sq - self.trace_h * self.trace_h / (self.n as f64).exp2()
    }
}

pub fn compute_stats<O: RowOracle + ?Sized>(oracle: &O, method: StatsMethod) -> Result<HamiltonianStats> {
    let n = oracle.qubits();
    match method {
        StatsMethod::ExactDense => {
            if n.get() > MAX_EXACT_QUBITS {
                return Err(Error::Usage(format!(
                    "exact-dense statistics are limited to n ≤ {MAX_EXACT_QUBITS}"
                )));
            }
            let h = DenseHermitian::from_oracle(oracle)?;
            Ok(HamiltonianStats {
                trace_h: h.trace(),
                frob_sq: h.frob_sq(),
                spec_norm: h.spectral_norm()?,
                spec_norm_exact: true,
                n: n.get(),
                source: StatsSource::ExactDense,
            })
        }
        StatsMethod::Tree => {
            let trace_h = oracle.total_weight(WeightKind::Diagonal);
            let frob_sq = oracle.total_weight(WeightKind::SquaredRowNorm);
            if !trace_h.is_finite() || !frob_sq.is_finite() {
                return Err(Error::numerical("trace or Frobenius marginal is not finite"));
            }
            let (spec_norm, spec_norm_exact) = match power_iteration(oracle) {
                Some(norm) => (norm, true),
                None => {
                    let bound = frob_sq.sqrt();
                    log::warn!("power iteration did not converge; using ‖H‖_F = {bound:.6e} as the norm bound");
                    (bound, false)
                }
            };
            Ok(HamiltonianStats {
                trace_h,
                frob_sq,
                spec_norm,
                spec_norm_exact,
                n: n.get(),
                source: StatsSource::MarginalTree,
            })
        }
    }
}

fn apply_dense<O: RowOracle + ?Sized>(oracle: &O, x: &[Complex64]) -> Vec<Complex64> {
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            oracle
                .row(i as u64)
                .entries()
                .iter()
                .map(|&(j, h)| h * x[j as usize])
                .sum()
        })
        .collect()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖H‖` by power iteration on `H²`; `None` if it has not converged.
fn power_iteration<O: RowOracle + ?Sized>(oracle: &O) -> Option<f64> {
    let n = oracle.qubits().get();
    if n > MAX_POWER_ITERATION_QUBITS {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<Complex64> = (0..oracle.dim())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|z| *z /= nx);
    for _ in 0..POWER_ITERATION_STEPS {
        let hx = apply_dense(oracle, &x);
        let h2x = apply_dense(oracle, &hx);
        // Rayleigh quotient of H² at unit x.
        let lambda = norm(&hx).powi(2);
        if lambda == 0.0 {
            return Some(0.0);
        }
        let residual = h2x
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual <= POWER_ITERATION_RESIDUAL * lambda {
            return Some(lambda.sqrt());
        }
        let n2 = norm(&h2x);
        x = h2x.into_iter().map(|z| z / n2).collect();
    }
    None
}

/// Fully determines a run.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EvolutionPlan {
    pub mode: Mode,
    pub t: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Truncation order `K`.
    pub order: usize,
    /// Number of sampled indices `M`.
    pub samples: usize,
    /// Trace shift subtracted from the diagonal.
    pub alpha: f64,
    pub seed: u64,
    pub stats: HamiltonianStats,
    /// Right-hand sides before ceiling.
    pub order_raw: f64,
    pub samples_raw: f64,
    pub order_overridden: bool,
    pub samples_overridden: bool,
    /// `ln(‖H‖²_F/‖H‖²)` against its ceiling `n ln 2`, Hermitian plans only.
    pub log_ratio: Option<f64>,
    pub formula_version: u32,
}

fn check_inputs(t: f64, eps: f64, delta: f64) -> Result<f64> {
    for (name, v) in [("eps", eps), ("delta", delta)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::Domain(format!("{name} must lie in (0, 1], got {v}")));
        }
    }
    if !t.is_finite() || t == 0.0 {
        return Err(Error::Domain(format!("planning needs a finite nonzero t, got {t}")));
    }
    // e^{iHt} and e^{-iHt} have the same error analysis.
    Ok(t.abs())
}

fn ceil_count(raw: f64, what: &str) -> Result<usize> {
    if !raw.is_finite() || raw > usize::MAX as f64 / 2.0 {
        return Err(Error::Resource(format!("planned {what} = {raw:e} is not representable")));
    }
    Ok((raw.ceil() as usize).max(1))
}

/// `K = ⌈e t‖H‖ + ln(2/ε)⌉`.
pub fn psd_order_raw(spec_norm: f64, t: f64, eps: f64) -> f64 {
    std::f64::consts::E * t * spec_norm + (2.0 / eps).ln()
}

/// `M = ⌈max(405 trH, (72 trH t/ε) ln(36 trH t/(εδ)))⌉`.
pub fn psd_samples_raw(trace_h: f64, t: f64, eps: f64, delta: f64) -> f64 {
    let tail = 72.0 * trace_h * t / eps * (36.0 * trace_h * t / (eps * delta)).ln();
    (405.0 * trace_h).max(tail)
}

/// `M = ⌈256 t⁴(1 + t²‖H‖²)‖H‖²_F‖H‖²/ε² · ln(4‖H‖²_F/(δ‖H‖²))⌉`.
pub fn hermitian_samples_raw(frob_sq: f64, spec_norm: f64, t: f64, eps: f64, delta: f64) -> f64 {
    let s2 = spec_norm * spec_norm;
    256.0 * t.powi(4) * (1.0 + t * t * s2) * frob_sq * s2 / (eps * eps)
        * (4.0 * frob_sq / (delta * s2)).ln()
}

/// `K = ⌈4t√(‖H‖² + ε) + ln(4(1 + t‖H‖)/ε)⌉`.
pub fn hermitian_order_raw(spec_norm: f64, t: f64, eps: f64) -> f64 {
    4.0 * t * (spec_norm * spec_norm + eps).sqrt() + (4.0 * (1.0 + t * spec_norm) / eps).ln()
}

pub fn plan_psd(stats: &HamiltonianStats, t: f64, eps: f64, delta: f64) -> Result<EvolutionPlan> {
    let t_abs = check_inputs(t, eps, delta)?;
    if stats.trace_h.is_nan() || stats.trace_h <= 0.0 {
        return Err(Error::Domain(format!(
            "psd plan needs tr H > 0, got {}",
            stats.trace_h
        )));
    }
    let order_raw = psd_order_raw(stats.spec_norm, t_abs, eps);
    let samples_raw = psd_samples_raw(stats.trace_h, t_abs, eps, delta);
    Ok(EvolutionPlan {
        mode: Mode::Psd,
        t,
        epsilon: eps,
        delta,
        order: ceil_count(order_raw, "K")?,
        samples: ceil_count(samples_raw, "M")?,
        alpha: 0.0,
        seed: 0,
        stats: stats.clone(),
        order_raw,
        samples_raw,
        order_overridden: false,
        samples_overridden: false,
        log_ratio: None,
        formula_version: FORMULA_VERSION,
    })
}

/// `stats` should describe the shifted Hamiltonian when a trace shift is applied.
pub fn plan_hermitian(stats: &HamiltonianStats, t: f64, eps: f64, delta: f64) -> Result<EvolutionPlan> {
    let t_abs = check_inputs(t, eps, delta)?;
    if !(stats.frob_sq > 0.0 && stats.spec_norm > 0.0) {
        return Err(Error::Domain(format!(
            "hermitian plan needs a nonzero Hamiltonian (‖H‖²_F = {}, ‖H‖ = {})",
            stats.frob_sq, stats.spec_norm
        )));
    }
    let order_raw = hermitian_order_raw(stats.spec_norm, t_abs, eps);
    let samples_raw = hermitian_samples_raw(stats.frob_sq, stats.spec_norm, t_abs, eps, delta);
    let log_ratio = (stats.frob_sq / (stats.spec_norm * stats.spec_norm)).ln();
    let ceiling = stats.n as f64 * std::f64::consts::LN_2;
    if log_ratio > ceiling + 1e-9 {
        log::warn!(
            "ln(‖H‖²_F/‖H‖²) = {log_ratio:.6} exceeds n ln 2 = {ceiling:.6}; the norm statistic is inconsistent"
        );
    }
    Ok(EvolutionPlan {
        mode: Mode::Hermitian,
        t,
        epsilon: eps,
        delta,
        order: ceil_count(order_raw, "K")?,
        samples: ceil_count(samples_raw, "M")?,
        alpha: 0.0,
        seed: 0,
        stats: stats.clone(),
        order_raw,
        samples_raw,
        order_overridden: false,
        samples_overridden: false,
        log_ratio: Some(log_ratio),
        formula_version: FORMULA_VERSION,
    })
}

impl EvolutionPlan {
    /// A plan with user-chosen `K` and `M` and no formula behind them.
    pub fn manual(mode: Mode, n: QubitCount, t: f64, order: usize, samples: usize) -> Self {
        EvolutionPlan {
            mode,
            t,
            epsilon: f64::NAN,
            delta: f64::NAN,
            order,
            samples,
            alpha: 0.0,
            seed: 0,
            stats: HamiltonianStats {
                trace_h: f64::NAN,
                frob_sq: f64::NAN,
                spec_norm: f64::NAN,
                spec_norm_exact: false,
                n: n.get(),
                source: StatsSource::UserSuppliedBound,
            },
            order_raw: f64::NAN,
            samples_raw: f64::NAN,
            order_overridden: true,
            samples_overridden: true,
            log_ratio: None,
            formula_version: FORMULA_VERSION,
        }
    }

    pub fn override_order(&mut self, order: usize) {
        self.order = order;
        self.order_overridden = true;
    }

    pub fn override_samples(&mut self, samples: usize) {
        self.samples = samples;
        self.samples_overridden = true;
    }

    /// Warns when sampling more indices than the matrix has rows.
    pub fn warn_if_oversampled(&self) {
        let dim = (self.stats.n as f64).exp2();
        if self.samples as f64 > dim {
            log::warn!(
                "planned M = {} exceeds 2^n = {dim}; the bound is valid but pessimistic",
                self.samples
            );
        }
    }

    /// `key = value` lines.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mode = {}", self.mode);
        let _ = writeln!(s, "t = {}", self.t);
        let _ = writeln!(s, "eps = {}", self.epsilon);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "K = {}{}", self.order, if self.order_overridden { " (override)" } else { "" });
        let _ = writeln!(s, "M = {}{}", self.samples, if self.samples_overridden { " (override)" } else { "" });
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "stats.n = {}", self.stats.n);
        let _ = writeln!(s, "stats.traceH = {}", self.stats.trace_h);
        let _ = writeln!(s, "stats.frobSq = {}", self.stats.frob_sq);
        let _ = writeln!(
            s,
            "stats.specNorm = {}{}",
            self.stats.spec_norm,
            if self.stats.spec_norm_exact { "" } else { " (bound)" }
        );
        let _ = writeln!(s, "formula-version = {}", self.formula_version);
        s
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EfficiencyReport {
    pub shifted_mass: f64,
    pub budget: f64,
    pub pass: bool,
}

/// Informational only: compares the shifted Frobenius mass to `budget`.
pub fn efficiency_check(stats: &HamiltonianStats, budget: f64) -> EfficiencyReport {
    let shifted_mass = stats.shifted_mass();
    EfficiencyReport {
        shifted_mass,
        budget,
        pass: shifted_mass <= budget,
    }
}

/// `n³`, a polylog budget in the dimension.
pub fn default_efficiency_budget(n: QubitCount) -> f64 {
    (n.get() as f64).powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{builtin_hamiltonian, Family, FamilyParams, StoredOracle};
    use proptest::prelude::*;

    fn q(n: u32) -> QubitCount {
        QubitCount::new(n).unwrap()
    }

    fn stats(trace_h: f64, frob_sq: f64, spec_norm: f64, n: u32) -> HamiltonianStats {
        HamiltonianStats {
            trace_h,
            frob_sq,
            spec_norm,
            spec_norm_exact: true,
            n,
            source: StatsSource::UserSuppliedBound,
        }
    }

    #[test]
    fn psd_examples() {
        let p = plan_psd(&stats(1.0, 1.0, 1.0, 4), 1.0, 0.01, 0.1).unwrap();
        assert_eq!(p.order, 9);
        assert_eq!(p.samples, 75538);
        // 405 trH dominates for loose targets and short times.
        let p = plan_psd(&stats(1.0, 1.0, 1.0, 4), 0.01, 1.0, 1.0).unwrap();
        assert_eq!(p.samples, 405);
    }

    #[test]
    fn hermitian_examples() {
        let p = plan_hermitian(&stats(0.0, 2.0, 1.0, 4), 1.0, 0.1, 0.1).unwrap();
        // 102400 ln 80 = 448719.5…
        assert_eq!(p.samples, 448720);
        assert_eq!(p.order, 9);
        assert!((p.log_ratio.unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn oracle_values_by_independent_arithmetic() {
        let e = std::f64::consts::E;
        assert!((psd_order_raw(1.0, 1.0, 0.01) - (e + 200f64.ln())).abs() < 1e-12);
        assert!((psd_samples_raw(1.0, 1.0, 0.01, 0.1) - 7200.0 * 36000f64.ln()).abs() < 1e-9);
        assert!((hermitian_samples_raw(2.0, 1.0, 1.0, 0.1, 0.1) - 102400.0 * 80f64.ln()).abs() < 1e-6);
        assert!((hermitian_order_raw(1.0, 1.0, 0.1) - (4.0 * 1.1f64.sqrt() + 80f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let s = stats(1.0, 1.0, 1.0, 2);
        assert!(matches!(plan_psd(&s, 1.0, 0.0, 0.1), Err(Error::Domain(_))));
        assert!(matches!(plan_psd(&s, 1.0, 0.1, 1.5), Err(Error::Domain(_))));
        assert!(matches!(plan_psd(&s, 0.0, 0.1, 0.1), Err(Error::Domain(_))));
        assert!(matches!(plan_psd(&stats(0.0, 0.0, 0.0, 2), 1.0, 0.1, 0.1), Err(Error::Domain(_))));
        assert!(matches!(plan_hermitian(&stats(0.0, 0.0, 0.0, 2), 1.0, 0.1, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn negative_time_plans_like_positive() {
        let s = stats(1.5, 1.2, 0.9, 3);
        let a = plan_psd(&s, 2.0, 0.1, 0.1).unwrap();
        let b = plan_psd(&s, -2.0, 0.1, 0.1).unwrap();
        assert_eq!((a.order, a.samples), (b.order, b.samples));
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(efficiency_check(&stats(4.0, 4.0, 1.0, 2), 0.5).shifted_mass, 0.0);
        let r = efficiency_check(&stats(4.0, 10.0, 3.0, 1), 8.0);
        assert_eq!(r.shifted_mass, 2.0);
        assert!(r.pass);
        let r = efficiency_check(&stats(0.0, 1024.0, 1.0, 10), default_efficiency_budget(q(10)) / 10.0);
        assert!(!r.pass);
    }

    #[test]
    fn stats_examples() {
        let o = builtin_hamiltonian(Family::InverseDiag, q(2), &FamilyParams::default(), 0).unwrap();
        for method in [StatsMethod::ExactDense, StatsMethod::Tree] {
            let s = compute_stats(&*o, method).unwrap();
            assert!((s.trace_h - 25.0 / 12.0).abs() < 1e-14);
            assert!((s.frob_sq - (1.0 + 0.25 + 1.0 / 9.0 + 1.0 / 16.0)).abs() < 1e-14);
            assert!((s.spec_norm - 1.0).abs() < 1e-9);
        }
        let single = StoredOracle::from_entries(q(3), Mode::Psd, vec![(0, 0, Complex64::new(5.0, 0.0))]).unwrap();
        let s = compute_stats(&single, StatsMethod::Tree).unwrap();
        assert_eq!((s.trace_h, s.frob_sq), (5.0, 25.0));
        assert!((s.spec_norm - 5.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_matches_dense() {
        for seed in 0..5 {
            let o = builtin_hamiltonian(Family::RandomSparseHermitian, q(3), &FamilyParams::default(), seed).unwrap();
            let dense = compute_stats(&*o, StatsMethod::ExactDense).unwrap();
            let tree = compute_stats(&*o, StatsMethod::Tree).unwrap();
            if tree.spec_norm_exact {
                assert!((dense.spec_norm - tree.spec_norm).abs() < 1e-5, "seed {seed}");
            } else {
                assert!(tree.spec_norm >= dense.spec_norm);
            }
        }
    }

    #[test]
    fn stats_methods_agree() {
        for (family, n) in [
            (Family::RandomSparsePsd, 6),
            (Family::RankRPsd, 5),
            (Family::LaplacianPath, 10),
            (Family::RandomSparseHermitian, 7),
        ] {
            let o = builtin_hamiltonian(family, q(n), &FamilyParams::default(), 4).unwrap();
            let a = compute_stats(&*o, StatsMethod::ExactDense).unwrap();
            let b = compute_stats(&*o, StatsMethod::Tree).unwrap();
            assert!((a.trace_h - b.trace_h).abs() < 1e-9);
            assert!((a.frob_sq - b.frob_sq).abs() < 1e-9);
            assert!(a.spec_norm <= a.frob_sq.sqrt() + 1e-9);
            assert!(a.frob_sq >= a.trace_h * a.trace_h / (1u64 << n) as f64 - 1e-9);
            assert!(b.spec_norm >= a.spec_norm - 1e-5 * a.spec_norm.max(1.0));
        }
    }

    #[test]
    fn key_value_block_lists_every_field() {
        let p = plan_psd(&stats(1.0, 1.0, 1.0, 4), 1.0, 0.01, 0.1).unwrap();
        let text = p.to_key_value();
        for key in ["mode", "t", "eps", "delta", "K", "M", "alpha", "seed", "stats.traceH", "formula-version"] {
            assert!(text.lines().any(|l| l.starts_with(&format!("{key} = "))), "{key}");
        }
    }

    proptest! {
        #[test]
        fn samples_nonincreasing_in_eps_and_delta(
            tr in 0.1f64..10.0, norm in 0.1f64..5.0, t in 0.1f64..5.0,
            e1 in 0.01f64..1.0, e2 in 0.01f64..1.0, d1 in 0.01f64..1.0, d2 in 0.01f64..1.0,
        ) {
            let (elo, ehi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let (dlo, dhi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            let s = stats(tr, norm * norm * 2.0, norm, 6);
            prop_assert!(plan_psd(&s, t, ehi, dlo).unwrap().samples <= plan_psd(&s, t, elo, dlo).unwrap().samples);
            prop_assert!(plan_psd(&s, t, elo, dhi).unwrap().samples <= plan_psd(&s, t, elo, dlo).unwrap().samples);
            prop_assert!(plan_hermitian(&s, t, ehi, dlo).unwrap().samples <= plan_hermitian(&s, t, elo, dlo).unwrap().samples);
            prop_assert!(plan_hermitian(&s, t, elo, dhi).unwrap().samples <= plan_hermitian(&s, t, elo, dlo).unwrap().samples);
        }

        #[test]
        fn order_nondecreasing_in_t_and_norm(
            n1 in 0.01f64..10.0, n2 in 0.01f64..10.0, t1 in 0.01f64..10.0, t2 in 0.01f64..10.0, eps in 0.01f64..1.0,
        ) {
            let (nlo, nhi) = if n1 < n2 { (n1, n2) } else { (n2, n1) };
            let (tlo, thi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            let lo = stats(1.0, 4.0 * nhi * nhi, nlo, 8);
            let hi = stats(1.0, 4.0 * nhi * nhi, nhi, 8);
            prop_assert!(plan_psd(&lo, tlo, eps, 0.1).unwrap().order <= plan_psd(&hi, tlo, eps, 0.1).unwrap().order);
            prop_assert!(plan_psd(&lo, tlo, eps, 0.1).unwrap().order <= plan_psd(&lo, thi, eps, 0.1).unwrap().order);
            prop_assert!(plan_hermitian(&lo, tlo, eps, 0.1).unwrap().order <= plan_hermitian(&hi, tlo, eps, 0.1).unwrap().order);
            prop_assert!(plan_hermitian(&lo, tlo, eps, 0.1).unwrap().order <= plan_hermitian(&lo, thi, eps, 0.1).unwrap().order);
        }

        #[test]
        fn recorded_raw_values_reproduce_formulas(
            tr in 0.1f64..10.0, norm in 0.1f64..5.0, t in 0.1f64..5.0, eps in 0.01f64..1.0, delta in 0.01f64..1.0,
        ) {
            let s = stats(tr, norm * norm * 3.0, norm, 6);
            let p = plan_psd(&s, t, eps, delta).unwrap();
            let m = (405.0 * p.stats.trace_h).max(
                72.0 * p.stats.trace_h * p.t / p.epsilon * (36.0 * p.stats.trace_h * p.t / (p.epsilon * p.delta)).ln());
            prop_assert!((p.samples_raw - m).abs() <= 1e-12 * m);
            prop_assert_eq!(p.samples, p.samples_raw.ceil() as usize);
            let h = plan_hermitian(&s, t, eps, delta).unwrap();
            let k = 4.0 * h.t * (h.stats.spec_norm.powi(2) + h.epsilon).sqrt()
                + (4.0 * (1.0 + h.t * h.stats.spec_norm) / h.epsilon).ln();
            prop_assert!((h.order_raw - k).abs() <= 1e-12 * k);
            prop_assert_eq!(h.order, h.order_raw.ceil() as usize);
        }
    }
}
