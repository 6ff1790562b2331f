//! Plan → sample → sketch → evolve, with amplitude queries on the result.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{DenseHermitian, MAX_EXACT_QUBITS};
use crate::hamiltonian::{Mode, RowOracle, SparseState, WeightKind};
use crate::hermitian::{build_sketch_hermitian, evolve_hermitian, trace_shift, HermitianEvolved, ShiftedOracle};
use crate::planner::{
    compute_stats, plan_hermitian, plan_psd, EvolutionPlan, HamiltonianStats, StatsMethod, StatsSource,
};
use crate::psd::{build_sketch_psd, densify, evolve_psd, PsdEvolved, SketchOptions};
use crate::sampler::draw_batch;

/// Tolerance on `|tr ρ − 1|` for density-matrix Hamiltonians.
pub const DENSITY_TRACE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub mode: Mode,
    pub t: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub samples: Option<usize>,
    pub order: Option<usize>,
    pub seed: u64,
    /// Hermitian mode only.
    pub trace_shift: bool,
    pub stats_method: StatsMethod,
    pub spec_norm_bound: Option<f64>,
    pub sketch: SketchOptions,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            mode: Mode::Psd,
            t: 1.0,
            epsilon: 0.1,
            delta: 0.1,
            samples: None,
            order: None,
            seed: 0,
            trace_shift: true,
            stats_method: StatsMethod::Tree,
            spec_norm_bound: None,
            sketch: SketchOptions::default(),
        }
    }
}

/// Wall time per phase in milliseconds.
#[derive(Debug, Clone, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PhaseTimes {
    pub stats: f64,
    pub sample: f64,
    pub sketch: f64,
    pub evolve: f64,
}

#[derive(Debug, Clone)]
enum Evolved {
    /// `ψ̂ = phase · ψ`: `t = 0`, `H = 0`, or `H = αI`.
    Scalar,
    Psd(PsdEvolved),
    Hermitian(HermitianEvolved),
}

/// Approximate `e^{iHt}ψ`, queried one amplitude at a time.
#[derive(Debug)]
pub struct Simulation<'a, O: ?Sized> {
    oracle: &'a O,
    psi: SparseState,
    pub plan: EvolutionPlan,
    /// `e^{iαt}` from the trace shift.
    pub phase: Complex64,
    /// Distinct sketch columns after folding.
    pub distinct_columns: usize,
    pub times: PhaseTimes,
    evolved: Evolved,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Trace and Frobenius mass from marginals, with `‖H‖_F` standing in for `‖H‖`.
fn marginal_stats<O: RowOracle + ?Sized>(oracle: &O) -> HamiltonianStats {
    let frob_sq = oracle.total_weight(WeightKind::SquaredRowNorm);
    HamiltonianStats {
        trace_h: oracle.total_weight(WeightKind::Diagonal),
        frob_sq,
        spec_norm: frob_sq.sqrt(),
        spec_norm_exact: false,
        n: oracle.qubits().get(),
        source: StatsSource::MarginalTree,
    }
}

fn gather_stats<O: RowOracle + ?Sized>(oracle: &O, config: &SimulationConfig) -> Result<HamiltonianStats> {
    let overridden = config.samples.is_some() && config.order.is_some();
    let stats = if overridden {
        marginal_stats(oracle)
    } else {
        compute_stats(oracle, config.stats_method)?
    };
    match config.spec_norm_bound {
        Some(bound) => stats.with_spec_norm_bound(bound),
        None => Ok(stats),
    }
}

fn finish_plan(mut plan: EvolutionPlan, config: &SimulationConfig, alpha: f64) -> Result<EvolutionPlan> {
    if let Some(k) = config.order {
        plan.override_order(k);
    }
    if let Some(m) = config.samples {
        if m == 0 {
            return Err(Error::Usage("sample count must be positive".into()));
        }
        plan.override_samples(m);
    }
    plan.seed = config.seed;
    plan.alpha = alpha;
    plan.warn_if_oversampled();
    Ok(plan)
}

fn trivial_plan(config: &SimulationConfig, stats: HamiltonianStats, alpha: f64) -> EvolutionPlan {
    let n = crate::hamiltonian::QubitCount::new(stats.n).expect("stats carry a valid qubit count");
    let mut plan = EvolutionPlan::manual(
        config.mode,
        n,
        config.t,
        config.order.unwrap_or(1),
        config.samples.unwrap_or(1),
    );
    plan.epsilon = config.epsilon;
    plan.delta = config.delta;
    plan.order_overridden = config.order.is_some();
    plan.samples_overridden = config.samples.is_some();
    plan.stats = stats;
    plan.seed = config.seed;
    plan.alpha = alpha;
    plan
}

pub fn simulate<'a, O: RowOracle + ?Sized>(
    oracle: &'a O,
    psi: &SparseState,
    config: &SimulationConfig,
) -> Result<Simulation<'a, O>> {
    if psi.qubits() != oracle.qubits() {
        return Err(Error::Usage(format!(
            "state has {} qubits, Hamiltonian has {}",
            psi.qubits(),
            oracle.qubits()
        )));
    }
    if !config.t.is_finite() {
        return Err(Error::Domain(format!("t must be finite, got {}", config.t)));
    }
    match config.mode {
        Mode::Psd => simulate_psd(oracle, psi, config),
        Mode::Hermitian => simulate_hermitian(oracle, psi, config),
    }
}

fn scalar<'a, O: ?Sized>(oracle: &'a O, psi: &SparseState, plan: EvolutionPlan, phase: Complex64, times: PhaseTimes) -> Simulation<'a, O> {
    Simulation {
        oracle,
        psi: psi.clone(),
        plan,
        phase,
        distinct_columns: 0,
        times,
        evolved: Evolved::Scalar,
    }
}

fn simulate_psd<'a, O: RowOracle + ?Sized>(
    oracle: &'a O,
    psi: &SparseState,
    config: &SimulationConfig,
) -> Result<Simulation<'a, O>> {
    if oracle.mode() != Mode::Psd {
        return Err(Error::Usage("psd mode needs a Hamiltonian declared psd".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut times = PhaseTimes::default();
    if config.t == 0.0 {
        return Ok(scalar(oracle, psi, trivial_plan(config, marginal_stats(oracle), 0.0), one, times));
    }
    let clock = Instant::now();
    let trace = oracle.total_weight(WeightKind::Diagonal);
    if trace == 0.0 {
        // A psd matrix with zero trace is zero.
        return Ok(scalar(oracle, psi, trivial_plan(config, marginal_stats(oracle), 0.0), one, times));
    }
    let stats = gather_stats(oracle, config)?;
    times.stats = ms(clock);
    let plan = finish_plan(plan_psd(&stats, config.t, config.epsilon, config.delta)?, config, 0.0)?;

    let clock = Instant::now();
    let batch = draw_batch(oracle, WeightKind::Diagonal, plan.samples, plan.seed)?;
    times.sample = ms(clock);
    let clock = Instant::now();
    let sketch = build_sketch_psd(oracle, &batch, psi, &config.sketch)?;
    times.sketch = ms(clock);
    let clock = Instant::now();
    let evolved = evolve_psd(&sketch, psi, plan.t, plan.order)?;
    times.evolve = ms(clock);
    Ok(Simulation {
        oracle,
        psi: psi.clone(),
        plan,
        phase: one,
        distinct_columns: sketch.columns.len(),
        times,
        evolved: Evolved::Psd(evolved),
    })
}

fn simulate_hermitian<'a, O: RowOracle + ?Sized>(
    oracle: &'a O,
    psi: &SparseState,
    config: &SimulationConfig,
) -> Result<Simulation<'a, O>> {
    let mut times = PhaseTimes::default();
    let clock = Instant::now();
    let shifted = if config.trace_shift {
        trace_shift(oracle)
    } else {
        ShiftedOracle::new(oracle, 0.0)
    };
    let alpha = shifted.alpha();
    let phase = shifted.phase(config.t);
    if config.t == 0.0 {
        return Ok(scalar(oracle, psi, trivial_plan(config, marginal_stats(&shifted), alpha), phase, times));
    }
    if shifted.total_weight(WeightKind::SquaredRowNorm) == 0.0 {
        // H = αI: the evolution is the phase alone.
        return Ok(scalar(oracle, psi, trivial_plan(config, marginal_stats(&shifted), alpha), phase, times));
    }
    let stats = gather_stats(&shifted, config)?;
    times.stats = ms(clock);
    let plan = finish_plan(plan_hermitian(&stats, config.t, config.epsilon, config.delta)?, config, alpha)?;

    let clock = Instant::now();
    let batch = draw_batch(&shifted, WeightKind::SquaredRowNorm, plan.samples, plan.seed)?;
    times.sample = ms(clock);
    let clock = Instant::now();
    let sketch = build_sketch_hermitian(&shifted, &batch, psi, &config.sketch)?;
    times.sketch = ms(clock);
    let clock = Instant::now();
    let evolved = evolve_hermitian(&sketch, psi, plan.t, plan.order)?;
    times.evolve = ms(clock);
    Ok(Simulation {
        oracle,
        psi: psi.clone(),
        plan,
        phase,
        distinct_columns: sketch.columns.len(),
        times,
        evolved: Evolved::Hermitian(evolved),
    })
}

impl<O: RowOracle + ?Sized> Simulation<'_, O> {
    pub fn amplitude(&self, i: u64) -> Complex64 {
        let raw = match &self.evolved {
            Evolved::Scalar => self.psi.amplitude(i),
            Evolved::Psd(e) => e.amplitude(self.oracle, i),
            Evolved::Hermitian(e) => e.amplitude(&ShiftedOracle::new(self.oracle, self.plan.alpha), i),
        };
        self.phase * raw
    }

    pub fn amplitudes(&self, indices: &[u64]) -> Result<Vec<Complex64>> {
        let dim = self.oracle.dim();
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::Usage(format!("amplitude index {bad} is outside 0..{dim}")));
        }
        Ok(indices.par_iter().map(|&i| self.amplitude(i)).collect())
    }

    /// All nonzero amplitudes, sorted by index.
    pub fn sparse_state(&self) -> Vec<(u64, Complex64)> {
        let raw = match &self.evolved {
            Evolved::Scalar => self.psi.entries().to_vec(),
            Evolved::Psd(e) => e.sparse_state(self.oracle),
            Evolved::Hermitian(e) => e.sparse_state(&ShiftedOracle::new(self.oracle, self.plan.alpha)),
        };
        raw.into_iter().map(|(i, a)| (i, self.phase * a)).collect()
    }

    pub fn dense_state(&self) -> Result<Vec<Complex64>> {
        densify(self.oracle.qubits().get(), self.sparse_state())
    }
}

/// Checks that a psd-declared oracle is a density matrix: unit trace, and
/// positive semidefinite when small enough to verify densely.
pub fn validate_density<O: RowOracle + ?Sized>(oracle: &O) -> Result<()> {
    if oracle.mode() != Mode::Psd {
        return Err(Error::Domain("a density matrix must be declared psd".into()));
    }
    let trace = oracle.total_weight(WeightKind::Diagonal);
    if (trace - 1.0).abs() > DENSITY_TRACE_TOLERANCE {
        return Err(Error::Domain(format!("density matrix has trace {trace}, expected 1")));
    }
    if oracle.qubits().get() <= MAX_EXACT_QUBITS {
        DenseHermitian::from_oracle(oracle)?.psd_factor()?;
    }
    Ok(())
}
