use std::io::Write;
use std::path::Path;
use std::time::Instant;

use hamsim::exact::{state_distance, DenseHermitian, Propagator, MAX_EXACT_QUBITS};
use hamsim::hamiltonian::{
    builtin_hamiltonian, load_coo, load_state, Family, FamilyParams, Mode, QubitCount, RowOracle, SparseState,
};
use hamsim::pipeline::{simulate, validate_density, PhaseTimes, SimulationConfig};
use hamsim::planner::EvolutionPlan;
use hamsim::psd::{SketchOptions, MAX_DENSE_QUBITS};
use hamsim::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Axis, Common, EvolveArgs, GridScale, RunMode, SweepArgs};

pub const FORMAT_VERSION: u32 = 1;
pub const MAX_SWEEP_QUBITS: u32 = 10;

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct WallTimes {
    #[serde(flatten)]
    phases: PhaseTimes,
    query: f64,
    exact: f64,
    total: f64,
}

/// One `evolve` invocation. Everything except `wallTimes` is a function of the inputs.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct RunRecord<'a> {
    format_version: u32,
    hamiltonian: String,
    plan: &'a EvolutionPlan,
    distinct_columns: usize,
    requested_amplitudes: Vec<u64>,
    /// `[re, im]` per requested index.
    amplitudes: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_vs_exact: Option<f64>,
    wall_times: WallTimes,
}

struct Problem {
    oracle: Box<dyn RowOracle>,
    label: String,
    psi: SparseState,
    config: SimulationConfig,
}

/// Basis index, decimal or `0b`-prefixed bit string.
pub fn parse_index(raw: &str) -> Result<u64> {
    let raw = raw.trim();
    let parsed = match raw.strip_prefix("0b") {
        Some(bits) if !bits.is_empty() => u64::from_str_radix(bits, 2),
        Some(_) => "".parse(),
        None => raw.parse(),
    };
    parsed.map_err(|_| Error::Usage(format!("invalid basis index `{raw}`")))
}

fn load_hamiltonian(c: &Common, mode: Option<Mode>) -> Result<(Box<dyn RowOracle>, String)> {
    if let Some(path) = &c.hamiltonian {
        let (_, oracle) = load_coo(path, mode)?;
        return Ok((Box::new(oracle), path.display().to_string()));
    }
    let (Some(name), Some(n)) = (&c.family, c.n) else {
        return Err(Error::Usage("give --hamiltonian or --family with --n".into()));
    };
    let family: Family = name.parse()?;
    let defaults = FamilyParams::default();
    let params = FamilyParams {
        row_nnz: c.row_nnz.unwrap_or(defaults.row_nnz),
        rank: c.rank.unwrap_or(defaults.rank),
        support: c.support.or(defaults.support),
        scale: c.scale.unwrap_or(defaults.scale),
    };
    let oracle = builtin_hamiltonian(family, QubitCount::new(n)?, &params, c.family_seed)?;
    let label = format!("{family} n={n} seed={}", c.family_seed);
    Ok((oracle, label))
}

fn load_problem(c: &Common) -> Result<Problem> {
    let file_mode = c.mode.map(|m| match m {
        RunMode::Psd | RunMode::Density => Mode::Psd,
        RunMode::Hermitian => Mode::Hermitian,
    });
    let (oracle, label) = load_hamiltonian(c, file_mode)?;
    let n = oracle.qubits();
    let mode = match c.mode {
        Some(RunMode::Density) => {
            validate_density(&*oracle)?;
            Mode::Psd
        }
        Some(RunMode::Psd) => Mode::Psd,
        Some(RunMode::Hermitian) => Mode::Hermitian,
        None => oracle.mode(),
    };
    let psi = match (&c.state, &c.basis) {
        (Some(path), _) => load_state(path)?,
        (None, Some(raw)) => {
            let index = parse_index(raw)?;
            if index >= n.dim() {
                return Err(Error::Usage(format!("basis index {index} is outside 0..{}", n.dim())));
            }
            SparseState::basis(n, index)?
        }
        (None, None) => SparseState::basis(n, 0)?,
    };
    let defaults = SketchOptions::default();
    let sketch = SketchOptions {
        block_size: c.block_size.unwrap_or(defaults.block_size),
        ..defaults
    };
    if sketch.block_size == 0 {
        return Err(Error::Usage("--block-size must be positive".into()));
    }
    let config = SimulationConfig {
        mode,
        t: c.t,
        epsilon: c.eps,
        delta: c.delta,
        samples: c.samples,
        order: c.order,
        seed: c.seed,
        trace_shift: !c.no_trace_shift,
        spec_norm_bound: c.norm_bound,
        sketch,
        ..Default::default()
    };
    Ok(Problem {
        oracle,
        label,
        psi,
        config,
    })
}

fn write_output(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

pub fn evolve(args: &EvolveArgs) -> Result<()> {
    let start = Instant::now();
    let p = load_problem(&args.common)?;
    let n = p.oracle.qubits().get();
    let sim = simulate(&*p.oracle, &p.psi, &p.config)?;
    eprint!("{}", sim.plan.to_key_value());

    let clock = Instant::now();
    let mut dense = None;
    let (requested, values) = if args.full_state {
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Usage(format!("--full-state needs n ≤ {MAX_DENSE_QUBITS}, got {n}")));
        }
        let state = sim.dense_state()?;
        dense = Some(state.clone());
        ((0..state.len() as u64).collect(), state)
    } else {
        let requested: Vec<u64> = if args.amplitude.is_empty() {
            p.psi.entries().iter().map(|e| e.0).collect()
        } else {
            args.amplitude.iter().map(|s| parse_index(s)).collect::<Result<_>>()?
        };
        let values = sim.amplitudes(&requested)?;
        (requested, values)
    };
    let query = ms(clock);

    let clock = Instant::now();
    let error_vs_exact = if args.exact && n <= MAX_EXACT_QUBITS {
        let approx = match dense {
            Some(d) => d,
            None => sim.dense_state()?,
        };
        let reference = DenseHermitian::from_oracle(&*p.oracle)?.propagator()?.apply(&p.psi.to_dense(), p.config.t)?;
        Some(state_distance(&approx, &reference))
    } else {
        if args.exact {
            log::warn!("--exact needs n ≤ {MAX_EXACT_QUBITS}; skipping the comparison at n = {n}");
        }
        None
    };
    let exact = ms(clock);

    let record = RunRecord {
        format_version: FORMAT_VERSION,
        hamiltonian: p.label,
        plan: &sim.plan,
        distinct_columns: sim.distinct_columns,
        requested_amplitudes: requested,
        amplitudes: values.iter().map(|a| [a.re, a.im]).collect(),
        error_vs_exact,
        wall_times: WallTimes {
            phases: sim.times.clone(),
            query,
            exact,
            total: ms(start),
        },
    };
    let mut body = serde_json::to_string_pretty(&record).map_err(|e| Error::Numerical {
        context: format!("serializing the run record: {e}"),
    })?;
    body.push('\n');
    write_output(args.common.out.as_deref(), &body)
}

/// `steps` points from `a` to `b` inclusive.
pub fn parse_grid(raw: &str, scale: GridScale) -> Result<Vec<f64>> {
    let bad = || Error::Usage(format!("--grid must read `a:b:steps`, got `{raw}`"));
    let parts: Vec<&str> = raw.split(':').collect();
    let [a, b, steps] = parts[..] else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    if steps == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if steps == 1 {
        return Ok(vec![a]);
    }
    let frac = |k: usize| k as f64 / (steps - 1) as f64;
    match scale {
        GridScale::Lin => Ok((0..steps).map(|k| a + (b - a) * frac(k)).collect()),
        GridScale::Log => {
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::Usage("a log grid needs positive endpoints".into()));
            }
            let (la, lb) = (a.ln(), b.ln());
            Ok((0..steps).map(|k| (la + (lb - la) * frac(k)).exp()).collect())
        }
    }
}

/// Grid values for an axis; integer axes are rounded, deduplicated and at least 1.
pub fn axis_values(axis: Axis, grid: &[f64]) -> Vec<f64> {
    match axis {
        Axis::Time => grid.to_vec(),
        Axis::Samples | Axis::Order => {
            let mut out: Vec<f64> = Vec::with_capacity(grid.len());
            for v in grid.iter().map(|v| v.round().max(1.0)) {
                if out.last() != Some(&v) {
                    out.push(v);
                }
            }
            out
        }
    }
}

/// Linear interpolation between order statistics of a sorted sample.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

struct SweepRow {
    value: f64,
    errors: Vec<f64>,
    wall_ms: f64,
}

fn sweep_point(
    p: &Problem,
    propagator: &Propagator,
    psi_dense: &[Complex64],
    axis: Axis,
    value: f64,
    trials: u64,
) -> Result<SweepRow> {
    let clock = Instant::now();
    let mut config = p.config.clone();
    match axis {
        Axis::Samples => config.samples = Some(value as usize),
        Axis::Order => config.order = Some(value as usize),
        Axis::Time => config.t = value,
    }
    let reference = propagator.apply(psi_dense, config.t)?;
    let mut errors = (0..trials)
        .map(|r| {
            let trial = SimulationConfig {
                seed: p.config.seed.wrapping_add(r),
                ..config.clone()
            };
            let sim = simulate(&*p.oracle, &p.psi, &trial)?;
            Ok(state_distance(&sim.dense_state()?, &reference))
        })
        .collect::<Result<Vec<f64>>>()?;
    errors.sort_by(f64::total_cmp);
    Ok(SweepRow {
        value,
        errors,
        wall_ms: ms(clock),
    })
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    if args.trials == 0 {
        return Err(Error::Usage("--trials must be positive".into()));
    }
    let p = load_problem(&args.common)?;
    let n = p.oracle.qubits().get();
    if n > MAX_SWEEP_QUBITS {
        return Err(Error::Usage(format!("sweeps compare against exact evolution and need n ≤ {MAX_SWEEP_QUBITS}, got {n}")));
    }
    let scale = args.grid_scale.unwrap_or(match args.sweep {
        Axis::Samples => GridScale::Log,
        Axis::Order | Axis::Time => GridScale::Lin,
    });
    let values = axis_values(args.sweep, &parse_grid(&args.grid, scale)?);
    let propagator = DenseHermitian::from_oracle(&*p.oracle)?.propagator()?;
    let psi_dense = p.psi.to_dense();

    let rows = values
        .par_iter()
        .map(|&v| sweep_point(&p, &propagator, &psi_dense, args.sweep, v, args.trials))
        .collect::<Result<Vec<_>>>()?;

    let mut body = String::from("axisValue,seedCount,medianError,q10,q90,wallMs\n");
    for row in &rows {
        body.push_str(&format!(
            "{},{},{:e},{:e},{:e},{:.3}\n",
            row.value,
            row.errors.len(),
            quantile(&row.errors, 0.5),
            quantile(&row.errors, 0.1),
            quantile(&row.errors, 0.9),
            row.wall_ms
        ));
    }
    write_output(args.common.out.as_deref(), &body)
}
