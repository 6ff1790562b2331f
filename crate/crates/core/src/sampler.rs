//! Row sampling by binary descent over prefix marginals.
//!
//! A draw picks `q` uniformly in `[0, w({0,1}ⁿ))` and walks `n` levels of the
//! prefix tree: it appends 0 when `q < w(L‖0)`, otherwise appends 1 and
//! subtracts `w(L‖0)`. Each draw costs exactly `n` marginal evaluations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{Mode, Prefix, RowOracle, WeightKind};

/// Levels beyond which the running remainder is kept in compensated form.
const COMPENSATE_ABOVE: u32 = 30;

/// `M` row indices drawn independently with repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub kind: WeightKind,
    pub indices: Vec<u64>,
    /// `p(t_j) = h(t_j) / totalWeight` for each draw.
    pub probabilities: Vec<f64>,
    pub total_weight: f64,
    pub seed: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// The RNG stream used for draw `index` of a batch seeded with `seed`.
pub fn draw_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn check_kind<O: RowOracle + ?Sized>(oracle: &O, kind: WeightKind) -> Result<()> {
    if kind == WeightKind::Diagonal && oracle.mode() != Mode::Psd {
        return Err(Error::Usage(
            "diagonal sampling weights require a psd oracle".into(),
        ));
    }
    Ok(())
}

/// Total weight, which must be finite and positive.
pub fn total_weight<O: RowOracle + ?Sized>(oracle: &O, kind: WeightKind) -> Result<f64> {
    check_kind(oracle, kind)?;
    let total = oracle.total_weight(kind);
    if total.is_finite() && total > 0.0 {
        Ok(total)
    } else {
        Err(Error::DegenerateWeight(total))
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Deterministic descent for a given `q ∈ [0, total)`.
///
/// Returns the leaf index and its probability `h(leaf)/total`.
pub fn descend<O: RowOracle + ?Sized>(
    oracle: &O,
    kind: WeightKind,
    total: f64,
    q: f64,
) -> Result<(u64, f64)> {
    let n = oracle.qubits().get();
    let compensate = n > COMPENSATE_ABOVE;
    let mut prefix = Prefix::EMPTY;
    let (mut q_hi, mut q_lo) = (q, 0.0f64);
    let mut node = total;
    for _ in 0..n {
        let left_prefix = prefix.child(0);
        let left = oracle.marginal(left_prefix, kind);
        if !(left.is_finite() && left >= 0.0) {
            return Err(Error::OracleFault {
                prefix_len: left_prefix.len(),
                value: left,
            });
        }
        let right = node - left;
        if q_hi + q_lo < left || (right <= 0.0 && left > 0.0) {
            prefix = left_prefix;
            node = left;
        } else {
            prefix = prefix.child(1);
            node = right;
            if compensate {
                let (s, e) = two_sum(q_hi, -left);
                q_hi = s;
                q_lo += e;
            } else {
                q_hi -= left;
            }
        }
    }
    let index = prefix.bits();
    let weight = oracle.weight(index, kind);
    if !(weight.is_finite() && weight > 0.0) {
        return Err(Error::OracleFault {
            prefix_len: n,
            value: weight,
        });
    }
    Ok((index, weight / total))
}

/// One draw with `q` uniform in `[0, totalWeight)`.
pub fn sample_prefix_descent<O: RowOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    kind: WeightKind,
    rng: &mut R,
) -> Result<(u64, f64)> {
    let total = total_weight(oracle, kind)?;
    let q = rng.random::<f64>() * total;
    descend(oracle, kind, total, q)
}

/// `m` independent draws; draw `k` uses stream `k` of the seeded generator, so
/// the batch is identical regardless of thread scheduling.
pub fn draw_batch<O: RowOracle + ?Sized>(
    oracle: &O,
    kind: WeightKind,
    m: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if m == 0 {
        return Err(Error::Usage("sample count must be at least 1".into()));
    }
    let total = total_weight(oracle, kind)?;
    let draws: Vec<(u64, f64)> = (0..m as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = draw_rng(seed, k);
            let q = rng.random::<f64>() * total;
            descend(oracle, kind, total, q)
        })
        .collect::<Result<_>>()?;
    let (indices, probabilities) = draws.into_iter().unzip();
    Ok(SampleBatch {
        kind,
        indices,
        probabilities,
        total_weight: total,
        seed,
    })
}
