//! Truncated series for the split `e^{ix} = 1 + ix + f(x²)x² + i g(x²)x³`, with
//! `f(y) = (cos√y − 1)/y` and `g(y) = (sin√y − √y)/y^{3/2}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// `f_K(y) = Σ_{j=0}^{K} (−1)^{j+1} y^j / (2j+2)!`
    F,
    /// `g_K(y) = Σ_{j=0}^{K} (−1)^{j+1} y^j / (2j+3)!`
    G,
}

/// Coefficients of `f_K` or `g_K`, kept as unevaluated double-double pairs so
/// the scalar evaluator is not limited by coefficient rounding.
#[derive(Debug, Clone)]
pub struct TruncatedSeries {
    pub kind: SeriesKind,
    pub order: usize,
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl TruncatedSeries {
    pub fn new(kind: SeriesKind, order: usize) -> Self {
        let (first, offset) = match kind {
            SeriesKind::F => (2.0, 3.0),
            SeriesKind::G => (6.0, 4.0),
        };
        let mut hi = Vec::with_capacity(order + 1);
        let mut lo = Vec::with_capacity(order + 1);
        // c_0 = −1/first, then c_{j+1} = −c_j / ((2j+offset)(2j+offset+1)).
        let (mut h, mut l) = div_dd(-1.0, 0.0, first);
        for j in 0..=order {
            hi.push(h);
            lo.push(l);
            let a = 2.0 * j as f64 + offset;
            let (h1, l1) = div_dd(-h, -l, a);
            let (h2, l2) = div_dd(h1, l1, a + 1.0);
            h = h2;
            l = l2;
        }
        TruncatedSeries { kind, order, hi, lo }
    }

    pub fn f(order: usize) -> Self {
        Self::new(SeriesKind::F, order)
    }

    pub fn g(order: usize) -> Self {
        Self::new(SeriesKind::G, order)
    }

    /// Coefficients rounded to double precision.
    pub fn coefficients(&self) -> &[f64] {
        &self.hi
    }

    /// Scalar value at `y` by compensated Horner evaluation.
    pub fn eval_scalar(&self, y: f64) -> f64 {
        let k = self.order;
        let mut s = self.hi[k];
        let mut err = self.lo[k];
        for j in (0..k).rev() {
            let (p, pi) = two_prod(s, y);
            let (s2, sigma) = two_sum(p, self.hi[j]);
            s = s2;
            err = err * y + (pi + sigma + self.lo[j]);
        }
        s + err
    }

    /// Horner evaluation on a matrix: `r ← c_K x`, then `r ← By·r + c_j x` for
    /// `j = K−1..0`. Exactly `K` matrix-vector products.
    pub fn eval_matrix(&self, by: &CMatrix, x: &CVector) -> Result<CVector> {
        if by.nrows() != by.ncols() || by.ncols() != x.len() {
            return Err(Error::Usage(format!(
                "series evaluation: {}x{} matrix against length-{} vector",
                by.nrows(),
                by.ncols(),
                x.len()
            )));
        }
        let c = |j: usize| Complex64::new(self.hi[j], 0.0);
        let mut r = x * c(self.order);
        for j in (0..self.order).rev() {
            r = by * &r + x * c(j);
            if !all_finite(r.iter().copied()) {
                return Err(Error::numerical(format!(
                    "{:?}_K Horner term {j}",
                    self.kind
                )));
            }
        }
        Ok(r)
    }
}

/// Reference `f(y)`, stable near zero.
pub fn f_exact(y: f64) -> f64 {
    if y == 0.0 {
        return -0.5;
    }
    let r = y.sqrt();
    -2.0 * (r / 2.0).sin().powi(2) / y
}

/// Reference `g(y)`.
pub fn g_exact(y: f64) -> f64 {
    if y < 1e-4 {
        // −1/6 + y/120 − y²/5040 + …
        return -1.0 / 6.0 + y / 120.0 - y * y / 5040.0 + y * y * y / 362_880.0;
    }
    let r = y.sqrt();
    (r.sin() - r) / (y * r)
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `(hi + lo) / d` for an exactly representable `d`.
fn div_dd(hi: f64, lo: f64, d: f64) -> (f64, f64) {
    let q = hi / d;
    let r = (-q).mul_add(d, hi);
    let q_lo = (r + lo) / d;
    two_sum(q, q_lo)
}
