//! Sparse continuous-time generators and their semigroups by uniformization.
//!
//! `e^{tQ} = Σ_m Poisson(Λt)(m) P^m` with `P = I + Q/Λ`. Long horizons are
//! split into chunks of Poisson mean at most [`CHUNK_MEAN`] so the leading
//! weight `e^{-Λτ}` never underflows.

use crate::error::{Error, Result};

/// Poisson mean handled in one uniformization sweep.
pub const CHUNK_MEAN: f64 = 32.0;

/// Largest total Poisson mean `Λt` accepted in exact mode.
pub const MAX_UNIFORMIZATION_MEAN: f64 = 2.0e6;

/// Generator in compressed sparse row form; the diagonal is stored apart.
#[derive(Debug, Clone)]
pub struct SparseGenerator {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    rates: Vec<f64>,
    diag: Vec<f64>,
}

impl SparseGenerator {
    /// Builds a generator from per-row off-diagonal rates. Duplicate columns
    /// are merged and self-loops dropped.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut rates = Vec::new();
        let mut diag = Vec::with_capacity(n);
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.retain(|&(j, r)| j != i && r != 0.0);
            row.sort_by_key(|&(j, _)| j);
            let mut exit = 0.0;
            let mut last: Option<usize> = None;
            for (j, r) in row {
                if j >= n {
                    return Err(Error::InvalidArgument(format!("column {j} out of range {n}")));
                }
                if !(r.is_finite() && r > 0.0) {
                    return Err(Error::InvalidArgument(format!("rate {r} at ({i}, {j})")));
                }
                exit += r;
                if last == Some(j) {
                    *rates.last_mut().unwrap() += r;
                } else {
                    cols.push(j);
                    rates.push(r);
                    last = Some(j);
                }
            }
            diag.push(-exit);
            row_ptr.push(cols.len());
        }
        Ok(Self { row_ptr, cols, rates, diag })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Entry `Q(i, j)`, including the diagonal.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, r)| r)
    }

    /// Off-diagonal entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[lo..hi].iter().copied().zip(self.rates[lo..hi].iter().copied())
    }

    pub fn exit_rate(&self, i: usize) -> f64 {
        -self.diag[i]
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, d| m.max(-d))
    }

    /// Largest `|Q(i,j) − Q(j,i)|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            for (j, r) in self.row(i) {
                worst = worst.max((r - self.rate(j, i)).abs());
            }
        }
        worst
    }

    /// `(Qv)(i) = Σ_j Q(i,j) v(j)`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.len() {
            let mut acc = self.diag[i] * v[i];
            for (j, r) in self.row(i) {
                acc += r * v[j];
            }
            out[i] = acc;
        }
    }

    /// `(pQ)(j) = Σ_i p(i) Q(i,j)`.
    pub fn apply_transpose(&self, p: &[f64], out: &mut [f64]) {
        for (o, (d, x)) in out.iter_mut().zip(self.diag.iter().zip(p)) {
            *o = d * x;
        }
        for (i, &pi) in p.iter().enumerate().take(self.len()) {
            if pi == 0.0 {
                continue;
            }
            for (j, r) in self.row(i) {
                out[j] += pi * r;
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = self.diag[i];
            for (j, r) in self.row(i) {
                row[j] = r;
            }
        }
        m
    }
}

/// Which side of the semigroup to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `e^{tQ} v`: expectations of an observable `v`.
    Backward,
    /// `p e^{tQ}`: law at time `t` from initial law `p`.
    Forward,
}

/// A generator paired with a uniformization constant `Λ ≥ max exit rate`.
#[derive(Debug, Clone)]
pub struct Uniformizer {
    generator: SparseGenerator,
    lambda: f64,
}

impl Uniformizer {
    pub fn new(generator: SparseGenerator, lambda: f64) -> Result<Self> {
        let needed = generator.max_exit_rate();
        if !(lambda.is_finite() && lambda > 0.0 && lambda >= needed) {
            return Err(Error::InvalidArgument(format!(
                "uniformization constant {lambda} below max exit rate {needed}"
            )));
        }
        Ok(Self { generator, lambda })
    }

    pub fn with_max_exit(generator: SparseGenerator) -> Result<Self> {
        let lambda = generator.max_exit_rate().max(f64::MIN_POSITIVE);
        Self::new(generator, lambda)
    }

    pub fn generator(&self) -> &SparseGenerator {
        &self.generator
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Apply `e^{tQ}` to `v` with total Poisson-tail truncation at most `tol`.
    pub fn propagate(&self, v: &[f64], t: f64, tol: f64, dir: Direction) -> Result<Vec<f64>> {
        if v.len() != self.generator.len() {
            return Err(Error::LengthMismatch { expected: self.generator.len(), got: v.len() });
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time {t} must be finite and nonnegative")));
        }
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
        }
        let mean = self.lambda * t;
        if mean > MAX_UNIFORMIZATION_MEAN {
            return Err(Error::TruncationCap { mean, cap: MAX_UNIFORMIZATION_MEAN });
        }
        if t == 0.0 {
            return Ok(v.to_vec());
        }
        let chunks = (mean / CHUNK_MEAN).ceil().max(1.0) as usize;
        let chunk_mean = mean / chunks as f64;
        let chunk_tol = tol / chunks as f64;
        let mut state = v.to_vec();
        let mut scratch = Workspace::new(v.len());
        for _ in 0..chunks {
            self.poisson_mix(&mut state, chunk_mean, chunk_tol, dir, &mut scratch);
        }
        Ok(state)
    }

    fn step(&self, term: &[f64], out: &mut [f64], dir: Direction) {
        match dir {
            Direction::Backward => self.generator.apply(term, out),
            Direction::Forward => self.generator.apply_transpose(term, out),
        }
        let inv = 1.0 / self.lambda;
        for (o, t) in out.iter_mut().zip(term) {
            *o = t + inv * *o;
        }
    }

    fn poisson_mix(&self, state: &mut [f64], mean: f64, tol: f64, dir: Direction, ws: &mut Workspace) {
        let mut weight = (-mean).exp();
        let mut cumulative = weight;
        ws.term.copy_from_slice(state);
        for (s, t) in state.iter_mut().zip(&ws.term) {
            *s = weight * t;
        }
        let mut m = 0usize;
        loop {
            let past_mode = m as f64 >= mean;
            if past_mode && (1.0 - cumulative <= tol || weight < 1e-300) {
                break;
            }
            // rounding floor on the cumulative weight
            if past_mode && weight < tol * 1e-6 {
                break;
            }
            m += 1;
            self.step(&ws.term, &mut ws.next, dir);
            std::mem::swap(&mut ws.term, &mut ws.next);
            weight *= mean / m as f64;
            cumulative += weight;
            for (s, t) in state.iter_mut().zip(&ws.term) {
                *s += weight * t;
            }
        }
    }
}

struct Workspace {
    term: Vec<f64>,
    next: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self { term: vec![0.0; n], next: vec![0.0; n] }
    }
}
