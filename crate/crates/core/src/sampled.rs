//! Functions sampled on a uniform time grid `t_i = i h`, with trapezoidal
//! convolution and quadrature.

use crate::error::{Error, Result};

/// Uniform grid `0, h, 2h, ..., (len−1) h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    step: f64,
    len: usize,
}

impl TimeGrid {
    /// Grid of step `step` reaching `horizon` (rounded to the nearest multiple).
    pub fn new(step: f64, horizon: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::GridMismatch(format!("step {step} must be positive")));
        }
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::GridMismatch(format!("horizon {horizon} must be nonnegative")));
        }
        let intervals = (horizon / step).round() as usize;
        Ok(Self { step, len: intervals + 1 })
    }

    pub fn with_len(step: f64, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::GridMismatch("empty grid".into()));
        }
        let g = Self::new(step, 0.0)?;
        Ok(Self { len, ..g })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.time(i))
    }

    /// Index of `t`, which must sit on the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.step;
        let i = x.round();
        if (x - i).abs() > 1e-9 * x.abs().max(1.0) || i < 0.0 || i as usize >= self.len {
            return Err(Error::GridMismatch(format!(
                "time {t} is not a point of the grid (step {}, horizon {})",
                self.step,
                self.horizon()
            )));
        }
        Ok(i as usize)
    }

    fn same_as(&self, other: &TimeGrid) -> bool {
        self.len == other.len && (self.step - other.step).abs() <= 1e-15 * self.step
    }
}

/// Values of a scalar function on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("sampled value is not finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, mut f: impl FnMut(f64) -> Result<f64>) -> Result<Self> {
        let values = grid.times().map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.grid.index_of(t)?])
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * factor).collect() }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn check_same_grid(&self, other: &SampledFunction) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "grids differ: ({}, {}) vs ({}, {})",
                self.grid.step, self.grid.len, other.grid.step, other.grid.len
            )))
        }
    }

    /// Trapezoidal `(a ∗ b)(t_n) = ∫_0^{t_n} a(s) b(t_n − s) ds` at every grid point.
    pub fn convolve(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.check_same_grid(other)?;
        let (a, b) = (&self.values, &other.values);
        let h = self.grid.step;
        let values = (0..a.len())
            .map(|n| {
                if n == 0 {
                    return 0.0;
                }
                let inner: f64 = (1..n).map(|j| a[j] * b[n - j]).sum();
                h * (0.5 * a[0] * b[n] + inner + 0.5 * a[n] * b[0])
            })
            .collect();
        Ok(SampledFunction { grid: self.grid, values })
    }

    /// Fourth-order `(a ∗ b)(t_n)`: Simpson's rule when `n` is even, the 3/8
    /// rule on the first three intervals and Simpson on the rest when `n` is
    /// odd, trapezoid at `n = 1`.
    pub fn convolve_simpson(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.check_same_grid(other)?;
        let (a, b) = (&self.values, &other.values);
        let h = self.grid.step;
        let values = (0..a.len())
            .map(|n| {
                let term = |j: usize| a[j] * b[n - j];
                match n {
                    0 => 0.0,
                    1 => 0.5 * h * (term(0) + term(1)),
                    _ => {
                        let (mut sum, start) = if n % 2 == 1 {
                            (3.0 * h / 8.0 * (term(0) + 3.0 * term(1) + 3.0 * term(2) + term(3)), 3)
                        } else {
                            (0.0, 0)
                        };
                        if start < n {
                            let mut s = term(start) + term(n);
                            for j in start + 1..n {
                                s += if (j - start) % 2 == 1 { 4.0 } else { 2.0 } * term(j);
                            }
                            sum += h / 3.0 * s;
                        }
                        sum
                    }
                }
            })
            .collect();
        Ok(SampledFunction { grid: self.grid, values })
    }

    /// Trapezoidal integral over the whole grid.
    pub fn integral(&self) -> f64 {
        let v = &self.values;
        if v.len() < 2 {
            return 0.0;
        }
        let inner: f64 = v[1..v.len() - 1].iter().sum();
        self.grid.step * (0.5 * v[0] + inner + 0.5 * v[v.len() - 1])
    }

    /// `∫_{t_i}^{T} f` for every grid index `i` (trapezoidal, cumulative from the right).
    pub fn tail_integrals(&self) -> Vec<f64> {
        let h = self.grid.step;
        let mut out = vec![0.0; self.values.len()];
        for i in (0..self.values.len().saturating_sub(1)).rev() {
            out[i] = out[i + 1] + 0.5 * h * (self.values[i] + self.values[i + 1]);
        }
        out
    }
}

/// Composite Simpson rule for `f` on `[a, b]` with `intervals` (rounded up to even).
pub fn simpson(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals.max(2) + intervals % 2;
    let h = (b - a) / m as f64;
    let mut sum = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}
