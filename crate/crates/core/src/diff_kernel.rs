//! Difference process of two coupled walks and the scalar functions built
//! from its kernel.
//!
//! The difference `Z = X − Y` of the coupled walks is a random walk on the
//! torus whose bonds at the origin are slowed down:
//!
//! * from `0`: rate 1/2 to each of the `2d` neighbours;
//! * from `z` with `|z| = 1`: rate 1/2 to `0`, rate 1/4 to `−z`, rate 1 to
//!   every other neighbour;
//! * elsewhere: rate 1 to each neighbour.
//!
//! With `S_t = e^{tA}` and `e` a unit vector, `u(t) = S_t(0,0) − S_t(e,0)`
//! solves the renewal equation `u = g + u ∗ f` where `f` and `g` only involve
//! the one-dimensional kernel `p_t`.

use crate::error::{Error, Result};
use crate::heat::{g_from_kernel, kernel_1d_values, SpectralData, NEGATIVE_CLAMP};
use crate::markov::{Direction, SparseGenerator, Uniformizer};
use crate::sampled::{SampledFunction, TimeGrid};
use crate::torus::TorusSpec;

/// Default Poisson-tail tolerance for exact kernels.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Largest pair state space `N^{2d}` handled exactly.
pub const PAIR_STATE_CAP: usize = 10_000;

/// Largest number of convolution powers summed by [`series_sum`].
pub const DEFAULT_SERIES_CAP: usize = 2_000;

/// Tolerance on the sup norm of the last series term.
pub const SERIES_TOL: f64 = 1e-10;

/// Generator `A = A₀ + R` of the difference process.
#[derive(Debug, Clone)]
pub struct DefectGenerator {
    spec: TorusSpec,
    uniformizer: Uniformizer,
}

/// Builds the difference-process generator; requires `N ≥ 4`.
pub fn build_generator(spec: TorusSpec) -> Result<DefectGenerator> {
    if spec.side() < 4 {
        return Err(Error::InvalidSpec {
            d: spec.dim(),
            n: spec.side(),
            reason: "difference process needs N >= 4 so that -z and 2z differ",
        });
    }
    let rows = (0..spec.volume())
        .map(|z| {
            if z == 0 {
                spec.neighbors_of(0).map(|w| (w, 0.5)).collect()
            } else if spec.norm1(z) == 1 {
                let minus = spec.negate(z);
                let mut row: Vec<(usize, f64)> = vec![(minus, 0.25)];
                for w in spec.neighbors_of(z) {
                    row.push((w, if w == 0 { 0.5 } else { 1.0 }));
                }
                row
            } else {
                spec.neighbors_of(z).map(|w| (w, 1.0)).collect()
            }
        })
        .collect();
    let generator = SparseGenerator::from_rows(rows)?;
    let lambda = 2.0 * spec.dim() as f64;
    Ok(DefectGenerator { spec, uniformizer: Uniformizer::new(generator, lambda)? })
}

impl DefectGenerator {
    pub fn spec(&self) -> TorusSpec {
        self.spec
    }

    pub fn matrix(&self) -> &SparseGenerator {
        self.uniformizer.generator()
    }

    /// Uniformization constant `Λ = 2d`.
    pub fn lambda(&self) -> f64 {
        self.uniformizer.lambda()
    }

    fn origin(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.spec.volume()];
        v[0] = 1.0;
        v
    }
}

/// A probability vector `S_t(·, 0)` over the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelVector {
    pub t: f64,
    pub values: Vec<f64>,
}

/// `S_t(·, 0)` by uniformization; `tol` bounds the discarded Poisson tail.
pub fn kernel_vector(gen: &DefectGenerator, t: f64, tol: f64) -> Result<KernelVector> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} outside (0, 1e-6]")));
    }
    let values = gen.uniformizer.propagate(&gen.origin(), t, tol, Direction::Backward)?;
    Ok(KernelVector { t, values })
}

/// `S_t(·, 0)` at every point of `grid`, stepping the semigroup forward.
pub fn kernel_path(gen: &DefectGenerator, grid: TimeGrid, tol: f64) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(grid.len());
    let mut v = gen.origin();
    let per_step = tol / grid.len() as f64;
    out.push(v.clone());
    for _ in 1..grid.len() {
        v = gen.uniformizer.propagate(&v, grid.step(), per_step, Direction::Backward)?;
        out.push(v.clone());
    }
    Ok(out)
}

/// `u(t) = S_t(0,0) − S_t(e,0)` on `grid`, from the exact kernel.
pub fn u_exact(grid: TimeGrid, spec: TorusSpec, tol: f64) -> Result<SampledFunction> {
    let gen = build_generator(spec)?;
    let e = spec.unit(0, true);
    let values = kernel_path(&gen, grid, tol)?.iter().map(|s| s[0] - s[e]).collect();
    SampledFunction::new(grid, values)
}

/// `S_t(0,0)` on `grid`, from the exact kernel.
pub fn return_probability(grid: TimeGrid, spec: TorusSpec, tol: f64) -> Result<SampledFunction> {
    let gen = build_generator(spec)?;
    let values = kernel_path(&gen, grid, tol)?.iter().map(|s| s[0]).collect();
    SampledFunction::new(grid, values)
}

/// Generator `A₀` of the free difference walk (rate 1 to each neighbour).
pub fn free_generator(spec: TorusSpec) -> Result<SparseGenerator> {
    let rows = (0..spec.volume()).map(|z| spec.neighbors_of(z).map(|w| (w, 1.0)).collect()).collect();
    SparseGenerator::from_rows(rows)
}

/// `S⁰_t(x, 0) = Π_ℓ p_t(x_ℓ)` for every `x`.
pub fn free_kernel_vector(t: f64, spec: TorusSpec) -> Result<KernelVector> {
    let p = kernel_1d_values(t, spec.side())?;
    let values = (0..spec.volume())
        .map(|x| (0..spec.dim()).map(|axis| p[spec.coord(x, axis)]).product())
        .collect();
    Ok(KernelVector { t, values })
}

/// `sup_{s ≤ t} e^{s f(s)} g(t)` at every grid point: the constructive lower
/// bound on `u`.
pub fn lower_bound_chain(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    f.check_same_grid(g)?;
    let grid = f.grid();
    let mut best = f64::NEG_INFINITY;
    let values = grid
        .times()
        .zip(f.values().iter().zip(g.values()))
        .map(|(s, (fs, gt))| {
            best = best.max(s * fs);
            best.exp() * gt
        })
        .collect();
    SampledFunction::new(grid, values)
}

/// `(f(t), g(t))` from the one-dimensional kernel.
pub fn f_g_closed(t: f64, spec: TorusSpec) -> Result<(f64, f64)> {
    let p = kernel_1d_values(t, spec.side())?;
    let d = spec.dim();
    let g = g_from_kernel(&p, d);
    let (p0, p1, p2) = (p[0], p[1], p[2]);
    let f = if d == 1 {
        1.5 * p0 - 2.0 * p1 + 0.5 * p2
    } else {
        let d = d as f64;
        p0.powi(spec.dim() as i32 - 2)
            * (d * (p0 - p1).powi(2) + 0.5 * (p0 * p0 - 2.0 * p1 * p1 + p0 * p2))
    };
    // both are nonnegative; cancellation leaves rounding noise once p is flat
    Ok((clamp_rounding(f)?, clamp_rounding(g)?))
}

fn clamp_rounding(v: f64) -> Result<f64> {
    if v < -NEGATIVE_CLAMP {
        return Err(Error::Numerical(format!("value {v:e} is negative beyond rounding")));
    }
    Ok(v.max(0.0))
}

/// `f` and `g` sampled on `grid`.
pub fn f_g_sampled(grid: TimeGrid, spec: TorusSpec) -> Result<(SampledFunction, SampledFunction)> {
    let pairs = grid.times().map(|t| f_g_closed(t, spec)).collect::<Result<Vec<_>>>()?;
    let (f, g): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok((SampledFunction::new(grid, f)?, SampledFunction::new(grid, g)?))
}

/// Trapezoidal solution of `u(t) = g(t) + ∫_0^t u(s) f(t−s) ds`.
pub fn renewal_solve(g: &SampledFunction, f: &SampledFunction) -> Result<SampledFunction> {
    g.check_same_grid(f)?;
    let grid = g.grid();
    let h = grid.step();
    let (gv, fv) = (g.values(), f.values());
    if gv.iter().chain(fv).any(|v| *v < 0.0) {
        return Err(Error::InvalidArgument("renewal inputs must be nonnegative".into()));
    }
    let denom = 1.0 - 0.5 * h * fv[0];
    if denom <= 0.0 {
        return Err(Error::Divergence(format!("step {h} too coarse for f(0) = {}", fv[0])));
    }
    let cap = 10.0 * g.sup_norm() * (fv[0] * grid.horizon()).exp();
    let mut u = Vec::with_capacity(grid.len());
    u.push(gv[0]);
    for n in 1..grid.len() {
        let memory: f64 = (1..n).map(|j| u[j] * fv[n - j]).sum();
        let value = (gv[n] + h * (0.5 * u[0] * fv[n] + memory)) / denom;
        if !value.is_finite() || value.abs() > cap {
            return Err(Error::Divergence(format!("|u| exceeded {cap:.3e} at t = {}", grid.time(n))));
        }
        u.push(value);
    }
    SampledFunction::new(grid, u)
}

/// `Σ_{k=1}^{K} g̃^{∗k}` with exactly `terms` convolution powers.
pub fn series_partial_sum(g_tilde: &SampledFunction, terms: usize) -> Result<SampledFunction> {
    if terms == 0 {
        return Err(Error::InvalidArgument("need at least one term".into()));
    }
    let mut power = g_tilde.clone();
    let mut acc = g_tilde.values().to_vec();
    for _ in 1..terms {
        power = g_tilde.convolve(&power)?;
        acc.iter_mut().zip(power.values()).for_each(|(a, p)| *a += p);
    }
    SampledFunction::new(g_tilde.grid(), acc)
}

/// Result of an adaptively truncated convolution series.
#[derive(Debug, Clone)]
pub struct SeriesSum {
    pub values: SampledFunction,
    /// Number of convolution powers summed.
    pub terms: usize,
    /// Sup norm of the last term included.
    pub last_term_sup: f64,
}

/// `Σ_{k≥1} g̃^{∗k}`, stopping once a term's sup norm drops below
/// [`SERIES_TOL`]; fails after `cap` terms.
pub fn series_sum(g_tilde: &SampledFunction, cap: usize) -> Result<SeriesSum> {
    if g_tilde.values().iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidArgument("series input must be nonnegative".into()));
    }
    let mut power = g_tilde.clone();
    let mut acc = g_tilde.values().to_vec();
    let mut terms = 1;
    let mut last = power.sup_norm();
    while last >= SERIES_TOL {
        if terms >= cap {
            return Err(Error::SeriesCap(cap));
        }
        power = g_tilde.convolve(&power)?;
        acc.iter_mut().zip(power.values()).for_each(|(a, p)| *a += p);
        terms += 1;
        last = power.sup_norm();
    }
    Ok(SeriesSum { values: SampledFunction::new(g_tilde.grid(), acc)?, terms, last_term_sup: last })
}

/// `∫_0^∞ g` by Simpson quadrature on `[0, T]` plus the exponential tail
/// `g(T) t_rel / 2`. Should equal `(N^d − 1) / (2d N^d)`.
pub fn g_integral(spec: TorusSpec) -> Result<f64> {
    let t_rel = SpectralData::new(spec.side())?.t_rel();
    let horizon = (20.0 * t_rel).max(32.0);
    let intervals = (horizon * 64.0).ceil() as usize;
    let mut err = None;
    let body = crate::sampled::simpson(
        |t| match f_g_closed(t, spec) {
            Ok((_, g)) => g,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        0.0,
        horizon,
        intervals,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let tail = f_g_closed(horizon, spec)?.1 * t_rel / 2.0;
    Ok(body + tail)
}

/// Two coupled walks on the torus, as a chain on ordered pairs `x N^d + y`.
///
/// When an edge rings, each walker on one of its endpoints crosses it with
/// probability 1/2, independently of the other.
#[derive(Debug, Clone)]
pub struct CoupledWalks {
    spec: TorusSpec,
    uniformizer: Uniformizer,
}

impl CoupledWalks {
    pub fn new(spec: TorusSpec) -> Result<Self> {
        let v = spec.volume();
        let size = v as u128 * v as u128;
        if size > PAIR_STATE_CAP as u128 {
            return Err(Error::StateSpaceTooLarge { size, cap: PAIR_STATE_CAP as u128 });
        }
        let edges = spec.edges();
        let moves = |p: usize, a: usize, b: usize| -> [(usize, f64); 2] {
            if p == a {
                [(a, 0.5), (b, 0.5)]
            } else if p == b {
                [(b, 0.5), (a, 0.5)]
            } else {
                [(p, 1.0), (p, 0.0)]
            }
        };
        let mut rows = Vec::with_capacity(v * v);
        for x in 0..v {
            for y in 0..v {
                let mut row = Vec::new();
                for &(a, b) in &edges {
                    if x != a && x != b && y != a && y != b {
                        continue;
                    }
                    for (x2, px) in moves(x, a, b) {
                        for (y2, py) in moves(y, a, b) {
                            let r = px * py;
                            if r > 0.0 && (x2, y2) != (x, y) {
                                row.push((x2 * v + y2, r));
                            }
                        }
                    }
                }
                rows.push(row);
            }
        }
        let uniformizer = Uniformizer::with_max_exit(SparseGenerator::from_rows(rows)?)?;
        Ok(Self { spec, uniformizer })
    }

    pub fn spec(&self) -> TorusSpec {
        self.spec
    }

    pub fn generator(&self) -> &SparseGenerator {
        self.uniformizer.generator()
    }

    /// Law of `(X_t, Y_t)` from an initial law on pairs.
    pub fn law(&self, start: &[f64], t: f64, tol: f64) -> Result<Vec<f64>> {
        self.uniformizer.propagate(start, t, tol, Direction::Forward)
    }

    /// Law of `(X_t, Y_t)` from `(0, 0)` at every point of `grid`.
    pub fn law_path(&self, grid: TimeGrid, tol: f64) -> Result<Vec<Vec<f64>>> {
        let mut p = vec![0.0; self.generator().len()];
        p[0] = 1.0;
        let per_step = tol / grid.len() as f64;
        let mut out = vec![p.clone()];
        for _ in 1..grid.len() {
            p = self.uniformizer.propagate(&p, grid.step(), per_step, Direction::Forward)?;
            out.push(p.clone());
        }
        Ok(out)
    }
}

/// Law of the coupled walks at time `t` started from `(0, 0)`; entry
/// `x N^d + y` is `P(X_t = x, Y_t = y)`.
pub fn crw_pair_kernel(t: f64, spec: TorusSpec, tol: f64) -> Result<Vec<f64>> {
    let crw = CoupledWalks::new(spec)?;
    let mut start = vec![0.0; crw.generator().len()];
    start[0] = 1.0;
    crw.law(&start, t, tol)
}
