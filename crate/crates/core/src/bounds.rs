//! Grid-level verification of the local smoothness, concentration, gradient
//! and `L²` estimates.
//!
//! Unspecified constants are never asserted. Each report combines exact
//! identities, pointwise inequality chains with constructive constants, and
//! fitted constants whose stability across `N` is checked by the caller.

use crate::diff_kernel::{
    build_generator, f_g_sampled, kernel_path, lower_bound_chain, series_sum, CoupledWalks, DefectGenerator,
    DEFAULT_SERIES_CAP, DEFAULT_TOL, PAIR_STATE_CAP,
};
use crate::error::{Error, Result};
use crate::heat::{kernel_1d_values, xi, SpectralData};
use crate::mc::{replicate, McEstimate};
use crate::sampled::{SampledFunction, TimeGrid};
use crate::sim::{mc_functionals, AveragingSim, Functional};
use crate::torus::{MassProfile, TorusSpec, VertexIndex};

/// Relative slack for exact inequalities evaluated in floating point.
const EXACT_SLACK: f64 = 1e-10;

/// Number of standard errors tolerated in Monte Carlo comparisons.
pub const MC_SIGMAS: f64 = 3.0;

/// Minimal fraction of Monte Carlo rows that must pass.
pub const MC_PASS_FRACTION: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub t: f64,
    pub check: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub std_error: Option<f64>,
    pub mode: CheckMode,
    pub pass: bool,
}

impl BoundRow {
    fn exact(t: f64, check: &'static str, lhs: f64, rhs: f64, pass: bool) -> Self {
        Self { t, check, lhs, rhs, std_error: None, mode: CheckMode::Exact, pass }
    }

    fn le(t: f64, check: &'static str, lhs: f64, rhs: f64) -> Self {
        Self::exact(t, check, lhs, rhs, lhs <= rhs + EXACT_SLACK * rhs.abs().max(1e-300))
    }

    fn mc(t: f64, check: &'static str, est: McEstimate, exact: f64) -> Self {
        Self {
            t,
            check,
            lhs: est.mean,
            rhs: exact,
            std_error: Some(est.std_error),
            mode: CheckMode::MonteCarlo,
            pass: est.agrees_with(exact, MC_SIGMAS),
        }
    }
}

/// Outcome of one verification run.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub name: &'static str,
    pub spec: TorusSpec,
    pub grid: TimeGrid,
    pub rows: Vec<BoundRow>,
    /// Fitted or implied constants, by name.
    pub constants: Vec<(&'static str, f64)>,
    /// Inputs echoed for auditability (seed, replicas, tolerances).
    pub params: Vec<(&'static str, String)>,
}

impl BoundReport {
    fn new(name: &'static str, spec: TorusSpec, grid: TimeGrid) -> Self {
        Self { name, spec, grid, rows: Vec::new(), constants: Vec::new(), params: Vec::new() }
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    pub fn rows_for<'a>(&'a self, check: &'a str) -> impl Iterator<Item = &'a BoundRow> + 'a {
        self.rows.iter().filter(move |r| r.check == check)
    }

    /// Fraction of passing rows among those of `check`.
    pub fn pass_fraction(&self, check: &str) -> f64 {
        let (pass, total) =
            self.rows_for(check).fold((0usize, 0usize), |(p, n), r| (p + r.pass as usize, n + 1));
        if total == 0 {
            1.0
        } else {
            pass as f64 / total as f64
        }
    }

    /// Every exact row passes and each Monte Carlo check passes at the
    /// required fraction of its rows.
    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| {
            let mc = self.rows_for(c).any(|r| r.mode == CheckMode::MonteCarlo);
            let frac = self.pass_fraction(c);
            if mc {
                frac >= MC_PASS_FRACTION
            } else {
                frac == 1.0
            }
        })
    }

    /// Distinct check names in order of first appearance.
    pub fn checks(&self) -> Vec<&'static str> {
        let mut checks: Vec<&'static str> = Vec::new();
        for r in &self.rows {
            if !checks.contains(&r.check) {
                checks.push(r.check);
            }
        }
        checks
    }

    /// One line per check with its passing rows, then the constants.
    pub fn summary(&self) -> String {
        let checks = self.checks();
        let mut out = format!(
            "{} (d={}, N={}): {}\n",
            self.name,
            self.spec.dim(),
            self.spec.side(),
            if self.passed() { "PASS" } else { "FAIL" }
        );
        for c in checks {
            let n = self.rows_for(c).count();
            let p = self.rows_for(c).filter(|r| r.pass).count();
            out.push_str(&format!("  {c}: {p}/{n}\n"));
        }
        for (name, v) in &self.constants {
            out.push_str(&format!("  {name} = {v:.6e}\n"));
        }
        out
    }
}

/// Least-squares fit `log y ≈ a + b t`; returns `(a, b)`.
pub fn log_linear_fit(ts: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if ts.len() != ys.len() {
        return Err(Error::LengthMismatch { expected: ts.len(), got: ys.len() });
    }
    let pts: Vec<(f64, f64)> = ts.iter().zip(ys).filter(|(_, y)| **y > 0.0).map(|(t, y)| (*t, y.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::Numerical("log-linear fit needs two positive points".into()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Numerical("log-linear fit needs distinct times".into()));
    }
    let b = sxy / sxx;
    Ok((my - b * mt, b))
}

/// Late-time decay slope of `values`: fit on `[3 t_rel, 6 t_rel]` when the
/// grid covers it, else on the last third of the grid.
pub fn late_slope(grid: TimeGrid, values: &[f64], t_rel: f64) -> Result<f64> {
    let window: Vec<usize> = grid.times().enumerate().filter(|(_, t)| *t >= 3.0 * t_rel && *t <= 6.0 * t_rel).map(|(i, _)| i).collect();
    let idx: Vec<usize> = if window.len() >= 4 { window } else { (2 * grid.len() / 3..grid.len()).filter(|&i| i > 0).collect() };
    let ts: Vec<f64> = idx.iter().map(|&i| grid.time(i)).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    Ok(log_linear_fit(&ts, &ys)?.1)
}

/// `B ≥ 0` making `values / (base · e^{Bt/N^{d+2}})` flat over the late
/// window, where `base` is the bound shape with `B = 0`.
fn fitted_b(grid: TimeGrid, values: &[f64], base: impl Fn(f64) -> f64, t_rel: f64, spec: TorusSpec) -> Result<f64> {
    let ratio: Vec<f64> = values.iter().zip(grid.times()).map(|(v, t)| v / base(t)).collect();
    let scale = (spec.side() as f64).powi(spec.dim() as i32 + 2);
    Ok((late_slope(grid, &ratio, t_rel)? * scale).max(0.0))
}

/// `(u ∗ g, g ∗ g)` on `grid`, convolved on the grid refined by two so that
/// every grid point gets fourth-order weights.
fn refined_convolutions(gen: &DefectGenerator, grid: TimeGrid) -> Result<(SampledFunction, SampledFunction)> {
    let spec = gen.spec();
    let fine = TimeGrid::with_len(grid.step() / 2.0, 2 * grid.len() - 1)?;
    let u = SampledFunction::new(fine, exact_path(gen, fine)?.u)?;
    let (_, g) = f_g_sampled(fine, spec)?;
    let coarse = |f: SampledFunction| SampledFunction::new(grid, f.values().iter().step_by(2).copied().collect());
    Ok((coarse(u.convolve_simpson(&g)?)?, coarse(g.convolve_simpson(&g)?)?))
}

/// Exact `u`, `u'` and `S_t(0,0)` along a grid.
struct ExactPath {
    u: Vec<f64>,
    du: Vec<f64>,
    s00: Vec<f64>,
}

fn exact_path(gen: &DefectGenerator, grid: TimeGrid) -> Result<ExactPath> {
    let spec = gen.spec();
    let e = spec.unit(0, true);
    let a = gen.matrix();
    let apply_at = |s: &[f64], x: usize| a.row(x).map(|(y, r)| r * (s[y] - s[x])).sum::<f64>();
    let mut path = ExactPath { u: Vec::new(), du: Vec::new(), s00: Vec::new() };
    for s in kernel_path(gen, grid, DEFAULT_TOL)? {
        path.u.push(s[0] - s[e]);
        path.du.push(apply_at(&s, 0) - apply_at(&s, e));
        path.s00.push(s[0]);
    }
    Ok(path)
}

fn t_rel_of(spec: TorusSpec) -> Result<f64> {
    Ok(SpectralData::new(spec.side())?.t_rel())
}

/// Local smoothness: `g ≤ u`, `sup_{s≤t} e^{s f(s)} g(t) ≤ u(t)` and
/// `u ≤ Σ_k g̃^{∗k}` at every grid point.
pub fn verify_local_smoothness(spec: TorusSpec, grid: TimeGrid) -> Result<BoundReport> {
    let gen = build_generator(spec)?;
    let u = SampledFunction::new(grid, exact_path(&gen, grid)?.u)?;
    let (f, g) = f_g_sampled(grid, spec)?;
    let chain = lower_bound_chain(&f, &g)?;
    let d = spec.dim() as f64;
    let series = series_sum(&g.scaled(d + 0.5), DEFAULT_SERIES_CAP)?;

    let mut report = BoundReport::new("local-smoothness", spec, grid);
    let mut implied_c1 = f64::INFINITY;
    for (i, t) in grid.times().enumerate() {
        let (ui, gi) = (u.values()[i], g.values()[i]);
        report.rows.push(BoundRow::le(t, "g<=u", gi, ui));
        report.rows.push(BoundRow::le(t, "lower_chain<=u", chain.values()[i], ui));
        report.rows.push(BoundRow::le(t, "u<=series", ui, series.values.values()[i]));
        if t > 0.0 {
            implied_c1 = implied_c1.min((ui / gi - 1.0) / t.min(1.0));
        }
    }
    let ratio: Vec<f64> = u.values().iter().zip(g.values()).map(|(a, b)| a / b).collect();
    let t_rel = t_rel_of(spec)?;
    report.constants.push(("implied_c1", implied_c1));
    report.constants.push(("ratio_rate", late_slope(grid, &ratio, t_rel)?));
    report.constants.push(("series_terms", series.terms as f64));
    report.params.push(("tolerance", format!("{DEFAULT_TOL:e}")));
    Ok(report)
}

/// `𝒩_t = d N^d (u ∗ g)(t)` on the grid.
pub fn fluctuation_exact(spec: TorusSpec, grid: TimeGrid) -> Result<SampledFunction> {
    let gen = build_generator(spec)?;
    Ok(refined_convolutions(&gen, grid)?.0.scaled((spec.dim() * spec.volume()) as f64))
}

/// Concentration: the fluctuation identity against Monte Carlo, the
/// `u ∗ g ≥ g ∗ g` chain, and the sandwich ratios `𝒩_t / ((1∧t) Ξ(t))`.
/// With `replicas == 0` only the exact checks run.
pub fn verify_concentration(spec: TorusSpec, grid: TimeGrid, replicas: usize, seed: u64) -> Result<BoundReport> {
    let gen = build_generator(spec)?;
    let scale = (spec.dim() * spec.volume()) as f64;
    let (ug, gg) = refined_convolutions(&gen, grid)?;
    let nt = ug.scaled(scale);

    let mut report = BoundReport::new("concentration", spec, grid);
    report.params.push(("replicas", replicas.to_string()));
    report.params.push(("seed", seed.to_string()));
    let t_rel = t_rel_of(spec)?;
    let base = |t: f64| t.min(1.0) * xi(t, spec).unwrap_or(f64::NAN);
    let b = fitted_b(grid, nt.values(), base, t_rel, spec)?;
    let growth = |t: f64| (b * t / (spec.side() as f64).powi(spec.dim() as i32 + 2)).exp();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (i, t) in grid.times().enumerate() {
        report.rows.push(BoundRow::le(t, "g*g<=u*g", gg.values()[i], ug.values()[i]));
        if t > 0.0 {
            let r = nt.values()[i] / base(t);
            lo = lo.min(r);
            hi = hi.max(r / growth(t));
        }
    }
    if replicas > 0 {
        let times: Vec<f64> = grid.times().collect();
        let origin = MassProfile::dirac(spec, VertexIndex(0))?;
        let rows = mc_functionals(&origin, &times, &[], replicas, seed)?;
        for row in rows.iter().filter(|r| r.functional == Functional::Fluctuation) {
            let exact = nt.at(row.t)?;
            if row.t > 0.0 && row.estimate.std_error > exact {
                return Err(Error::InsufficientReplicas(format!(
                    "standard error {:.3e} exceeds the fluctuation {exact:.3e} at t = {}",
                    row.estimate.std_error, row.t
                )));
            }
            report.rows.push(BoundRow::mc(row.t, "fluctuation_identity", row.estimate, exact));
        }
    }
    report.constants.push(("c_lower", lo));
    report.constants.push(("c_upper", hi));
    report.constants.push(("fitted_b", b));
    Ok(report)
}

/// `E[(η_t(x) − η_t(y))²]` for the averaging process started at `δ_0`, from
/// the law of the coupled walks.
pub fn squared_gradient_from_pairs(pairs: &[f64], volume: usize, x: usize, y: usize) -> f64 {
    let at = |a: usize, b: usize| pairs[a * volume + b];
    at(x, x) + at(y, y) - 2.0 * at(x, y)
}

/// Gradient estimate across the edge `{0, e}`: exact from the coupled walks
/// when `N^{2d} ≤ 10⁴`, Monte Carlo otherwise. Also checks that the mean
/// squared gradient over all edges equals `2u(t)/N^d`.
pub fn verify_gradient(spec: TorusSpec, grid: TimeGrid, replicas: usize, seed: u64) -> Result<BoundReport> {
    let gen = build_generator(spec)?;
    let u = exact_path(&gen, grid)?.u;
    let v = spec.volume();
    let e = spec.unit(0, true);
    let edges = spec.edges();
    let mut report = BoundReport::new("gradient", spec, grid);
    let exact_mode = v * v <= PAIR_STATE_CAP;
    report.params.push(("mode", if exact_mode { "exact" } else { "monte-carlo" }.into()));

    let grad: Vec<f64> = if exact_mode {
        let laws = CoupledWalks::new(spec)?.law_path(grid, DEFAULT_TOL)?;
        let mut grad = Vec::with_capacity(grid.len());
        for (i, (law, t)) in laws.iter().zip(grid.times()).enumerate() {
            let mean = edges.iter().map(|&(x, y)| squared_gradient_from_pairs(law, v, x, y)).sum::<f64>()
                / edges.len() as f64;
            let target = 2.0 * u[i] / v as f64;
            let ok = (mean - target).abs() <= 1e-9 * target.max(1e-12);
            report.rows.push(BoundRow::exact(t, "mean_gradient_identity", mean, target, ok));
            grad.push(squared_gradient_from_pairs(law, v, 0, e));
        }
        grad
    } else {
        if replicas < 2 {
            return Err(Error::InsufficientReplicas("Monte Carlo gradient needs replicas >= 2".into()));
        }
        report.params.push(("replicas", replicas.to_string()));
        report.params.push(("seed", seed.to_string()));
        let sim = AveragingSim::new(spec);
        let origin = MassProfile::dirac(spec, VertexIndex(0))?;
        let times: Vec<f64> = grid.times().collect();
        let est = replicate(replicas, seed, 2 * times.len(), |rng| {
            let mut eta = origin.values().to_vec();
            let mut now = 0.0;
            let mut out = Vec::with_capacity(2 * times.len());
            for &t in &times {
                sim.advance(&mut eta, now, t, rng, |_, _| {})?;
                now = t;
                out.push((eta[0] - eta[e]).powi(2));
                let mean = edges.iter().map(|&(x, y)| (eta[x] - eta[y]).powi(2)).sum::<f64>() / edges.len() as f64;
                out.push(mean);
            }
            Ok(out)
        })?;
        for (i, t) in times.iter().enumerate() {
            let target = 2.0 * u[i] / v as f64;
            report.rows.push(BoundRow::mc(*t, "mean_gradient_identity", est[2 * i + 1], target));
        }
        (0..times.len()).map(|i| est[2 * i].mean).collect()
    };

    let t_rel = t_rel_of(spec)?;
    let slope = late_slope(grid, &grad, t_rel)?;
    let d = spec.dim() as f64;
    let n = spec.side() as f64;
    let base = |t: f64| (-2.0 * t / t_rel).exp() / n.powf(2.0 * d + 2.0).min(t.powf(d + 1.0)).max(1.0);
    let b = fitted_b(grid, &grad, base, t_rel, spec)?;
    let shape = |t: f64| base(t) * (b * t / n.powf(d + 2.0)).exp();
    let c = grad.iter().zip(grid.times()).map(|(g, t)| g / shape(t)).fold(0.0, f64::max);
    for (gv, t) in grad.iter().zip(grid.times()) {
        report.rows.push(BoundRow::le(t, "gradient<=C*shape", *gv, c * shape(t)));
    }
    report.constants.push(("fitted_c", c));
    report.constants.push(("fitted_b", b));
    report.constants.push(("decay_rate", -slope));
    report.constants.push(("decay_rate_ratio", -slope * t_rel / 2.0));
    Ok(report)
}

/// Both exact routes to `E‖η_t/π − 1‖₂²` along `grid`:
/// `(‖π_t/π − 1‖₂² + 𝒩_t, ∫_t^∞ d N^d u(s) ds)`.
pub fn l2_routes(spec: TorusSpec, grid: TimeGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    let t_rel = t_rel_of(spec)?;
    let h = grid.step();
    let extra = (10.0 * t_rel / h).ceil() as usize;
    let ext = TimeGrid::with_len(h, grid.len() + extra)?;
    let gen = build_generator(spec)?;
    let path = exact_path(&gen, ext)?;
    let scale = (spec.dim() * spec.volume()) as f64;
    let vol = spec.volume() as f64;
    let last = ext.len() - 1;

    // trapezoid with the exact end-point derivative correction
    let u_ext = SampledFunction::new(ext, path.u.clone())?;
    let trap = u_ext.tail_integrals();
    let rate = -path.du[last] / path.u[last];
    if rate.is_nan() || rate <= 0.0 {
        return Err(Error::TailHorizon(format!("u is not decaying at t = {}", ext.horizon())));
    }
    let tail = path.u[last] / rate;

    let nt = refined_convolutions(&gen, grid)?.0.scaled(scale);

    let mut pyth = Vec::with_capacity(grid.len());
    let mut integ = Vec::with_capacity(grid.len());
    for (i, t) in grid.times().enumerate() {
        let p0 = kernel_1d_values(t, spec.side())?[0];
        pyth.push(vol * p0.powi(spec.dim() as i32) - 1.0 + nt.values()[i]);
        let body = trap[i] - h * h / 12.0 * (path.du[last] - path.du[i]);
        integ.push(scale * (body + tail));
    }
    if scale * tail > 1e-6 * integ[grid.len() - 1].max(1e-300) {
        return Err(Error::TailHorizon(format!("tail {:.3e} beyond t = {} is too large", scale * tail, ext.horizon())));
    }
    Ok((pyth, integ))
}

/// `L²` bound: agreement of the two exact routes within `1e−5` relative,
/// the closed route `N^d S_t(0,0) − 1`, and the bound shape with fitted
/// constants. With `replicas > 0` the exact value is also compared with a
/// Monte Carlo estimate.
pub fn verify_l2_bound(spec: TorusSpec, grid: TimeGrid, replicas: usize, seed: u64) -> Result<BoundReport> {
    let (pyth, integ) = l2_routes(spec, grid)?;
    let gen = build_generator(spec)?;
    let s00 = exact_path(&gen, grid)?.s00;
    let vol = spec.volume() as f64;
    let mut report = BoundReport::new("l2-bound", spec, grid);
    report.params.push(("replicas", replicas.to_string()));
    report.params.push(("seed", seed.to_string()));
    for (i, t) in grid.times().enumerate() {
        let (a, b) = (pyth[i], integ[i]);
        // N^d S_t(0,0) − 1 cancels, so allow its rounding on top
        let rel = |x: f64, y: f64| (x - y).abs() <= 1e-5 * y.abs() + 1e-13 * vol;
        report.rows.push(BoundRow::exact(t, "pythagoras=integral", a, b, rel(a, b)));
        let closed = vol * s00[i] - 1.0;
        report.rows.push(BoundRow::exact(t, "pythagoras=return_probability", a, closed, rel(a, closed)));
    }

    let t_rel = t_rel_of(spec)?;
    let d = spec.dim() as f64;
    let n = spec.side() as f64;
    let base = |t: f64| vol * (-2.0 * t / t_rel).exp() / vol.min(t.powf(d / 2.0)).max(1.0);
    let b = fitted_b(grid, &pyth, base, t_rel, spec)?;
    let shape = |t: f64| base(t) * (b * t / n.powf(d + 2.0)).exp();
    let c = pyth.iter().zip(grid.times()).map(|(v, t)| v / shape(t)).fold(0.0, f64::max);
    for (v, t) in pyth.iter().zip(grid.times()) {
        report.rows.push(BoundRow::le(t, "l2<=C*shape", *v, c * shape(t)));
    }
    if replicas > 0 {
        let times: Vec<f64> = grid.times().collect();
        let origin = MassProfile::dirac(spec, VertexIndex(0))?;
        let rows = mc_functionals(&origin, &times, &[2.0], replicas, seed)?;
        for row in rows.iter().filter(|r| r.functional == Functional::LpPower(2.0)) {
            let i = grid.index_of(row.t)?;
            report.rows.push(BoundRow::mc(row.t, "l2_monte_carlo", row.estimate, pyth[i]));
        }
    }
    report.constants.push(("fitted_c", c));
    report.constants.push(("fitted_b", b));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize, n: usize) -> TorusSpec {
        TorusSpec::new(d, n).unwrap()
    }

    #[test]
    fn log_linear_fit_recovers_exponential() {
        let ts: Vec<f64> = (0..10).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 3.0 * (-0.7 * t).exp()).collect();
        let (a, b) = log_linear_fit(&ts, &ys).unwrap();
        assert!((a - 3f64.ln()).abs() < 1e-12);
        assert!((b + 0.7).abs() < 1e-12);
    }

    #[test]
    fn local_smoothness_passes_and_ratio_exceeds_one() {
        let grid = TimeGrid::new(1.0 / 16.0, 10.0).unwrap();
        let r = verify_local_smoothness(spec(1, 8), grid).unwrap();
        assert!(r.passed(), "{}", r.summary());
        let g_rows: Vec<_> = r.rows_for("g<=u").collect();
        assert_eq!(g_rows[0].lhs, 1.0);
        assert!((g_rows[0].rhs - 1.0).abs() < 1e-12);
        assert!(g_rows[1..].iter().all(|row| row.rhs > row.lhs));
        assert!(r.constant("implied_c1").unwrap() > 0.0);
    }

    #[test]
    fn concentration_exact_part() {
        let grid = TimeGrid::new(1.0 / 32.0, 6.0).unwrap();
        let r = verify_concentration(spec(1, 8), grid, 0, 0).unwrap();
        assert!(r.passed());
        let nt = fluctuation_exact(spec(1, 8), grid).unwrap();
        assert_eq!(nt.values()[0], 0.0);
        let (lo, hi) = (r.constant("c_lower").unwrap(), r.constant("c_upper").unwrap());
        assert!(lo > 0.0 && hi >= lo);
    }

    #[test]
    fn gradient_vanishes_off_origin_at_zero() {
        let s = spec(1, 6);
        let law = crate::diff_kernel::crw_pair_kernel(0.0, s, 1e-12).unwrap();
        assert_eq!(squared_gradient_from_pairs(&law, 6, 2, 3), 0.0);
        assert_eq!(squared_gradient_from_pairs(&law, 6, 0, 1), 1.0);
    }

    #[test]
    fn gradient_identity_holds_exactly() {
        let grid = TimeGrid::new(0.25, 20.0).unwrap();
        let r = verify_gradient(spec(1, 8), grid, 0, 0).unwrap();
        assert!(r.passed(), "{}", r.summary());
        assert_eq!(r.pass_fraction("mean_gradient_identity"), 1.0);
    }

    #[test]
    fn l2_routes_agree() {
        let s = spec(1, 8);
        let grid = TimeGrid::new(1.0 / 64.0, 8.0).unwrap();
        let (pyth, integ) = l2_routes(s, grid).unwrap();
        assert!((pyth[0] - 7.0).abs() < 1e-12);
        assert!((integ[0] - 7.0).abs() < 1e-5 * 7.0);
        let r = verify_l2_bound(s, grid, 0, 0).unwrap();
        assert!(r.passed(), "{}", r.summary());
    }
}
