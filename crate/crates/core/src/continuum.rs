//! Heat kernel of `½Δ` on the continuum torus `[0,1)^d`, its `L^p` distance
//! to equilibrium, and the comparisons with the rescaled discrete process.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::heat::heat_flow_profile;
use crate::mc::replicate;
use crate::sim::AveragingSim;
use crate::torus::{lp_power_to_uniform, MassProfile, TorusSpec, VertexIndex};

/// Crossover between the image sum and the Fourier series.
pub const CROSSOVER: f64 = 1.0 / (2.0 * PI);

/// Truncation threshold for both series.
const SERIES_TAIL: f64 = 1e-13;

/// Quadrature points per axis before refinement.
pub fn base_resolution(d: usize) -> usize {
    if d == 1 {
        1 << 10
    } else {
        1 << 6
    }
}

/// Largest quadrature resolution per axis.
fn max_resolution(d: usize) -> usize {
    if d == 1 {
        1 << 20
    } else {
        1 << 11
    }
}

/// Change under halving tolerated by the quadrature.
pub const QUADRATURE_TOL: f64 = 1e-6;

/// `h_t(0, ·)` for the diffusion generated by `½Δ` on `[0,1)^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumKernel {
    t: f64,
}

impl ContinuumKernel {
    pub fn new(t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidArgument(format!("continuum time {t} must be positive")));
        }
        Ok(Self { t })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// One-dimensional factor, picking the faster-converging series.
    pub fn factor(&self, u: f64) -> f64 {
        if self.t >= CROSSOVER {
            self.fourier_factor(u)
        } else {
            self.image_factor(u)
        }
    }

    /// `1 + 2 Σ_{k≥1} e^{−2π²k²t} cos(2πku)`.
    pub fn fourier_factor(&self, u: f64) -> f64 {
        let mut sum = 1.0;
        for k in 1.. {
            let k = k as f64;
            let w = (-2.0 * PI * PI * k * k * self.t).exp();
            if w < SERIES_TAIL {
                break;
            }
            sum += 2.0 * w * (2.0 * PI * k * u).cos();
        }
        sum
    }

    /// `Σ_{m∈ℤ} (2πt)^{−1/2} e^{−(u+m)²/(2t)}`.
    pub fn image_factor(&self, u: f64) -> f64 {
        let u = u.rem_euclid(1.0);
        let norm = (2.0 * PI * self.t).sqrt();
        let term = |m: f64| (-(u + m).powi(2) / (2.0 * self.t)).exp() / norm;
        let mut sum = term(0.0) + term(-1.0);
        for m in 1.. {
            let (a, b) = (term(m as f64), term(-(m as f64) - 1.0));
            sum += a + b;
            if a + b < SERIES_TAIL {
                break;
            }
        }
        sum
    }

    /// `h_t(0, u)` as a product of one-dimensional factors.
    pub fn value(&self, u: &[f64]) -> f64 {
        u.iter().map(|&x| self.factor(x)).product()
    }
}

/// `h_t(0, u)`.
pub fn heat_kernel_continuum(t: f64, u: &[f64]) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::InvalidArgument("point must have at least one coordinate".into()));
    }
    Ok(ContinuumKernel::new(t)?.value(u))
}

/// `Π_ℓ (1 + 2 Σ_k e^{−4π²k²t}) − 1`, the squared `L²` distance by Parseval.
pub fn l2_squared_parseval(t: f64, d: usize) -> Result<f64> {
    let k = ContinuumKernel::new(t)?;
    let mut factor = 1.0;
    for j in 1.. {
        let j = j as f64;
        let w = (-4.0 * PI * PI * j * j * k.t).exp();
        if w < SERIES_TAIL {
            break;
        }
        factor += 2.0 * w;
    }
    Ok(factor.powi(d as i32) - 1.0)
}

fn lp_power_at_resolution(kernel: &ContinuumKernel, p: f64, d: usize, m: usize) -> f64 {
    let axis: Vec<f64> = (0..m).map(|i| kernel.factor((i as f64 + 0.5) / m as f64)).collect();
    let pow = |x: f64| {
        let a = (x - 1.0).abs();
        if p == 1.0 {
            a
        } else if p == 2.0 {
            a * a
        } else {
            a.powf(p)
        }
    };
    let total = m.pow(d as u32);
    let mut sum = 0.0;
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        sum += pow(idx.iter().map(|&i| axis[i]).product());
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < m {
                break;
            }
            *slot = 0;
        }
    }
    sum / total as f64
}

/// `‖h_t(0,·) − 1‖_{L^p([0,1)^d)}` by the midpoint rule on a tensor grid.
/// The resolution doubles from [`base_resolution`] until halving it changes
/// the value by at most [`QUADRATURE_TOL`].
pub fn lp_norm_continuum(t: f64, p: f64, d: usize) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::ExponentOutOfRange(p));
    }
    if !(1..=2).contains(&d) {
        return Err(Error::InvalidArgument(format!("continuum quadrature supports d = 1, 2, not {d}")));
    }
    let kernel = ContinuumKernel::new(t)?;
    let mut m = base_resolution(d);
    let mut coarse = lp_power_at_resolution(&kernel, p, d, m / 2).powf(1.0 / p);
    loop {
        let fine = lp_power_at_resolution(&kernel, p, d, m).powf(1.0 / p);
        if (fine - coarse).abs() <= QUADRATURE_TOL {
            return Ok(fine);
        }
        if m >= max_resolution(d) {
            return Err(Error::Quadrature(format!(
                "halving the grid changes the L^{p} norm by {:.3e} at {m} points per axis",
                (fine - coarse).abs()
            )));
        }
        coarse = fine;
        m *= 2;
    }
}

/// Samples on the grid `j/m`, `j ∈ {0..m−1}^d` (first coordinate fastest),
/// evolved by the continuum heat semigroup.
pub fn evolve_samples(values: &[f64], m: usize, d: usize, t: f64) -> Result<Vec<f64>> {
    if values.len() != m.pow(d as u32) {
        return Err(Error::LengthMismatch { expected: m.pow(d as u32), got: values.len() });
    }
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("time {t} must be nonnegative")));
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(m);
    let inverse = planner.plan_fft_inverse(m);
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let along_axes = |buf: &mut Vec<Complex<f64>>, fft: &std::sync::Arc<dyn rustfft::Fft<f64>>| {
        for axis in 0..d {
            let stride = m.pow(axis as u32);
            let mut line = vec![Complex::new(0.0, 0.0); m];
            for base in 0..buf.len() {
                if !(base / stride).is_multiple_of(m) {
                    continue;
                }
                for (j, c) in line.iter_mut().enumerate() {
                    *c = buf[base + j * stride];
                }
                fft.process(&mut line);
                for (j, c) in line.iter().enumerate() {
                    buf[base + j * stride] = *c;
                }
            }
        }
    };
    along_axes(&mut buf, &forward);
    let freq = |j: usize| -> f64 {
        let j = j as i64;
        let m = m as i64;
        (if j <= m / 2 { j } else { j - m }) as f64
    };
    for (idx, c) in buf.iter_mut().enumerate() {
        let k2: f64 = (0..d).map(|axis| freq((idx / m.pow(axis as u32)) % m).powi(2)).sum();
        *c *= (-2.0 * PI * PI * k2 * t).exp();
    }
    along_axes(&mut buf, &inverse);
    let scale = m.pow(d as u32) as f64;
    Ok(buf.iter().map(|c| c.re / scale).collect())
}

/// Samples `f(j/m)` over `{0..m−1}^d`.
fn sample_grid(f: &dyn Fn(&[f64]) -> f64, m: usize, d: usize) -> Vec<f64> {
    let total = m.pow(d as u32);
    let mut point = vec![0.0; d];
    (0..total)
        .map(|idx| {
            for (axis, x) in point.iter_mut().enumerate() {
                *x = ((idx / m.pow(axis as u32)) % m) as f64 / m as f64;
            }
            f(&point)
        })
        .collect()
}

/// `∫ h_t^g Ψ` where `h_t^g` solves the heat equation from density `g`.
pub fn heat_pairing(g: &dyn Fn(&[f64]) -> f64, psi: &dyn Fn(&[f64]) -> f64, d: usize, t: f64) -> Result<f64> {
    let m = if d == 1 { 1 << 12 } else { 1 << 7 };
    let evolved = evolve_samples(&sample_grid(g, m, d), m, d, t)?;
    let psi = sample_grid(psi, m, d);
    Ok(evolved.iter().zip(&psi).map(|(a, b)| a * b).sum::<f64>() / psi.len() as f64)
}

/// `max_x |N^d π_{tN²}(0, x) − h_t(x/N)|`.
pub fn local_clt_discrepancy(spec: TorusSpec, t: f64) -> Result<f64> {
    let kernel = ContinuumKernel::new(t)?;
    let n = spec.side() as f64;
    let heat = heat_flow_profile(t * n * n, spec)?;
    let vol = spec.volume() as f64;
    let mut worst = 0.0f64;
    for (x, &m) in heat.values().iter().enumerate() {
        let u: Vec<f64> = (0..spec.dim()).map(|a| spec.coord(x, a) as f64 / n).collect();
        worst = worst.max((vol * m - kernel.value(&u)).abs());
    }
    Ok(worst)
}

/// One line of the limit-profile comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitProfileRow {
    pub n: usize,
    pub t: f64,
    pub p: f64,
    pub discrete_value: f64,
    pub continuum_value: f64,
    pub discrepancy: f64,
    pub discrepancy_times_n: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone)]
pub struct LimitProfileReport {
    pub rows: Vec<LimitProfileRow>,
    /// `sup_t discrepancy · N` per side length, in input order.
    pub scaled_sup: Vec<(usize, f64)>,
    /// `sup_t discrepancy · N` does not grow by more than a factor 3 from
    /// the smallest to the largest `N`.
    pub pass: bool,
}

/// Factor by which a scaled discrepancy may grow across side lengths.
pub const STABILITY_FACTOR: f64 = 3.0;

/// Compares `(E‖η_{tN²}/π − 1‖_p^p)^{1/p}` with `‖h_t − 1‖_{L^p}`.
/// With `replicas == 0` the discrete side is the deterministic heat-flow
/// value `‖π_{tN²}/π − 1‖_p`.
pub fn limit_profile_compare(
    d: usize,
    sides: &[usize],
    times: &[f64],
    p: f64,
    replicas: usize,
    seed: u64,
) -> Result<LimitProfileReport> {
    if sides.is_empty() || times.is_empty() {
        return Err(Error::InvalidArgument("need at least one side length and one time".into()));
    }
    if let Some(t) = times.iter().find(|t| t.is_nan() || **t <= 0.0) {
        return Err(Error::InvalidArgument(format!("limit-profile time {t} must be positive")));
    }
    let continuum: Vec<f64> = times.iter().map(|&t| lp_norm_continuum(t, p, d)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut scaled_sup = Vec::new();
    for &n in sides {
        let spec = TorusSpec::new(d, n)?;
        let nf = n as f64;
        let scaled: Vec<f64> = times.iter().map(|t| t * nf * nf).collect();
        let values: Vec<(f64, f64)> = if replicas == 0 {
            scaled
                .iter()
                .map(|&s| Ok((lp_power_to_uniform(heat_flow_profile(s, spec)?.values(), p).powf(1.0 / p), 0.0)))
                .collect::<Result<_>>()?
        } else {
            let sim = AveragingSim::new(spec);
            let origin = MassProfile::dirac(spec, VertexIndex(0))?;
            let est = replicate(replicas, seed, scaled.len(), |rng| {
                let mut eta = origin.values().to_vec();
                let mut now = 0.0;
                let mut out = Vec::with_capacity(scaled.len());
                for &s in &scaled {
                    sim.advance(&mut eta, now, s, rng, |_, _| {})?;
                    now = s;
                    out.push(lp_power_to_uniform(&eta, p));
                }
                Ok(out)
            })?;
            let roots: Vec<(f64, f64)> = est.iter().map(|e| e.root(p)).map(|r| (r.mean, r.std_error)).collect();
            if let Some((_, se)) = roots.iter().find(|(_, se)| *se > 1.0 / nf) {
                return Err(Error::InsufficientReplicas(format!(
                    "standard error {se:.3e} exceeds the 1/N scale at N = {n}"
                )));
            }
            roots
        };
        let mut sup = 0.0f64;
        for ((&t, &(value, se)), &cont) in times.iter().zip(&values).zip(&continuum) {
            let discrepancy = (value - cont).abs();
            sup = sup.max(discrepancy * nf);
            rows.push(LimitProfileRow {
                n,
                t,
                p,
                discrete_value: value,
                continuum_value: cont,
                discrepancy,
                discrepancy_times_n: discrepancy * nf,
                std_error: se,
            });
        }
        scaled_sup.push((n, sup));
    }
    let first = scaled_sup.first().map(|s| s.1).unwrap_or(0.0);
    let pass = scaled_sup.iter().all(|(_, s)| *s <= STABILITY_FACTOR * first.max(f64::MIN_POSITIVE));
    Ok(LimitProfileReport { rows, scaled_sup, pass })
}

/// `|‖π_{tN²}/π − 1‖_p − ‖h_t − 1‖_{L^p}|`.
pub fn deterministic_discrepancy(spec: TorusSpec, t: f64, p: f64) -> Result<f64> {
    let n = spec.side() as f64;
    let discrete = lp_power_to_uniform(heat_flow_profile(t * n * n, spec)?.values(), p).powf(1.0 / p);
    Ok((discrete - lp_norm_continuum(t, p, spec.dim())?).abs())
}

/// One line of the hydrodynamic comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroRow {
    pub n: usize,
    pub t: f64,
    /// Estimate of `E|Σ_x η_{tN²}(x) Ψ(x/N) − ∫ h_t^g Ψ|`.
    pub lhs: f64,
    pub std_error: f64,
    pub lhs_times_n: f64,
    /// `‖Ψ‖_∞ ‖ξ/π − g(·/N)‖_{L¹(π)}`, the initial-data term of the bound.
    pub initial_error: f64,
}

#[derive(Debug, Clone)]
pub struct HydroReport {
    pub rows: Vec<HydroRow>,
    pub scaled_sup: Vec<(usize, f64)>,
    pub pass: bool,
}

/// Monte Carlo check of the hydrodynamic limit from the discretization
/// `ξ(x) ∝ g(x/N)` of a smooth density `g` on `[0,1)^d`.
pub fn hydrodynamic_check(
    g: &dyn Fn(&[f64]) -> f64,
    psi: &dyn Fn(&[f64]) -> f64,
    d: usize,
    sides: &[usize],
    times: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<HydroReport> {
    if sides.is_empty() || times.is_empty() {
        return Err(Error::InvalidArgument("need at least one side length and one time".into()));
    }
    let targets: Vec<f64> = times.iter().map(|&t| heat_pairing(g, psi, d, t)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut scaled_sup = Vec::new();
    for &n in sides {
        let spec = TorusSpec::new(d, n)?;
        let nf = n as f64;
        let point = |x: usize| -> Vec<f64> { (0..d).map(|a| spec.coord(x, a) as f64 / nf).collect() };
        let weights: Vec<f64> = (0..spec.volume()).map(|x| g(&point(x))).collect();
        let xi = MassProfile::from_weights(spec, &weights)?;
        let psi_vals: Vec<f64> = (0..spec.volume()).map(|x| psi(&point(x))).collect();
        let psi_sup = psi_vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let vol = spec.volume() as f64;
        let initial_error = psi_sup
            * xi.values().iter().zip(&weights).map(|(m, w)| (vol * m - w).abs()).sum::<f64>()
            / vol;
        let scaled: Vec<f64> = times.iter().map(|t| t * nf * nf).collect();
        let sim = AveragingSim::new(spec);
        let est = replicate(replicas, seed, scaled.len(), |rng| {
            let mut eta = xi.values().to_vec();
            let mut now = 0.0;
            let mut out = Vec::with_capacity(scaled.len());
            for (&s, target) in scaled.iter().zip(&targets) {
                sim.advance(&mut eta, now, s, rng, |_, _| {})?;
                now = s;
                let pairing: f64 = eta.iter().zip(&psi_vals).map(|(a, b)| a * b).sum();
                out.push((pairing - target).abs());
            }
            Ok(out)
        })?;
        let mut sup = 0.0f64;
        for (&t, e) in times.iter().zip(&est) {
            sup = sup.max(e.mean * nf);
            rows.push(HydroRow { n, t, lhs: e.mean, std_error: e.std_error, lhs_times_n: e.mean * nf, initial_error });
        }
        scaled_sup.push((n, sup));
    }
    let first = scaled_sup.first().map(|s| s.1).unwrap_or(0.0);
    let pass = scaled_sup.iter().all(|(_, s)| *s <= STABILITY_FACTOR * first.max(1e-12));
    Ok(HydroReport { rows, scaled_sup, pass })
}
