//! Spectral data of the simple random walk on the cycle, the one-dimensional
//! kernel `p_t`, the tensorized heat flow and the benchmark profile `Ξ(t)`.
//!
//! `p_t` is the kernel of the difference walk, which jumps to each neighbour
//! at rate 1. The single walk jumps at rate 1/2, so its heat flow at time `t`
//! is the tensor product of `p_{t/2}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::torus::{MassProfile, TorusSpec};

/// Rounding slack tolerated below zero before a kernel value is clamped.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// Eigenvalues `λ_j = 1 − cos(2πj/N)` of the cycle and the derived gap.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    n: usize,
    eigenvalues: Vec<f64>,
}

impl SpectralData {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("side length {n} below 3")));
        }
        let eigenvalues = (0..n).map(|j| 1.0 - (2.0 * PI * j as f64 / n as f64).cos()).collect();
        Ok(Self { n, eigenvalues })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Spectral gap `λ = 1 − cos(2π/N)`.
    pub fn gap(&self) -> f64 {
        self.eigenvalues[1]
    }

    /// Relaxation time `1/λ`.
    pub fn t_rel(&self) -> f64 {
        1.0 / self.gap()
    }
}

/// All values `p_t(0), ..., p_t(N−1)` of the rate-1 cycle kernel.
pub fn kernel_1d_values(t: f64, n: usize) -> Result<Vec<f64>> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time {t} must be finite and nonnegative")));
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!("side length {n} below 3")));
    }
    let decay: Vec<f64> = (0..n)
        .map(|j| (-2.0 * (1.0 - (2.0 * PI * j as f64 / n as f64).cos()) * t).exp())
        .collect();
    (0..n)
        .map(|i| {
            let sum: f64 = decay
                .iter()
                .enumerate()
                .map(|(j, w)| {
                    // reduce i*j mod N before the trig call to keep the argument small
                    let phase = ((i * j) % n) as f64;
                    (2.0 * PI * phase / n as f64).cos() * w
                })
                .sum();
            clamp(sum / n as f64)
        })
        .collect()
}

fn clamp(value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("kernel value {value} is negative")))
    }
}

/// `p_t(i) = (1/N) Σ_j cos(2πij/N) e^{−2λ_j t}`.
pub fn kernel_1d(t: f64, i: i64, n: usize) -> Result<f64> {
    let values = kernel_1d_values(t, n)?;
    Ok(values[i.rem_euclid(n as i64) as usize])
}

/// Heat flow `π_t(0, ·)` of the single walk started at the origin.
pub fn heat_flow_profile(t: f64, spec: TorusSpec) -> Result<MassProfile> {
    let p = kernel_1d_values(t / 2.0, spec.side())?;
    let values = (0..spec.volume())
        .map(|x| (0..spec.dim()).map(|axis| p[spec.coord(x, axis)]).product())
        .collect();
    Ok(MassProfile::new_unchecked(spec, values))
}

/// `g(t) = p_t(0)^{d−1} (p_t(0) − p_t(1))`.
pub(crate) fn g_from_kernel(p: &[f64], d: usize) -> f64 {
    p[0].powi(d as i32 - 1) * (p[0] - p[1])
}

/// `ℰ(π_t/π) = d N^d g(t)`.
pub fn dirichlet_heat(t: f64, spec: TorusSpec) -> Result<f64> {
    let p = kernel_1d_values(t, spec.side())?;
    Ok((spec.dim() * spec.volume()) as f64 * g_from_kernel(&p, spec.dim()))
}

/// `Ξ(t) = N^d e^{−2t/t_rel} / ((N^{d+2} ∧ t^{d/2+1}) ∨ 1)`.
pub fn xi(t: f64, spec: TorusSpec) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time {t} must be finite and nonnegative")));
    }
    let d = spec.dim() as f64;
    let n = spec.side() as f64;
    let t_rel = SpectralData::new(spec.side())?.t_rel();
    let denom = n.powf(d + 2.0).min(t.powf(d / 2.0 + 1.0)).max(1.0);
    Ok(n.powf(d) * (-2.0 * t / t_rel).exp() / denom)
}
