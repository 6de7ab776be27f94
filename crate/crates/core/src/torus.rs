//! Geometry of the discrete torus `(Z/NZ)^d`, mass profiles over its
//! vertices, normalized `L^p` distances and the Dirichlet form.
//!
//! Vertices are indexed row-major: coordinate `(i_1, ..., i_d)` maps to
//! `i_1 N^{d-1} + ... + i_d`. Every module in the crate shares this
//! bijection.

use crate::error::{Error, Result};

/// Dimension and side length of a discrete torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusSpec {
    d: usize,
    n: usize,
}

/// Flat, row-major vertex index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexIndex(pub usize);

impl VertexIndex {
    pub fn get(self) -> usize {
        self.0
    }
}

impl TorusSpec {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSpec { d, n, reason: "dimension must be at least 1" });
        }
        if n < 3 {
            return Err(Error::InvalidSpec { d, n, reason: "side length must be at least 3" });
        }
        if (n as f64).powi(d as i32) > 1e9 {
            return Err(Error::InvalidSpec { d, n, reason: "vertex count too large" });
        }
        Ok(Self { d, n })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        self.n
    }

    /// Number of vertices, `N^d`.
    pub fn volume(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Number of unordered nearest-neighbour pairs, `d N^d`.
    pub fn edge_count(&self) -> usize {
        self.d * self.volume()
    }

    fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.d - 1 - axis) as u32)
    }

    /// Row-major index of a coordinate tuple; coordinates are reduced mod `N`.
    pub fn canonical_index(&self, coords: &[i64]) -> Result<VertexIndex> {
        if coords.len() != self.d {
            return Err(Error::CoordinateCount { expected: self.d, got: coords.len() });
        }
        let n = self.n as i64;
        let flat = coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.n + c.rem_euclid(n) as usize);
        Ok(VertexIndex(flat))
    }

    pub fn coords_of(&self, v: VertexIndex) -> Result<Vec<usize>> {
        self.check(v)?;
        let mut rest = v.0;
        let mut out = vec![0; self.d];
        for slot in out.iter_mut().rev() {
            *slot = rest % self.n;
            rest /= self.n;
        }
        Ok(out)
    }

    pub fn check(&self, v: VertexIndex) -> Result<()> {
        if v.0 < self.volume() {
            Ok(())
        } else {
            Err(Error::InvalidVertex(v.0))
        }
    }

    /// Coordinate of `v` along `axis`.
    pub fn coord(&self, v: usize, axis: usize) -> usize {
        (v / self.stride(axis)) % self.n
    }

    /// Translate `v` by `delta` along `axis`.
    pub fn shift(&self, v: usize, axis: usize, delta: i64) -> usize {
        let stride = self.stride(axis);
        let c = self.coord(v, axis) as i64;
        let moved = (c + delta).rem_euclid(self.n as i64) as usize;
        v - c as usize * stride + moved * stride
    }

    /// Translate `v` by the vector `w` (vertex addition on the torus).
    pub fn add(&self, v: usize, w: usize) -> usize {
        (0..self.d).fold(v, |acc, axis| self.shift(acc, axis, self.coord(w, axis) as i64))
    }

    /// `v - w` on the torus.
    pub fn sub(&self, v: usize, w: usize) -> usize {
        (0..self.d).fold(v, |acc, axis| self.shift(acc, axis, -(self.coord(w, axis) as i64)))
    }

    /// `-v` on the torus.
    pub fn negate(&self, v: usize) -> usize {
        self.sub(0, v)
    }

    /// The unit vector `±e_axis`.
    pub fn unit(&self, axis: usize, positive: bool) -> usize {
        self.shift(0, axis, if positive { 1 } else { -1 })
    }

    /// The `2d` nearest neighbours of `v`, ordered `+e_1, -e_1, +e_2, ...`.
    pub fn neighbors(&self, v: VertexIndex) -> Result<Vec<VertexIndex>> {
        self.check(v)?;
        Ok(self.neighbors_of(v.0).map(VertexIndex).collect())
    }

    pub(crate) fn neighbors_of(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.d).flat_map(move |axis| [self.shift(v, axis, 1), self.shift(v, axis, -1)])
    }

    pub fn are_adjacent(&self, x: usize, y: usize) -> bool {
        x < self.volume() && y < self.volume() && self.neighbors_of(x).any(|z| z == y)
    }

    /// Every unordered nearest-neighbour pair exactly once, as `(x, x + e_axis)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for x in 0..self.volume() {
            for axis in 0..self.d {
                out.push((x, self.shift(x, axis, 1)));
            }
        }
        out
    }

    /// Graph distance `|v|` of `v` from the origin.
    pub fn norm1(&self, v: usize) -> usize {
        (0..self.d)
            .map(|axis| {
                let c = self.coord(v, axis);
                c.min(self.n - c)
            })
            .sum()
    }
}

/// A probability mass function over the vertices of a torus.
#[derive(Debug, Clone, PartialEq)]
pub struct MassProfile {
    spec: TorusSpec,
    values: Vec<f64>,
}

const MASS_TOL: f64 = 1e-9;

impl MassProfile {
    pub fn new(spec: TorusSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.volume() {
            return Err(Error::LengthMismatch { expected: spec.volume(), got: values.len() });
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < -MASS_TOL || **v > 1.0 + MASS_TOL)
        {
            return Err(Error::InvalidProfile(format!("entry {i} = {v} outside [0, 1]")));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidProfile(format!("total mass {total} differs from 1")));
        }
        Ok(Self { spec, values })
    }

    pub(crate) fn new_unchecked(spec: TorusSpec, values: Vec<f64>) -> Self {
        Self { spec, values }
    }

    pub fn dirac(spec: TorusSpec, v: VertexIndex) -> Result<Self> {
        spec.check(v)?;
        let mut values = vec![0.0; spec.volume()];
        values[v.0] = 1.0;
        Ok(Self { spec, values })
    }

    /// The equilibrium `π`, uniform over the vertices.
    pub fn uniform(spec: TorusSpec) -> Self {
        let v = spec.volume();
        Self { spec, values: vec![1.0 / v as f64; v] }
    }

    /// Normalize nonnegative weights to unit mass.
    pub fn from_weights(spec: TorusSpec, weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidProfile("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidProfile("weights sum to zero".into()));
        }
        Self::new(spec, weights.iter().map(|w| w / total).collect())
    }

    pub fn spec(&self) -> TorusSpec {
        self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// The density `η/π`, i.e. `N^d η`.
    pub fn density(&self) -> Vec<f64> {
        let v = self.spec.volume() as f64;
        self.values.iter().map(|x| x * v).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if (1.0..=2.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::ExponentOutOfRange(p))
    }
}

/// `‖η/π − ρ/π‖_p` in `L^p(π)` with `π` uniform.
pub fn lp_distance(eta: &MassProfile, rho: &MassProfile, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if eta.spec != rho.spec {
        return Err(Error::SpecMismatch);
    }
    Ok(lp_power_slices(&eta.values, &rho.values, p).powf(1.0 / p))
}

/// `‖η/π − ρ/π‖_p^p` on raw mass vectors of equal length.
pub(crate) fn lp_power_slices(eta: &[f64], rho: &[f64], p: f64) -> f64 {
    let vol = eta.len() as f64;
    let sum: f64 = eta
        .iter()
        .zip(rho)
        .map(|(a, b)| {
            let diff = (vol * (a - b)).abs();
            if p == 2.0 {
                diff * diff
            } else if p == 1.0 {
                diff
            } else {
                diff.powf(p)
            }
        })
        .sum();
    sum / vol
}

/// `‖η/π − 1‖_p^p` for a raw mass vector.
pub(crate) fn lp_power_to_uniform(eta: &[f64], p: f64) -> f64 {
    let vol = eta.len() as f64;
    let sum: f64 = eta
        .iter()
        .map(|a| {
            let diff = (vol * a - 1.0).abs();
            if p == 2.0 {
                diff * diff
            } else if p == 1.0 {
                diff
            } else {
                diff.powf(p)
            }
        })
        .sum();
    sum / vol
}

/// `ℰ(ψ) = (1/(4N^d)) Σ_x Σ_{y~x} (ψ(x) − ψ(y))²`.
pub fn dirichlet_form(psi: &[f64], spec: TorusSpec) -> Result<f64> {
    if psi.len() != spec.volume() {
        return Err(Error::LengthMismatch { expected: spec.volume(), got: psi.len() });
    }
    Ok(dirichlet_unchecked(psi, spec))
}

pub(crate) fn dirichlet_unchecked(psi: &[f64], spec: TorusSpec) -> f64 {
    // each unordered edge appears twice in the double sum
    let mut sum = 0.0;
    for x in 0..spec.volume() {
        for axis in 0..spec.dim() {
            let y = spec.shift(x, axis, 1);
            let diff = psi[x] - psi[y];
            sum += diff * diff;
        }
    }
    sum / (2.0 * spec.volume() as f64)
}
