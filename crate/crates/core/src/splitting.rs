//! Binomial splitting process: `k` indistinguishable particles on the torus;
//! when an edge rings the particles on its endpoints are pooled and split by
//! fair coin flips.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::diff_kernel::{build_generator, kernel_vector, CoupledWalks, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::heat::SpectralData;
use crate::markov::{Direction, SparseGenerator, Uniformizer};
use crate::mc::{replicate, McEstimate};
use crate::sim::AveragingSim;
use crate::torus::{MassProfile, TorusSpec};

/// Largest configuration space handled exactly.
pub const STATE_CAP: usize = 20_000;

/// Largest configuration space for the dense eigensolve.
pub const EIGEN_CAP: usize = 2_000;

/// Particle counts per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupancyConfig {
    counts: Vec<u32>,
}

impl OccupancyConfig {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn particles(&self) -> u32 {
        self.counts.iter().sum()
    }
}

/// `|Ω_k| = C(k + V − 1, k)`, saturating.
pub fn state_count(volume: usize, k: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=k as u128 {
        c = match c.checked_mul(volume as u128 - 1 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    c
}

/// Lexicographic enumeration of `Ω_k` with its inverse.
#[derive(Debug, Clone)]
pub struct StateIndex {
    states: Vec<OccupancyConfig>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl StateIndex {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &OccupancyConfig {
        &self.states[i]
    }

    pub fn states(&self) -> &[OccupancyConfig] {
        &self.states
    }

    pub fn index_of(&self, counts: &[u32]) -> Option<usize> {
        self.lookup.get(counts).copied()
    }
}

/// All configurations of `k` particles, in lexicographic order of the count
/// vectors.
pub fn enumerate_states(spec: TorusSpec, k: usize) -> Result<StateIndex> {
    let v = spec.volume();
    let size = state_count(v, k);
    if size > STATE_CAP as u128 {
        return Err(Error::StateSpaceTooLarge { size, cap: STATE_CAP as u128 });
    }
    let mut states = Vec::with_capacity(size as usize);
    let mut counts = vec![0u32; v];
    fn fill(pos: usize, left: u32, counts: &mut Vec<u32>, out: &mut Vec<OccupancyConfig>) {
        if pos + 1 == counts.len() {
            counts[pos] = left;
            out.push(OccupancyConfig::new(counts.clone()));
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            fill(pos + 1, left - c, counts, out);
        }
    }
    fill(0, k as u32, &mut counts, &mut states);
    let lookup = states.iter().enumerate().map(|(i, s)| (s.counts.clone(), i)).collect();
    Ok(StateIndex { states, lookup })
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `k! / Π_x ζ(x)!`.
pub fn multinomial_coefficient(counts: &[u32]) -> f64 {
    let mut c = 1.0f64;
    let mut placed = 0u32;
    for &n in counts {
        // running product of binomials C(placed + n, n), exact while below 2^53
        for i in 1..=n {
            c = c * (placed + i) as f64 / i as f64;
        }
        placed += n;
    }
    c.round()
}

/// `Multinomial(k, η)` mass of a configuration.
pub fn multinomial_pmf(counts: &[u32], eta: &[f64]) -> f64 {
    let k: u32 = counts.iter().sum();
    let mut log = ln_factorial(k);
    for (&c, &p) in counts.iter().zip(eta) {
        if c == 0 {
            continue;
        }
        if p <= 0.0 {
            return 0.0;
        }
        log += c as f64 * p.ln() - ln_factorial(c);
    }
    log.exp()
}

fn binomial_half(m: u32) -> Vec<f64> {
    let scale = 2f64.powi(m as i32);
    (0..=m).map(|b| multinomial_coefficient(&[b, m - b]) / scale).collect()
}

/// Exact model of the `k`-particle splitting process.
#[derive(Debug, Clone)]
pub struct SplittingModel {
    spec: TorusSpec,
    k: usize,
    index: StateIndex,
    uniformizer: Uniformizer,
    stationary: Vec<f64>,
}

/// Generator of the splitting process with its multinomial equilibrium.
pub fn build_splitting_generator(spec: TorusSpec, k: usize) -> Result<SplittingModel> {
    let index = enumerate_states(spec, k)?;
    let edges = spec.edges();
    let tables: Vec<Vec<f64>> = (0..=k as u32).map(binomial_half).collect();
    let rows = index
        .states
        .iter()
        .map(|s| {
            let mut row = Vec::new();
            let mut next = s.counts.clone();
            for &(x, y) in &edges {
                let m = s.counts[x] + s.counts[y];
                if m == 0 {
                    continue;
                }
                for (b, &prob) in tables[m as usize].iter().enumerate() {
                    let b = b as u32;
                    if b == s.counts[x] {
                        continue;
                    }
                    next[x] = b;
                    next[y] = m - b;
                    row.push((index.lookup[&next], prob));
                }
                next[x] = s.counts[x];
                next[y] = s.counts[y];
            }
            row
        })
        .collect();
    let generator = SparseGenerator::from_rows(rows)?;
    let lambda = (spec.dim() * spec.volume()) as f64;
    let total = (spec.volume() as f64).powi(k as i32);
    let stationary = index.states.iter().map(|s| multinomial_coefficient(&s.counts) / total).collect();
    Ok(SplittingModel { spec, k, index, uniformizer: Uniformizer::new(generator, lambda)?, stationary })
}

impl SplittingModel {
    pub fn spec(&self) -> TorusSpec {
        self.spec
    }

    pub fn particles(&self) -> usize {
        self.k
    }

    pub fn states(&self) -> &StateIndex {
        &self.index
    }

    pub fn generator(&self) -> &SparseGenerator {
        self.uniformizer.generator()
    }

    /// `Multinomial(k, π)`.
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// `max |μ(ζ)Q(ζ,ζ') − μ(ζ')Q(ζ',ζ)|`.
    pub fn detailed_balance_error(&self) -> f64 {
        let q = self.generator();
        let mu = &self.stationary;
        (0..q.len())
            .flat_map(|i| q.row(i).map(move |(j, r)| (i, j, r)))
            .map(|(i, j, r)| (mu[i] * r - mu[j] * q.rate(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// Law at time `t` from an initial law on configurations.
    pub fn evolve(&self, start: &[f64], t: f64, tol: f64) -> Result<Vec<f64>> {
        self.uniformizer.propagate(start, t, tol, Direction::Forward)
    }

    /// Law at time `t` from a single configuration.
    pub fn evolve_from(&self, state: usize, t: f64, tol: f64) -> Result<Vec<f64>> {
        let mut start = vec![0.0; self.index.len()];
        start[state] = 1.0;
        self.evolve(&start, t, tol)
    }

    /// `½ Σ |law − μ|`, evaluated as `1 − Σ min(law, μ)` so that a Dirac
    /// law at `ζ` gives exactly `1 − μ(ζ)`.
    pub fn tv_to_equilibrium(&self, law: &[f64]) -> f64 {
        1.0 - law.iter().zip(&self.stationary).map(|(a, b)| a.min(*b)).sum::<f64>()
    }
}

/// Worst-case distance `d_k(t)` at each time, maximizing over Dirac starts.
pub fn exact_tv_curve(model: &SplittingModel, times: &[f64], tol: f64) -> Result<Vec<f64>> {
    let per_start: Vec<Vec<f64>> = (0..model.index.len())
        .into_par_iter()
        .map(|s| {
            let mut start = vec![0.0; model.index.len()];
            start[s] = 1.0;
            let mut now = 0.0;
            let mut out = Vec::with_capacity(times.len());
            for &t in times {
                if t < now {
                    return Err(Error::GridMismatch("times must be nondecreasing".into()));
                }
                start = model.evolve(&start, t - now, tol / times.len() as f64)?;
                now = t;
                out.push(model.tv_to_equilibrium(&start));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok((0..times.len()).map(|i| per_start.iter().map(|row| row[i]).fold(0.0, f64::max)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// Smallest nonzero eigenvalue of `−Q`.
    pub gap: f64,
    /// Single-walk gap `1 − cos(2π/N)`.
    pub expected: f64,
    pub pass: bool,
}

/// Spectral gap of the `k`-particle generator by dense symmetric eigensolve.
pub fn spectral_gap_check(model: &SplittingModel) -> Result<GapReport> {
    let n = model.index.len();
    if n > EIGEN_CAP {
        return Err(Error::StateSpaceTooLarge { size: n as u128, cap: EIGEN_CAP as u128 });
    }
    let q = model.generator();
    let root: Vec<f64> = model.stationary.iter().map(|m| m.sqrt()).collect();
    // D^{1/2} (−Q) D^{−1/2} is symmetric under detailed balance
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = q.exit_rate(i);
        for (j, r) in q.row(i) {
            let s = -r * root[i] / root[j];
            m[(i, j)] += 0.5 * s;
            m[(j, i)] += 0.5 * s;
        }
    }
    let eig = SymmetricEigen::try_new(m, 1e-14, 10_000).ok_or_else(|| Error::Eigen("no convergence".into()))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    let gap = values
        .iter()
        .copied()
        .find(|v| *v > 1e-9)
        .ok_or_else(|| Error::Eigen("generator has no nonzero eigenvalue".into()))?;
    let expected = SpectralData::new(model.spec.side())?.gap();
    Ok(GapReport { gap, expected, pass: (gap - expected).abs() <= 1e-8 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntertwiningRow {
    pub state: OccupancyConfig,
    pub exact: f64,
    pub estimate: McEstimate,
    pub pass: bool,
}

/// Largest standard error accepted per configuration.
pub const INTERTWINING_MAX_SE: f64 = 1e-2;

/// `μ_{k,ξ} P_t^k` exactly against `E[Multinomial(k, η_t^ξ)]` by Monte Carlo.
pub fn intertwining_check(
    xi: &MassProfile,
    k: usize,
    t: f64,
    replicas: usize,
    seed: u64,
) -> Result<Vec<IntertwiningRow>> {
    let model = build_splitting_generator(xi.spec(), k)?;
    let states = model.index.states();
    let start: Vec<f64> = states.iter().map(|s| multinomial_pmf(s.counts(), xi.values())).collect();
    let exact = model.evolve(&start, t, DEFAULT_TOL)?;
    let sim = AveragingSim::new(xi.spec());
    let est = replicate(replicas, seed, states.len(), |rng| {
        let mut eta = xi.values().to_vec();
        sim.advance(&mut eta, 0.0, t, rng, |_, _| {})?;
        Ok(states.iter().map(|s| multinomial_pmf(s.counts(), &eta)).collect())
    })?;
    if let Some(e) = est.iter().find(|e| e.std_error > INTERTWINING_MAX_SE) {
        return Err(Error::InsufficientReplicas(format!("standard error {:.3e} per configuration", e.std_error)));
    }
    Ok(states
        .iter()
        .zip(exact)
        .zip(est)
        .map(|((s, x), e)| IntertwiningRow { state: s.clone(), exact: x, estimate: e, pass: e.agrees_with(x, 3.0) })
        .collect())
}

/// `T(a) = (t_rel/2)(log k + a w_k)` with `w_k = 1 ∨ log k / N^d`, clipped at
/// zero; the flag reports clipping.
pub fn cutoff_time(spec: TorusSpec, k: usize, a: f64) -> Result<(f64, bool)> {
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one particle".into()));
    }
    let t_rel = SpectralData::new(spec.side())?.t_rel();
    let log_k = (k as f64).ln();
    let w = (log_k / spec.volume() as f64).max(1.0);
    let t = 0.5 * t_rel * (log_k + a * w);
    Ok(if t < 0.0 { (0.0, true) } else { (t, false) })
}

/// `E‖η_t/π − 1‖₂²` from a Dirac start, exactly: `N^d S_t(0,0) − 1` from the
/// difference kernel, or from the coupled walks when `N = 3`.
pub fn l2_squared_exact(spec: TorusSpec, t: f64) -> Result<f64> {
    let vol = spec.volume() as f64;
    if spec.side() >= 4 {
        let k = kernel_vector(&build_generator(spec)?, t, DEFAULT_TOL)?;
        Ok(vol * k.values[0] - 1.0)
    } else {
        let crw = CoupledWalks::new(spec)?;
        let mut start = vec![0.0; crw.generator().len()];
        start[0] = 1.0;
        let law = crw.law(&start, t, DEFAULT_TOL)?;
        let v = spec.volume();
        Ok(vol * (0..v).map(|x| law[x * v + x]).sum::<f64>() - 1.0)
    }
}

/// `√(e k) (E‖η_t/π − 1‖₂²)^{1/2}`.
pub fn l2_upper_bound(spec: TorusSpec, k: usize, t: f64) -> Result<f64> {
    Ok((std::f64::consts::E * k as f64).sqrt() * l2_squared_exact(spec, t)?.max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffPoint {
    pub a: f64,
    pub t: f64,
    pub clipped: bool,
    /// `None` outside exact mode.
    pub tv_exact: Option<f64>,
    pub l2_upper_bound: f64,
}

/// `d_k(T(a))` on an increasing `a` grid, with the `L²` upper bound.
pub fn cutoff_curve(spec: TorusSpec, k: usize, a_grid: &[f64]) -> Result<Vec<CutoffPoint>> {
    if a_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::GridMismatch("a grid must be nondecreasing".into()));
    }
    let times: Vec<(f64, bool)> = a_grid.iter().map(|&a| cutoff_time(spec, k, a)).collect::<Result<_>>()?;
    let tv = match build_splitting_generator(spec, k) {
        Ok(model) => {
            let ts: Vec<f64> = times.iter().map(|p| p.0).collect();
            Some(exact_tv_curve(&model, &ts, DEFAULT_TOL)?)
        }
        Err(Error::StateSpaceTooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    a_grid
        .iter()
        .zip(&times)
        .enumerate()
        .map(|(i, (&a, &(t, clipped)))| {
            Ok(CutoffPoint {
                a,
                t,
                clipped,
                tv_exact: tv.as_ref().map(|v| v[i]),
                l2_upper_bound: l2_upper_bound(spec, k, t)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::VertexIndex;

    fn spec(d: usize, n: usize) -> TorusSpec {
        TorusSpec::new(d, n).unwrap()
    }

    #[test]
    fn state_counts() {
        assert_eq!(enumerate_states(spec(1, 3), 2).unwrap().len(), 6);
        assert_eq!(enumerate_states(spec(1, 3), 1).unwrap().len(), 3);
        assert_eq!(enumerate_states(spec(1, 4), 3).unwrap().len(), 20);
        assert_eq!(state_count(16, 4), 3876);
        assert!(enumerate_states(spec(1, 8), 100).is_err());
        let idx = enumerate_states(spec(2, 3), 3).unwrap();
        for (i, s) in idx.states().iter().enumerate() {
            assert_eq!(idx.index_of(s.counts()), Some(i));
            assert_eq!(s.particles(), 3);
        }
        assert!(idx.states().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn single_particle_is_the_random_walk() {
        let s = spec(1, 5);
        let m = build_splitting_generator(s, 1).unwrap();
        for x in 0..5 {
            let mut counts = vec![0u32; 5];
            counts[x] = 1;
            let i = m.states().index_of(&counts).unwrap();
            for y in 0..5 {
                let mut other = vec![0u32; 5];
                other[y] = 1;
                let j = m.states().index_of(&other).unwrap();
                let expected = if s.are_adjacent(x, y) { 0.5 } else { 0.0 };
                if i != j {
                    assert_eq!(m.generator().rate(i, j), expected);
                }
            }
        }
    }

    #[test]
    fn stationary_and_binomial_rows() {
        let m = build_splitting_generator(spec(1, 3), 2).unwrap();
        let idx = m.states();
        let mu = |c: [u32; 3]| m.stationary()[idx.index_of(&c).unwrap()];
        assert!((mu([2, 0, 0]) - 1.0 / 9.0).abs() < 1e-15);
        assert!((mu([1, 1, 0]) - 2.0 / 9.0).abs() < 1e-15);
        assert!(m.detailed_balance_error() < 1e-12);
        // the edge {0,1} turns (2,0,0) into (1,1,0) at rate 1/2 and (0,2,0) at 1/4
        let from = idx.index_of(&[2, 0, 0]).unwrap();
        assert_eq!(m.generator().rate(from, idx.index_of(&[1, 1, 0]).unwrap()), 0.5);
        assert_eq!(m.generator().rate(from, idx.index_of(&[0, 2, 0]).unwrap()), 0.25);
    }

    #[test]
    fn tv_curve_examples() {
        let m = build_splitting_generator(spec(1, 3), 2).unwrap();
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let curve = exact_tv_curve(&m, &times, 1e-12).unwrap();
        assert!((curve[0] - 8.0 / 9.0).abs() < 1e-15);
        assert!(curve.windows(2).all(|w| w[1] <= w[0] + 1e-14));
        let late = exact_tv_curve(&m, &[60.0], 1e-12).unwrap();
        assert!(late[0] < 1e-12);
    }

    #[test]
    fn gap_matches_single_walk() {
        let r = spectral_gap_check(&build_splitting_generator(spec(1, 4), 1).unwrap()).unwrap();
        assert!((r.gap - 1.0).abs() < 1e-8);
        for k in 1..=3 {
            let r = spectral_gap_check(&build_splitting_generator(spec(1, 3), k).unwrap()).unwrap();
            assert!((r.gap - 1.5).abs() < 1e-8 && r.pass);
        }
    }

    #[test]
    fn cutoff_time_example() {
        let (t, clipped) = cutoff_time(spec(1, 8), 100, 0.0).unwrap();
        let t_rel = 1.0 / (1.0 - (std::f64::consts::PI / 4.0).cos());
        assert!(!clipped);
        assert!((t - t_rel / 2.0 * 100f64.ln()).abs() < 1e-12);
        assert!((t - 7.86).abs() < 5e-3);
        assert!(cutoff_time(spec(1, 8), 100, -10.0).unwrap().1);
    }

    #[test]
    fn l2_routes_agree_for_side_four() {
        let s = spec(1, 4);
        let t = 0.8;
        let vol = 4.0;
        let kernel = l2_squared_exact(s, t).unwrap();
        let crw = CoupledWalks::new(s).unwrap();
        let mut start = vec![0.0; 16];
        start[0] = 1.0;
        let law = crw.law(&start, t, 1e-13).unwrap();
        let direct = vol * (0..4).map(|x| law[x * 4 + x]).sum::<f64>() - 1.0;
        assert!((kernel - direct).abs() < 1e-11);
    }

    #[test]
    fn intertwining_at_time_zero_is_exact() {
        let s = spec(1, 3);
        let xi = MassProfile::dirac(s, VertexIndex(0)).unwrap();
        for row in intertwining_check(&xi, 2, 0.0, 10, 1).unwrap() {
            assert!((row.exact - row.estimate.mean).abs() < 1e-15);
        }
    }
}
