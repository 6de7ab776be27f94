//! Event-driven simulation of the averaging process.
//!
//! Every edge carries a unit-rate Poisson clock. Instead of `dN^d` clocks we
//! draw one exponential of rate `dN^d` and then a uniform edge, which has the
//! same law. When an edge `{x, y}` rings both masses become their average.

use rand::Rng;

use crate::error::{Error, Result};
use crate::heat::heat_flow_profile;
use crate::mc::{replicate, McEstimate, ReplicaRng};
use crate::torus::{dirichlet_unchecked, lp_power_slices, lp_power_to_uniform, MassProfile, TorusSpec};

/// Default cap on the number of updates in one trajectory.
pub const DEFAULT_EVENT_BUDGET: u64 = 1 << 34;

/// One ring of an edge clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateEvent {
    pub time: f64,
    pub edge: (usize, usize),
}

/// `η^{xy}`: replaces the masses at `x` and `y` by their average.
pub fn apply_update(eta: &MassProfile, edge: (usize, usize)) -> Result<MassProfile> {
    let spec = eta.spec();
    if !spec.are_adjacent(edge.0, edge.1) {
        return Err(Error::NotAdjacent(edge.0, edge.1));
    }
    let mut out = eta.clone();
    average(out.values_mut(), edge.0, edge.1);
    Ok(out)
}

#[inline]
fn average(eta: &mut [f64], x: usize, y: usize) {
    let m = 0.5 * (eta[x] + eta[y]);
    eta[x] = m;
    eta[y] = m;
}

/// Simulator bound to one torus.
#[derive(Debug, Clone)]
pub struct AveragingSim {
    spec: TorusSpec,
    edges: Vec<(usize, usize)>,
    total_rate: f64,
    event_budget: u64,
}

impl AveragingSim {
    pub fn new(spec: TorusSpec) -> Self {
        let edges = spec.edges();
        let total_rate = edges.len() as f64;
        Self { spec, edges, total_rate, event_budget: DEFAULT_EVENT_BUDGET }
    }

    pub fn with_event_budget(mut self, budget: u64) -> Self {
        self.event_budget = budget;
        self
    }

    pub fn spec(&self) -> TorusSpec {
        self.spec
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Advances `eta` from time `now` to `until`, calling `on_event` for each
    /// update. Returns the number of updates.
    pub fn advance<R: Rng>(
        &self,
        eta: &mut [f64],
        now: f64,
        until: f64,
        rng: &mut R,
        mut on_event: impl FnMut(UpdateEvent, &[f64]),
    ) -> Result<u64> {
        let mut t = now;
        let mut events = 0u64;
        loop {
            let u: f64 = rng.random();
            t += -(1.0 - u).ln() / self.total_rate;
            if t > until {
                // memoryless: the overshooting clock is simply discarded
                return Ok(events);
            }
            events += 1;
            if events > self.event_budget {
                return Err(Error::EventBudget(self.event_budget));
            }
            let edge = self.edges[rng.random_range(0..self.edges.len())];
            average(eta, edge.0, edge.1);
            on_event(UpdateEvent { time: t, edge }, eta);
        }
    }

    /// Endpoint `η_t` of one trajectory started from `xi`.
    pub fn simulate<R: Rng>(&self, xi: &MassProfile, t: f64, rng: &mut R) -> Result<MassProfile> {
        self.check_start(xi, t)?;
        let mut eta = xi.values().to_vec();
        self.advance(&mut eta, 0.0, t, rng, |_, _| {})?;
        Ok(MassProfile::new_unchecked(self.spec, eta))
    }

    /// Like [`simulate`](Self::simulate) but also returns the update sequence.
    pub fn simulate_recorded<R: Rng>(
        &self,
        xi: &MassProfile,
        t: f64,
        rng: &mut R,
    ) -> Result<(MassProfile, Vec<UpdateEvent>)> {
        self.check_start(xi, t)?;
        let mut eta = xi.values().to_vec();
        let mut events = Vec::new();
        self.advance(&mut eta, 0.0, t, rng, |e, _| events.push(e))?;
        Ok((MassProfile::new_unchecked(self.spec, eta), events))
    }

    fn check_start(&self, xi: &MassProfile, t: f64) -> Result<()> {
        if xi.spec() != self.spec {
            return Err(Error::SpecMismatch);
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time {t} must be finite and nonnegative")));
        }
        Ok(())
    }
}

/// Free-function form of [`AveragingSim::simulate`].
pub fn simulate<R: Rng>(xi: &MassProfile, t: f64, rng: &mut R) -> Result<MassProfile> {
    AveragingSim::new(xi.spec()).simulate(xi, t, rng)
}

/// Replays a recorded update sequence (events up to time `t`) on `xi`.
pub fn replay(xi: &MassProfile, events: &[UpdateEvent], t: f64) -> Result<MassProfile> {
    let spec = xi.spec();
    let mut eta = xi.values().to_vec();
    for e in events.iter().take_while(|e| e.time <= t) {
        if !spec.are_adjacent(e.edge.0, e.edge.1) {
            return Err(Error::NotAdjacent(e.edge.0, e.edge.1));
        }
        average(&mut eta, e.edge.0, e.edge.1);
    }
    Ok(MassProfile::new_unchecked(spec, eta))
}

/// Running value of `Σ_{edges} (ψ(x) − ψ(y))²` under averaging updates.
///
/// Only the edges touching the two updated vertices change, so an update
/// costs `O(d)` instead of `O(d N^d)`.
#[derive(Debug, Clone)]
pub struct IncrementalDirichlet {
    spec: TorusSpec,
    edge_sum: f64,
}

impl IncrementalDirichlet {
    pub fn new(spec: TorusSpec, eta: &[f64]) -> Self {
        let edge_sum = dirichlet_unchecked(eta, spec) * 2.0 * spec.volume() as f64;
        Self { spec, edge_sum }
    }

    fn local(&self, eta: &[f64], x: usize, y: usize) -> f64 {
        let mut s = 0.0;
        for z in self.spec.neighbors_of(x) {
            s += (eta[x] - eta[z]).powi(2);
        }
        for z in self.spec.neighbors_of(y) {
            if z != x {
                s += (eta[y] - eta[z]).powi(2);
            }
        }
        s
    }

    /// Averages `eta` across `{x, y}` and updates the running sum.
    pub fn update(&mut self, eta: &mut [f64], x: usize, y: usize) {
        let before = self.local(eta, x, y);
        average(eta, x, y);
        let after = self.local(eta, x, y);
        self.edge_sum += after - before;
    }

    /// `ℰ(η/π)` for the mass vector the tracker has followed.
    pub fn dirichlet_of_density(&self) -> f64 {
        let v = self.spec.volume() as f64;
        self.edge_sum * v * v / (2.0 * v)
    }
}

/// A moment functional estimated by [`mc_functionals`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// `E‖η_t/π − 1‖_p^p`.
    LpPower(f64),
    /// `E[ℰ(η_t/π)]`.
    Dirichlet,
    /// `E‖η_t/π − π_t/π‖_2^2`.
    Fluctuation,
}

impl Functional {
    pub fn name(&self) -> &'static str {
        match self {
            Functional::LpPower(_) => "lp_power",
            Functional::Dirichlet => "dirichlet",
            Functional::Fluctuation => "fluctuation",
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            Functional::LpPower(p) => Some(*p),
            Functional::Fluctuation => Some(2.0),
            Functional::Dirichlet => None,
        }
    }
}

/// One line of the moment table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalRow {
    pub t: f64,
    pub functional: Functional,
    pub estimate: McEstimate,
}

/// Monte Carlo estimates of the `L^p` moments, mean Dirichlet form and
/// fluctuation around the heat flow at each time of `times`.
pub fn mc_functionals(
    xi: &MassProfile,
    times: &[f64],
    ps: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<Vec<FunctionalRow>> {
    if times.is_empty() {
        return Err(Error::GridMismatch("empty time grid".into()));
    }
    if let Some(p) = ps.iter().find(|p| !(1.0..=2.0).contains(*p)) {
        return Err(Error::ExponentOutOfRange(*p));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times[0] < 0.0 {
        return Err(Error::GridMismatch("times must be nonnegative and nondecreasing".into()));
    }
    let spec = xi.spec();
    let sim = AveragingSim::new(spec);
    // π_t^ξ = Σ_y ξ(y) π_t(y, ·)
    let means: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| heat_flow_from(xi, t))
        .collect::<Result<_>>()?;
    let functionals: Vec<Functional> = ps
        .iter()
        .map(|&p| Functional::LpPower(p))
        .chain([Functional::Dirichlet, Functional::Fluctuation])
        .collect();
    let width = functionals.len() * times.len();
    let est = replicate(replicas, seed, width, |rng: &mut ReplicaRng| {
        let mut eta = xi.values().to_vec();
        let mut now = 0.0;
        let mut out = Vec::with_capacity(width);
        for (k, &t) in times.iter().enumerate() {
            sim.advance(&mut eta, now, t, rng, |_, _| {})?;
            now = t;
            for f in &functionals {
                out.push(match f {
                    Functional::LpPower(p) => lp_power_to_uniform(&eta, *p),
                    Functional::Dirichlet => {
                        let v = spec.volume() as f64;
                        dirichlet_unchecked(&eta, spec) * v * v
                    }
                    Functional::Fluctuation => lp_power_slices(&eta, &means[k], 2.0),
                });
            }
        }
        Ok(out)
    })?;
    let mut rows = Vec::with_capacity(width);
    for (k, &t) in times.iter().enumerate() {
        for (j, f) in functionals.iter().enumerate() {
            rows.push(FunctionalRow { t, functional: *f, estimate: est[k * functionals.len() + j] });
        }
    }
    Ok(rows)
}

/// Heat flow from a general initial profile, by convolution with `π_t(0, ·)`.
pub fn heat_flow_from(xi: &MassProfile, t: f64) -> Result<Vec<f64>> {
    let spec = xi.spec();
    let kernel = heat_flow_profile(t, spec)?;
    let k = kernel.values();
    let mut out = vec![0.0; spec.volume()];
    for (y, &m) in xi.values().iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        for (x, o) in out.iter_mut().enumerate() {
            *o += m * k[spec.sub(x, y)];
        }
    }
    Ok(out)
}

/// Outcome of the quenched chunk-walk comparison.
#[derive(Debug, Clone)]
pub struct ChunkWalkReport {
    pub quenched: Vec<f64>,
    pub empirical: Vec<f64>,
    pub walkers: usize,
    /// Pearson statistic over vertices with positive quenched mass.
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    /// Walkers found where the quenched profile has no mass.
    pub off_support: usize,
}

impl ChunkWalkReport {
    /// Not rejected at three standard deviations of the chi-square law.
    pub fn passes(&self) -> bool {
        let k = self.degrees_of_freedom as f64;
        self.off_support == 0 && self.chi_square <= k + 3.0 * (2.0 * k).sqrt()
    }
}

/// Runs `walkers` independent chunk walks from the origin through a fixed
/// update sequence. At each update touching its site the walker moves across
/// the edge with probability 1/2; its law is the quenched `η_t(0, ·)`.
pub fn chunk_walk_check<R: Rng>(
    spec: TorusSpec,
    events: &[UpdateEvent],
    t: f64,
    walkers: usize,
    rng: &mut R,
) -> Result<ChunkWalkReport> {
    if walkers == 0 {
        return Err(Error::InvalidArgument("need at least one walker".into()));
    }
    let origin = MassProfile::dirac(spec, crate::torus::VertexIndex(0))?;
    let quenched = replay(&origin, events, t)?.into_values();
    let active: Vec<(usize, usize)> = events.iter().take_while(|e| e.time <= t).map(|e| e.edge).collect();
    let mut counts = vec![0usize; spec.volume()];
    for _ in 0..walkers {
        let mut pos = 0usize;
        for &(x, y) in &active {
            if (pos == x || pos == y) && rng.random::<bool>() {
                pos = if pos == x { y } else { x };
            }
        }
        counts[pos] += 1;
    }
    let w = walkers as f64;
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / w).collect();
    let mut chi_square = 0.0;
    let mut support = 0usize;
    let mut off_support = 0usize;
    for (q, &c) in quenched.iter().zip(&counts) {
        if *q > 0.0 {
            support += 1;
            let expected = q * w;
            chi_square += (c as f64 - expected).powi(2) / expected;
        } else {
            off_support += c;
        }
    }
    Ok(ChunkWalkReport {
        quenched,
        empirical,
        walkers,
        chi_square,
        degrees_of_freedom: support.saturating_sub(1),
        off_support,
    })
}
