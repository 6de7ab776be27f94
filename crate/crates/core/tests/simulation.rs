//! Monte Carlo behaviour of the averaging process against exact values.

use gossip_torus::diff_kernel::{build_generator, kernel_vector, u_exact, DEFAULT_TOL};
use gossip_torus::heat::heat_flow_profile;
use gossip_torus::mc::{replica_rng, replicate};
use gossip_torus::sampled::TimeGrid;
use gossip_torus::sim::{chunk_walk_check, mc_functionals, replay, AveragingSim, Functional};
use gossip_torus::{MassProfile, TorusSpec, VertexIndex};

#[test]
fn mean_profile_is_heat_flow() {
    for (d, n, t) in [(1, 7, 2.0), (2, 4, 1.0)] {
        let spec = TorusSpec::new(d, n).unwrap();
        let sim = AveragingSim::new(spec);
        let origin = MassProfile::dirac(spec, VertexIndex(0)).unwrap();
        let est = replicate(20_000, 31, spec.volume(), |rng| Ok(sim.simulate(&origin, t, rng)?.into_values())).unwrap();
        let heat = heat_flow_profile(t, spec).unwrap();
        for (e, h) in est.iter().zip(heat.values()) {
            assert!(e.agrees_with(*h, 4.0), "d={d} N={n}: {} vs {h} (se {})", e.mean, e.std_error);
        }
    }
}

#[test]
fn second_moment_and_dirichlet_identities() {
    // E‖η_t/π − 1‖₂² = N^d S_t(0,0) − 1 and E[ℰ(η_t/π)] = d N^d u(t)
    for (d, n) in [(1, 6), (2, 4)] {
        let spec = TorusSpec::new(d, n).unwrap();
        let times = [0.5, 1.0, 3.0];
        let origin = MassProfile::dirac(spec, VertexIndex(0)).unwrap();
        let rows = mc_functionals(&origin, &times, &[2.0], 20_000, 17).unwrap();
        let gen = build_generator(spec).unwrap();
        let vol = spec.volume() as f64;
        let grid = TimeGrid::new(0.5, 3.0).unwrap();
        let u = u_exact(grid, spec, DEFAULT_TOL).unwrap();
        for row in rows {
            let exact = match row.functional {
                Functional::LpPower(_) => vol * kernel_vector(&gen, row.t, DEFAULT_TOL).unwrap().values[0] - 1.0,
                Functional::Dirichlet => d as f64 * vol * u.at(row.t).unwrap(),
                Functional::Fluctuation => continue,
            };
            assert!(
                row.estimate.agrees_with(exact, 4.0),
                "{} at t={} d={d} N={n}: {} vs {exact}",
                row.functional.name(),
                row.t,
                row.estimate.mean
            );
        }
    }
}

#[test]
fn replay_reproduces_trajectory() {
    let spec = TorusSpec::new(2, 5).unwrap();
    let sim = AveragingSim::new(spec);
    let xi = MassProfile::from_weights(spec, &(0..25).map(|x| (x % 4) as f64 + 0.5).collect::<Vec<_>>()).unwrap();
    let mut rng = replica_rng(5, 0);
    let (eta, events) = sim.simulate_recorded(&xi, 3.0, &mut rng).unwrap();
    assert_eq!(replay(&xi, &events, 3.0).unwrap(), eta);
    assert!(events.windows(2).all(|w| w[0].time < w[1].time));
}

#[test]
fn chunk_walk_follows_quenched_profile() {
    let spec = TorusSpec::new(1, 9).unwrap();
    let sim = AveragingSim::new(spec);
    let origin = MassProfile::dirac(spec, VertexIndex(0)).unwrap();
    for seed in 0..3 {
        let mut rng = replica_rng(100 + seed, 0);
        let (_, events) = sim.simulate_recorded(&origin, 2.0, &mut rng).unwrap();
        let mut walk_rng = replica_rng(200 + seed, 0);
        let report = chunk_walk_check(spec, &events, 2.0, 50_000, &mut walk_rng).unwrap();
        assert!(report.passes(), "seed {seed}: chi2 {} on {} dof", report.chi_square, report.degrees_of_freedom);
    }
}

#[test]
fn same_seed_same_estimates_any_thread_count() {
    let spec = TorusSpec::new(1, 8).unwrap();
    let origin = MassProfile::dirac(spec, VertexIndex(0)).unwrap();
    let go = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_functionals(&origin, &[1.0, 2.0], &[1.0, 1.5], 1500, 9).unwrap())
    };
    let a = go(1);
    let b = go(3);
    let c = go(8);
    for ((x, y), z) in a.iter().zip(&b).zip(&c) {
        assert_eq!(x.estimate.mean.to_bits(), y.estimate.mean.to_bits());
        assert_eq!(x.estimate.mean.to_bits(), z.estimate.mean.to_bits());
        assert_eq!(x.estimate.std_error.to_bits(), z.estimate.std_error.to_bits());
    }
}

#[test]
fn distinct_streams_are_independent() {
    let spec = TorusSpec::new(1, 5).unwrap();
    let sim = AveragingSim::new(spec);
    let origin = MassProfile::dirac(spec, VertexIndex(0)).unwrap();
    let a = sim.simulate(&origin, 1.0, &mut replica_rng(1, 0)).unwrap();
    let b = sim.simulate(&origin, 1.0, &mut replica_rng(1, 1)).unwrap();
    let c = sim.simulate(&origin, 1.0, &mut replica_rng(1, 0)).unwrap();
    assert_ne!(a, b);
    assert_eq!(a, c);
}
