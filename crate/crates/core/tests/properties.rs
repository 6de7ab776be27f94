//! Structural invariants over randomly drawn inputs.

use gossip_torus::diff_kernel::{
    build_generator, f_g_closed, f_g_sampled, series_partial_sum, u_exact, DEFAULT_TOL,
};
use gossip_torus::heat::{heat_flow_profile, kernel_1d_values};
use gossip_torus::mc::CompensatedSum;
use gossip_torus::sampled::TimeGrid;
use gossip_torus::sim::{apply_update, simulate, AveragingSim};
use gossip_torus::splitting::{build_splitting_generator, exact_tv_curve};
use gossip_torus::torus::{dirichlet_form, lp_distance};
use gossip_torus::{MassProfile, TorusSpec, VertexIndex};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_spec() -> impl Strategy<Value = TorusSpec> {
    prop_oneof![(3usize..12).prop_map(|n| (1, n)), (3usize..6).prop_map(|n| (2, n)), Just((3, 3))]
        .prop_map(|(d, n)| TorusSpec::new(d, n).unwrap())
}

fn profile(spec: TorusSpec) -> impl Strategy<Value = MassProfile> {
    prop::collection::vec(0.0f64..1.0, spec.volume())
        .prop_filter("positive total", |w| w.iter().sum::<f64>() > 1e-3)
        .prop_map(move |w| MassProfile::from_weights(spec, &w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_round_trip(spec in small_spec(), raw in prop::collection::vec(-50i64..50, 3)) {
        let coords = &raw[..spec.dim()];
        let v = spec.canonical_index(coords).unwrap();
        let back = spec.coords_of(v).unwrap();
        for (c, b) in coords.iter().zip(&back) {
            prop_assert_eq!(c.rem_euclid(spec.side() as i64) as usize, *b);
        }
    }

    #[test]
    fn adjacency_is_symmetric_with_degree_2d(spec in small_spec(), seed in 0usize..1000) {
        let v = seed % spec.volume();
        let nb = spec.neighbors(VertexIndex(v)).unwrap();
        prop_assert_eq!(nb.len(), 2 * spec.dim());
        for w in nb {
            prop_assert!(spec.are_adjacent(w.get(), v));
            prop_assert_eq!(spec.norm1(spec.sub(w.get(), v)), 1);
        }
    }

    #[test]
    fn kernel_is_symmetric_and_unimodal(n in 3usize..40, t in 0.0f64..30.0) {
        let p = kernel_1d_values(t, n).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 1..n {
            prop_assert!((p[i] - p[n - i]).abs() < 1e-14);
        }
        for i in 0..n / 2 {
            prop_assert!(p[i + 1] <= p[i] + 1e-14);
        }
    }

    #[test]
    fn f_dominated_by_scaled_g(spec in small_spec(), t in 0.0f64..20.0) {
        let (f, g) = f_g_closed(t, spec).unwrap();
        let d = spec.dim() as f64;
        prop_assert!(f >= 0.0 && g >= 0.0);
        prop_assert!(f <= (d + 0.5) * g + 1e-13, "f={} g={}", f, g);
    }

    #[test]
    fn defect_generator_rows_conserve_and_columns_sum_to_zero(spec in small_spec()) {
        prop_assume!(spec.side() >= 4);
        let q = build_generator(spec).unwrap().matrix().to_dense();
        let v = q.len();
        for (i, row) in q.iter().enumerate() {
            prop_assert!(row.iter().sum::<f64>().abs() < 1e-13);
            for (j, &r) in row.iter().enumerate() {
                if i != j {
                    prop_assert!(r >= 0.0);
                }
            }
        }
        // counting measure is stationary
        for j in 0..v {
            prop_assert!(q.iter().map(|row| row[j]).sum::<f64>().abs() < 1e-13);
        }
    }

    #[test]
    fn update_conserves_mass_and_contracts(
        (spec, eta) in small_spec().prop_flat_map(|s| (Just(s), profile(s))),
        seed in any::<u64>(),
        p in 1.0f64..=2.0,
    ) {
        let edges = spec.edges();
        let edge = edges[(seed as usize) % edges.len()];
        let next = apply_update(&eta, edge).unwrap();
        prop_assert!((next.total_mass() - 1.0).abs() < 1e-12);
        let pi = MassProfile::uniform(spec);
        prop_assert!(lp_distance(&next, &pi, p).unwrap() <= lp_distance(&eta, &pi, p).unwrap() + 1e-12);
    }

    #[test]
    fn lp_distance_is_a_metric(spec in small_spec(), seed in any::<u64>(), p in 1.0f64..=2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || {
            let w: Vec<f64> = (0..spec.volume()).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
            MassProfile::from_weights(spec, &w).unwrap()
        };
        let (a, b, c) = (draw(), draw(), draw());
        let ab = lp_distance(&a, &b, p).unwrap();
        prop_assert!((ab - lp_distance(&b, &a, p).unwrap()).abs() < 1e-14);
        prop_assert!(ab <= lp_distance(&a, &c, p).unwrap() + lp_distance(&c, &b, p).unwrap() + 1e-12);
        prop_assert_eq!(lp_distance(&a, &a, p).unwrap(), 0.0);
    }

    #[test]
    fn simulation_conserves_mass(spec in small_spec(), seed in any::<u64>(), t in 0.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi = MassProfile::dirac(spec, VertexIndex(0)).unwrap();
        let eta = simulate(&xi, t, &mut rng).unwrap();
        prop_assert!((eta.total_mass() - 1.0).abs() < 1e-12);
        prop_assert!(eta.values().iter().all(|&m| (0.0..=1.0 + 1e-12).contains(&m)));
    }

    #[test]
    fn heat_flow_is_probability(spec in small_spec(), t in 0.0f64..50.0) {
        let h = heat_flow_profile(t, spec).unwrap();
        prop_assert!((h.total_mass() - 1.0).abs() < 1e-12);
        prop_assert!(h.values().iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn dirichlet_form_is_nonnegative_and_vanishes_on_constants(spec in small_spec(), c in -3.0f64..3.0) {
        let constant = vec![c; spec.volume()];
        prop_assert!(dirichlet_form(&constant, spec).unwrap().abs() < 1e-12);
        let bump: Vec<f64> = (0..spec.volume()).map(|x| (x % 3) as f64).collect();
        prop_assert!(dirichlet_form(&bump, spec).unwrap() > 0.0);
    }

    #[test]
    fn compensated_sum_matches_exact_integer_total(values in prop::collection::vec(-1_000_000i64..1_000_000, 1..200)) {
        // scaled integers are exact in binary, so the total is known exactly
        let mut s = CompensatedSum::default();
        for &v in &values {
            s.add(v as f64 * 0.125);
        }
        let exact: i64 = values.iter().sum();
        prop_assert_eq!(s.value(), exact as f64 * 0.125);
    }

    #[test]
    fn mixture_start_is_no_worse_than_worst_vertex(weights in prop::collection::vec(0.0f64..1.0, 6), t in 0.0f64..4.0) {
        // N = 3, k = 2 has six configurations
        let model = build_splitting_generator(TorusSpec::new(1, 3).unwrap(), 2).unwrap();
        let total: f64 = weights.iter().sum();
        prop_assume!(total > 1e-6);
        let start: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let law = model.evolve(&start, t, DEFAULT_TOL).unwrap();
        let worst = exact_tv_curve(&model, &[t], DEFAULT_TOL).unwrap()[0];
        prop_assert!(model.tv_to_equilibrium(&law) <= worst + 1e-12);
    }

    #[test]
    fn splitting_in_detailed_balance(n in 3usize..6, k in 1usize..4) {
        let model = build_splitting_generator(TorusSpec::new(1, n).unwrap(), k).unwrap();
        prop_assert!(model.detailed_balance_error() < 1e-12);
        prop_assert!((model.stationary().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn u_is_sandwiched(d in 1usize..3, n in 4usize..9) {
        prop_assume!(d == 1 || n <= 6);
        let spec = TorusSpec::new(d, n).unwrap();
        let grid = TimeGrid::new(1.0 / 16.0, 6.0).unwrap();
        let (_, g) = f_g_sampled(grid, spec).unwrap();
        let u = u_exact(grid, spec, DEFAULT_TOL).unwrap();
        let upper = series_partial_sum(&g.scaled(d as f64 + 0.5), 200).unwrap();
        for i in 0..grid.len() {
            prop_assert!(g.values()[i] <= u.values()[i] + 1e-12);
            prop_assert!(u.values()[i] <= upper.values()[i] + 1e-9);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&u.values()[i]));
        }
    }

    #[test]
    fn partial_sums_increase(d in 1usize..3, n in 4usize..9, terms in 1usize..20) {
        let spec = TorusSpec::new(d, n).unwrap();
        let grid = TimeGrid::new(1.0 / 8.0, 4.0).unwrap();
        let (_, g) = f_g_sampled(grid, spec).unwrap();
        let gt = g.scaled(d as f64 + 0.5);
        let a = series_partial_sum(&gt, terms).unwrap();
        let b = series_partial_sum(&gt, terms + 1).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!(x <= y);
        }
    }

    #[test]
    fn event_budget_is_enforced(seed in any::<u64>()) {
        let spec = TorusSpec::new(1, 5).unwrap();
        let sim = AveragingSim::new(spec).with_event_budget(3);
        let xi = MassProfile::dirac(spec, VertexIndex(0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // 5 edges at rate 1 over t = 100 ring far more than 3 times
        prop_assert!(sim.simulate(&xi, 100.0, &mut rng).is_err());
    }
}
