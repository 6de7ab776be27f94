//! Fitted constants across side lengths. The bounds fix no numerical
//! constants, so what is checked is that each fitted constant stays within
//! a factor 3 as `N` grows.

use gossip_torus::bounds::{verify_concentration, verify_gradient, verify_l2_bound, verify_local_smoothness, BoundReport};
use gossip_torus::continuum::local_clt_discrepancy;
use gossip_torus::heat::{dirichlet_heat, xi, SpectralData};
use gossip_torus::sampled::TimeGrid;
use gossip_torus::{Result, TorusSpec};

const FACTOR: f64 = 3.0;
const FAMILIES: [(usize, [usize; 3]); 2] = [(1, [8, 12, 16]), (2, [4, 6, 8])];

fn grid_for(n: usize) -> TimeGrid {
    let t_rel = SpectralData::new(n).unwrap().t_rel();
    TimeGrid::new(1.0 / 16.0, (6.0 * t_rel + 1.0).ceil()).unwrap()
}

fn assert_stable(label: &str, values: &[(usize, f64)]) {
    let lo = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let hi = values.iter().map(|v| v.1).fold(0.0, f64::max);
    println!("{label}: {values:?}");
    assert!(lo > 0.0 && hi / lo < FACTOR, "{label} varies by {:.2}: {values:?}", hi / lo);
}

fn constant_over(
    d: usize,
    sides: &[usize],
    name: &str,
    run: impl Fn(TorusSpec, TimeGrid) -> Result<BoundReport>,
) -> Vec<(usize, f64)> {
    sides
        .iter()
        .map(|&n| {
            let report = run(TorusSpec::new(d, n).unwrap(), grid_for(n)).unwrap();
            assert!(report.passed(), "{}", report.summary());
            (n, report.constant(name).unwrap())
        })
        .collect()
}

#[test]
fn gradient_constant_is_stable() {
    for (d, sides) in FAMILIES {
        let c = constant_over(d, &sides, "fitted_c", |s, g| verify_gradient(s, g, 0, 0));
        assert_stable(&format!("gradient C, d={d}"), &c);
    }
}

#[test]
fn l2_constant_is_stable() {
    for (d, sides) in FAMILIES {
        let c = constant_over(d, &sides, "fitted_c", |s, g| verify_l2_bound(s, g, 0, 0));
        assert_stable(&format!("L2 C, d={d}"), &c);
    }
}

#[test]
fn concentration_upper_constant_is_stable() {
    for (d, sides) in FAMILIES {
        let c = constant_over(d, &sides, "c_upper", |s, g| verify_concentration(s, g, 0, 0));
        assert_stable(&format!("concentration c_upper, d={d}"), &c);
    }
}

#[test]
fn concentration_lower_constant_is_stable_in_one_dimension() {
    let (d, sides) = FAMILIES[0];
    let c = constant_over(d, &sides, "c_lower", |s, g| verify_concentration(s, g, 0, 0));
    assert_stable("concentration c_lower, d=1", &c);
}

#[test]
fn concentration_lower_constant_is_stable_in_two_dimensions() {
    let (d, sides) = FAMILIES[1];
    let c = constant_over(d, &sides, "c_lower", |s, g| verify_concentration(s, g, 0, 0));
    assert_stable("concentration c_lower, d=2", &c);
}

#[test]
fn smoothness_constant_is_stable() {
    for (d, sides) in FAMILIES {
        let c = constant_over(d, &sides, "implied_c1", verify_local_smoothness);
        assert_stable(&format!("smoothness C1, d={d}"), &c);
    }
}

#[test]
fn dirichlet_energy_of_heat_flow_tracks_benchmark() {
    for d in [1usize, 2] {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for n in [8usize, 12, 16] {
            let spec = TorusSpec::new(d, n).unwrap();
            let ratios: Vec<f64> = grid_for(n)
                .times()
                .skip(1)
                .map(|t| dirichlet_heat(t, spec).unwrap() / xi(t, spec).unwrap())
                .collect();
            lower.push((n, ratios.iter().copied().fold(f64::INFINITY, f64::min)));
            upper.push((n, ratios.iter().copied().fold(0.0, f64::max)));
        }
        assert_stable(&format!("Dirichlet/benchmark lower, d={d}"), &lower);
        assert_stable(&format!("Dirichlet/benchmark upper, d={d}"), &upper);
    }
}

#[test]
fn local_clt_error_scales_like_one_over_n() {
    for d in [1usize, 2] {
        let sides: &[usize] = if d == 1 { &[8, 16, 32] } else { &[8, 16] };
        for t in [0.05, 0.25] {
            let scaled: Vec<(usize, f64)> = sides
                .iter()
                .map(|&n| {
                    let spec = TorusSpec::new(d, n).unwrap();
                    (n, local_clt_discrepancy(spec, t).unwrap() * n as f64)
                })
                .collect();
            // bounded by C/N: the scaled error must not grow
            let first = scaled[0].1;
            assert!(scaled.iter().all(|s| s.1 <= FACTOR * first), "d={d} t={t}: {scaled:?}");
        }
    }
}
