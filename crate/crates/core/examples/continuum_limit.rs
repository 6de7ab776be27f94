//! Rescaled distances and tested masses against the continuum heat kernel.

use std::f64::consts::PI;

use gossip_torus::continuum::{hydrodynamic_check, limit_profile_compare, lp_norm_continuum};

fn main() -> gossip_torus::Result<()> {
    let times = [0.05, 0.1, 0.2];
    println!("continuum L1 norms: {:?}", times.map(|t| lp_norm_continuum(t, 1.0, 1).unwrap()));

    let report = limit_profile_compare(1, &[8, 16, 32], &times, 1.0, 0, 0)?;
    for row in &report.rows {
        println!(
            "N = {:>2} t = {:.2}: discrete {:.5}, continuum {:.5}, error x N {:.4}",
            row.n, row.t, row.discrete_value, row.continuum_value, row.discrepancy_times_n
        );
    }

    let g = |u: &[f64]| 1.0 + 0.5 * (2.0 * PI * u[0]).cos();
    let psi = |u: &[f64]| (2.0 * PI * u[0]).cos();
    let hydro = hydrodynamic_check(&g, &psi, 1, &[8, 16, 32], &[0.05], 400, 5)?;
    for row in &hydro.rows {
        println!("N = {:>2}: tested mass error {:.3e} ± {:.1e}", row.n, row.lhs, row.std_error);
    }
    println!("hydrodynamic check passes: {}", hydro.pass);
    Ok(())
}
