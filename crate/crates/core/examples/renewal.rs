//! Solves the renewal equation for the difference kernel and checks it
//! against the exact kernel and the series upper bound.

use gossip_torus::diff_kernel::{f_g_sampled, g_integral, renewal_solve, series_sum, u_exact, DEFAULT_TOL};
use gossip_torus::sampled::TimeGrid;
use gossip_torus::TorusSpec;

fn main() -> gossip_torus::Result<()> {
    let spec = TorusSpec::new(2, 6)?;
    let grid = TimeGrid::new(1.0 / 64.0, 8.0)?;
    let (f, g) = f_g_sampled(grid, spec)?;
    let u = renewal_solve(&g, &f)?;
    let exact = u_exact(grid, spec, DEFAULT_TOL)?;
    let upper = series_sum(&g.scaled(spec.dim() as f64 + 0.5), 500)?;

    println!("d=2 N=6, step 1/64, integral of g = {:.6}", g_integral(spec)?);
    println!("series upper bound used {} terms", upper.terms);
    for t in [0.25, 1.0, 4.0, 8.0] {
        println!(
            "t = {t:>4}: renewal {:.8}, exact {:.8}, upper {:.8}",
            u.at(t)?,
            exact.at(t)?,
            upper.values.at(t)?
        );
    }
    Ok(())
}
