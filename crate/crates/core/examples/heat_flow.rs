//! Heat flow of a single mass unit and its Dirichlet energy.

use gossip_torus::heat::{dirichlet_heat, heat_flow_profile, kernel_1d_values, xi, SpectralData};
use gossip_torus::TorusSpec;

fn main() -> gossip_torus::Result<()> {
    let n = 16;
    let spectral = SpectralData::new(n)?;
    println!("N = {n}: gap {:.6}, relaxation time {:.3}", spectral.gap(), spectral.t_rel());

    for t in [0.5, 2.0, 8.0, 32.0] {
        let p = kernel_1d_values(t, n)?;
        println!("t = {t:>5}: p_t(0) = {:.6}, p_t(N/2) = {:.6}", p[0], p[n / 2]);
    }

    let spec = TorusSpec::new(2, 8)?;
    for t in [1.0, 4.0, 16.0] {
        let h = heat_flow_profile(t, spec)?;
        println!(
            "d=2 N=8 t = {t:>4}: h(0) = {:.6}, energy {:.4e}, benchmark {:.4e}",
            h.values()[0],
            dirichlet_heat(t, spec)?,
            xi(t, spec)?
        );
    }
    Ok(())
}
