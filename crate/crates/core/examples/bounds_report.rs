//! Checks the concentration, gradient and L² bound shapes on one torus and
//! prints the fitted constants.

use gossip_torus::bounds::{verify_concentration, verify_gradient, verify_l2_bound};
use gossip_torus::heat::SpectralData;
use gossip_torus::sampled::TimeGrid;
use gossip_torus::TorusSpec;

fn main() -> gossip_torus::Result<()> {
    let spec = TorusSpec::new(1, 12)?;
    let t_rel = SpectralData::new(12)?.t_rel();
    let grid = TimeGrid::new(1.0 / 16.0, (6.0 * t_rel).ceil())?;
    let reports = [
        verify_concentration(spec, grid, 2000, 3)?,
        verify_gradient(spec, grid, 0, 0)?,
        verify_l2_bound(spec, grid, 0, 0)?,
    ];
    for r in &reports {
        println!("{}", r.summary());
    }
    Ok(())
}
