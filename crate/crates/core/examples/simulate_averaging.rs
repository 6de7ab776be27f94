//! Runs the averaging process from a point mass and compares Monte Carlo
//! moments with the exact second-moment kernel.

use gossip_torus::diff_kernel::{build_generator, kernel_vector, DEFAULT_TOL};
use gossip_torus::mc::replica_rng;
use gossip_torus::sim::{mc_functionals, AveragingSim, Functional};
use gossip_torus::{MassProfile, TorusSpec, VertexIndex};

fn main() -> gossip_torus::Result<()> {
    let spec = TorusSpec::new(1, 10)?;
    let origin = MassProfile::dirac(spec, VertexIndex(0))?;

    let sim = AveragingSim::new(spec);
    let (eta, events) = sim.simulate_recorded(&origin, 3.0, &mut replica_rng(1, 0))?;
    println!("one trajectory to t = 3: {} updates", events.len());
    let shown: Vec<String> = eta.values().iter().map(|m| format!("{m:.3}")).collect();
    println!("  masses [{}]", shown.join(" "));

    let gen = build_generator(spec)?;
    let vol = spec.volume() as f64;
    for row in mc_functionals(&origin, &[1.0, 4.0], &[2.0], 5000, 7)? {
        let exact = match row.functional {
            Functional::LpPower(_) => Some(vol * kernel_vector(&gen, row.t, DEFAULT_TOL)?.values[0] - 1.0),
            _ => None,
        };
        print!("t = {} {:<12} {:.5} ± {:.5}", row.t, row.functional.name(), row.estimate.mean, row.estimate.std_error);
        match exact {
            Some(x) => println!("  (exact {x:.5})"),
            None => println!(),
        }
    }
    Ok(())
}
