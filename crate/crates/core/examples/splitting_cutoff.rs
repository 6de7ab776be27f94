//! Exact total variation of the binomial splitting process and the cutoff
//! window.

use gossip_torus::diff_kernel::DEFAULT_TOL;
use gossip_torus::splitting::{build_splitting_generator, cutoff_curve, exact_tv_curve, spectral_gap_check};
use gossip_torus::TorusSpec;

fn main() -> gossip_torus::Result<()> {
    let spec = TorusSpec::new(1, 5)?;
    let k = 3;
    let model = build_splitting_generator(spec, k)?;
    let gap = spectral_gap_check(&model)?;
    println!("N = 5, k = {k}: {} states, gap {:.6} (walk gap {:.6})", model.states().len(), gap.gap, gap.expected);

    let times = [0.0, 1.0, 2.0, 4.0, 8.0];
    for (t, d) in times.iter().zip(exact_tv_curve(&model, &times, DEFAULT_TOL)?) {
        println!("t = {t:>3}: worst-case TV {d:.6}");
    }

    let window: Vec<f64> = (-4..=4).map(|a| a as f64).collect();
    for p in cutoff_curve(spec, k, &window)? {
        println!(
            "a = {:>4}: T = {:.3}, TV {}, L2 bound {:.4}",
            p.a,
            p.t,
            p.tv_exact.map_or("n/a".to_string(), |v| format!("{v:.4}")),
            p.l2_upper_bound
        );
    }
    Ok(())
}
