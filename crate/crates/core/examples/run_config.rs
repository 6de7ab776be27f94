//! Runs an experiment configuration in-process and prints its CSV.
//!
//! `cargo run --example run_config -- configs/splitting-tv.conf`

use gossip_torus::experiments::{parse_config, run};

fn main() -> gossip_torus::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/splitting-tv.conf".into());
    let config = parse_config(&std::fs::read_to_string(&path)?)?;
    let table = run(&config)?;
    print!("{}", table.to_csv());
    eprintln!("{}", table.summary.trim_end());
    Ok(())
}
