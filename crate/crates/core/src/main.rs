use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gossip_torus::experiments::{list_experiments, parse_config, run, EXIT_CHECK_FAILED};
use gossip_torus::Error;

/// Runs one configured experiment and writes its CSV table.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Experiment configuration (`key = value` lines).
    #[arg(long, value_name = "PATH", required_unless_present = "list")]
    config: Option<PathBuf>,
    /// Replaces the master seed of the configuration.
    #[arg(long, value_name = "OVERRIDE")]
    seed: Option<u64>,
    /// Output directory for the CSV table.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Worker threads; affects speed only.
    #[arg(long, value_name = "M")]
    threads: Option<usize>,
    /// Prints the available experiments and exits.
    #[arg(long)]
    list: bool,
}

fn execute(args: &Args) -> Result<bool, Error> {
    if args.list {
        print!("{}", list_experiments());
        return Ok(true);
    }
    if let Some(m) = args.threads {
        if m == 0 {
            return Err(Error::InvalidArgument("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(m)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    let path = args.config.as_ref().expect("clap enforces --config");
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    let mut config = parse_config(&text).map_err(|e| e.context(path.display().to_string()))?;
    if let Some(seed) = args.seed {
        config = config.with_seed(seed);
    }
    let table = run(&config)?;
    let written = table.write(&args.out, config.output.as_deref())?;
    println!("{}", table.summary.trim_end());
    println!("wrote {}", written.display());
    Ok(table.pass)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
