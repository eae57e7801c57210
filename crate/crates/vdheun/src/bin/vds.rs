use clap::Parser;
use std::path::PathBuf;
use vdheun::cli::{run, ExperimentConfig};

/// Spectral experiments for the relativistic Heun difference operators.
#[derive(Parser)]
#[command(name = "vds", version, about)]
struct Args {
    /// One of: specfun-check, identities, spectrum, eigens, free-gold,
    /// poly-asym, cluster, weyl-scan, all.
    subcommand: String,
    /// TOML or JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the quadrature size.
    #[arg(long)]
    nodes: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let args = Args::parse();
    let mut config = match &args.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("config error: {e}");
                std::process::exit(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(nodes) = args.nodes {
        config.nodes = nodes;
    }
    if let Some(out) = args.out {
        config.out = out;
    }
    std::process::exit(run(&args.subcommand, &config));
}
