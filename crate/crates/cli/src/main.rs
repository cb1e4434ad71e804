//! Single-binary front end: parse run configs, dispatch analyses, emit CSV
//! and JSON results.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure.

mod commands;
mod config;
mod output;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "fisherpli",
    version,
    about = "Quantile robustness analysis under Fisher-sphere input perturbations"
)]
struct Cli {
    /// Worker threads (default: available parallelism). Results never depend
    /// on the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory for CSV/JSON results.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Euler,
    AdamsMoulton,
}

impl From<MethodArg> for fisherpli::IntegratorMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Euler => fisherpli::IntegratorMethod::Euler,
            MethodArg::AdamsMoulton => fisherpli::IntegratorMethod::AdamsMoulton,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoModel {
    Ishigami,
    Flood,
}

#[derive(Subcommand)]
enum Command {
    /// Fisher information matrix of one distribution.
    Fim {
        #[arg(long)]
        family: String,
        /// Comma-separated parameter vector, e.g. `0,1`.
        #[arg(long)]
        theta: String,
        /// Truncation support `lo,hi` (omit for the unbounded normal).
        #[arg(long)]
        support: Option<String>,
    },
    /// Integrate one geodesic; emits per-step CSV (t, q, p, H, delta_H).
    Geodesic {
        #[arg(long)]
        family: String,
        #[arg(long)]
        theta: String,
        #[arg(long)]
        support: Option<String>,
        /// Fisher radius reached at t = 1.
        #[arg(long)]
        delta: f64,
        /// Direction angle in the whitened tangent plane (radians).
        #[arg(long, default_value_t = 0.0)]
        angle: f64,
        #[arg(long, value_enum, default_value = "adams-moulton")]
        method: MethodArg,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Sample a Fisher sphere; emits per-direction endpoint CSV.
    Sphere {
        #[arg(long)]
        family: String,
        #[arg(long)]
        theta: String,
        #[arg(long)]
        support: Option<String>,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 100)]
        k: usize,
        #[arg(long, value_enum, default_value = "adams-moulton")]
        method: MethodArg,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// PLI of one explicit perturbed density against the config's sample.
    Pli {
        #[arg(long)]
        config: PathBuf,
        /// Input number (1-based, matching the x1..xd sample columns).
        #[arg(long)]
        input: usize,
        /// Perturbed density as spec JSON.
        #[arg(long)]
        perturbed: String,
    },
    /// OF-PLI curves over the config's δ grid for every Fisher-capable input.
    Ofpli {
        #[arg(long)]
        config: PathBuf,
    },
    /// E-PLI parameter sweeps (standard-space mean shift / Gaussian variance).
    Epli {
        #[arg(long)]
        config: PathBuf,
    },
    /// Pick-freeze Sobol and target Sobol indices of a built-in model.
    Sobol {
        #[arg(long)]
        config: PathBuf,
    },
    /// Canned end-to-end analysis of a built-in model.
    Demo {
        #[arg(value_enum)]
        model: DemoModel,
        #[arg(long)]
        seed: u64,
        /// Sample size.
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Sphere directions per radius.
        #[arg(long, default_value_t = 100)]
        k: usize,
        /// Geodesic integration steps.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Bootstrap replicates for OF-PLI intervals (0 disables).
        #[arg(long, default_value_t = 100)]
        b: usize,
    },
}

fn classify(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<fisherpli::Error>() {
            return match core {
                fisherpli::Error::Numerical(_) | fisherpli::Error::SphereEmpty { .. } => 2,
                _ => 1,
            };
        }
    }
    1
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: flag `threads`: {e}");
            std::process::exit(1);
        }
    }
    let started = std::time::Instant::now();
    match commands::dispatch(&cli) {
        Ok(()) => {
            println!("done in {:.3} s", started.elapsed().as_secs_f64());
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(classify(&e));
        }
    }
}
