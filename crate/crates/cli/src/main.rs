mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Ctx;
use report::{Output, RunConfig, Status, Timer};

#[derive(Parser)]
#[command(name = "cuspvar", version, about = "Deformation varieties of cusped 3-manifolds")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct RunArgs {
    /// Manifold spec file.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_residual: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol_dedup: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol_loop: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol_vol_eq: f64,
    /// Seeds tried per fiber before a count is declared stable.
    #[arg(long, global = true, default_value_t = 24)]
    pub budget: usize,
    /// Directory for reports; without it the JSON report goes to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write path CSVs (needs --out).
    #[arg(long, global = true)]
    pub csv: bool,
    /// Include wall-clock timings in the report.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the complete structure.
    Complete,
    /// Eliminate to the eigenvalue variety.
    Apoly {
        /// Sample this many points numerically.
        #[arg(long)]
        sample: Option<usize>,
    },
    /// Solve a Dehn filling and report its volume.
    Fill {
        /// Filling coefficients such as `1,5` or `1,5;inf`.
        #[arg(long)]
        kappa: Option<String>,
    },
    /// Track from a filling to a shifted u and back.
    Track {
        #[arg(long)]
        kappa: Option<String>,
        /// Shift of every u, as `re,im`.
        #[arg(long, default_value = "0.1,0.2", value_parser = parse_pair)]
        delta: (f64, f64),
    },
    /// Volumes of a list of fillings (default: the dense set).
    Volume {
        #[arg(long = "kappa")]
        kappas: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<i64>>,
    },
    /// Integrals of eta around closed loops.
    Loops {
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        kappa: Option<String>,
    },
    /// Count the fiber of the restriction map over a filling.
    Fiber {
        #[arg(long)]
        kappa: Option<String>,
    },
    /// Z/2 cohomology and the sl2 degree bound.
    H1z2,
    /// Run every check in order.
    Certify {
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<i64>>,
        #[arg(long, default_value_t = 10)]
        loops: usize,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `re,im`")?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| e.to_string());
    Ok((p(a)?, p(b)?))
}

fn default_primes(cusps: usize) -> Vec<i64> {
    if cusps == 1 {
        vec![5, 7, 11]
    } else {
        vec![5, 7]
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Complete => "complete",
        Command::Apoly { .. } => "apoly",
        Command::Fill { .. } => "fill",
        Command::Track { .. } => "track",
        Command::Volume { .. } => "volume",
        Command::Loops { .. } => "loops",
        Command::Fiber { .. } => "fiber",
        Command::H1z2 => "h1z2",
        Command::Certify { .. } => "certify",
    }
}

fn run(cli: Cli) -> Result<Status, String> {
    let args = cli.run;
    let path = args.spec.clone().ok_or("--spec is required")?;
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let spec = cuspvar::manifold::parse_spec(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let gs = cuspvar::repvar::build_gauged_system(&spec).map_err(|e| e.to_string())?;
    let config = RunConfig {
        command: command_name(&cli.command).to_string(),
        spec: path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
        seed: args.seed,
        tol_residual: args.tol_residual,
        tol_dedup: args.tol_dedup,
        tol_loop: args.tol_loop,
        tol_vol_eq: args.tol_vol_eq,
        budget: args.budget,
    };
    let out = Output {
        dir: args.out.clone(),
        csv: args.csv,
        timings: args.timings,
    };
    let cusps = spec.cusp_count();
    let ctx = Ctx {
        spec,
        gs,
        args,
        out,
        timer: Timer::default(),
        config,
    };
    match cli.command {
        Command::Complete => commands::complete(ctx),
        Command::Apoly { sample } => commands::apoly(ctx, sample),
        Command::Fill { kappa } => commands::fill(ctx, kappa.as_deref()),
        Command::Track { kappa, delta } => commands::track(ctx, kappa.as_deref(), delta),
        Command::Volume { kappas, primes } => {
            commands::volume(ctx, &kappas, &primes.unwrap_or_else(|| default_primes(cusps)))
        }
        Command::Loops { count, kappa } => commands::loops(ctx, kappa.as_deref(), count),
        Command::Fiber { kappa } => commands::fiber(ctx, kappa.as_deref()),
        Command::H1z2 => commands::h1z2(ctx),
        Command::Certify { primes, loops } => {
            commands::certify(ctx, &primes.unwrap_or_else(|| default_primes(cusps)), loops)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
