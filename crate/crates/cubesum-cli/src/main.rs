mod commands;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cubesum::Error;

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "cubesum", version, about = "Circle-method computations for sums of three cubes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: Global,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Seed for sampled checks.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Record wall-clock time in the diagnostics.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SumKindArg {
    Triple,
    Power,
    Twisted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Weighted,
    Unweighted,
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    #[value(name = "direct-3d")]
    Direct3d,
    #[value(name = "reduced-1d")]
    Reduced1d,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Complete exponential sums S(q,a), S_k(q,a) and twisted sums.
    Expsum {
        #[arg(long)]
        q: u64,
        #[arg(long, allow_negative_numbers = true)]
        a: i64,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_enum, default_value_t = SumKindArg::Triple)]
        kind: SumKindArg,
        /// Twist for `--kind twisted`.
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        b: i64,
    },
    /// Truncated singular series against its Euler product.
    Series {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        s: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Truncation Q.
        #[arg(long = "Q", default_value_t = cubesum::series::DEFAULT_TRUNCATION)]
        q: u64,
        /// Minimum number of prime-power levels per local factor.
        #[arg(long, default_value_t = cubesum::series::DEFAULT_LEVELS)]
        levels: u32,
    },
    /// Local solution counts M_n(p^h), or the set of sums of three cubes mod p^h.
    Local {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        h: u32,
        #[arg(long, default_value_t = 1)]
        s: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Only this residue, with the orthogonality check.
        #[arg(long)]
        n: Option<u64>,
        /// Report the residues that are sums of three cubes with a unit coordinate.
        #[arg(long)]
        m33: bool,
    },
    /// Exact representation counts R(n), r(n) or R_eta(n), nonzero rows only.
    Reps {
        #[arg(long = "P")]
        p: f64,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Weighted)]
        mode: ModeArg,
        #[arg(long)]
        eta: Option<f64>,
        /// Stop at this n instead of the full range.
        #[arg(long)]
        n_max: Option<u64>,
    },
    /// Dickman's function.
    Rho {
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
    },
    /// Smooth numbers in an arithmetic progression against the Dickman prediction.
    Smoothcount {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        eta: f64,
        #[arg(long = "P")]
        p: f64,
    },
    /// Major-arc dissection.
    Dissect {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        k: u32,
        /// Number of summands, for the xi-regime.
        #[arg(long)]
        s: Option<u32>,
        #[command(flatten)]
        regime: RegimeArgs,
    },
    /// Major and minor arc contributions to R(n) on a sampling grid.
    Arcint {
        #[arg(long = "P")]
        p: f64,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        regime: RegimeArgs,
        /// Minimum grid points per arc.
        #[arg(long, default_value_t = 4)]
        samples: usize,
    },
    /// The oscillatory integral v(beta).
    Vbeta {
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        beta: Vec<f64>,
        #[arg(long = "P")]
        p: f64,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value_t = MethodArg::Reduced1d)]
        method: MethodArg,
        /// Also report the decay constant over beta = 2^j / P^{3k}, j = 0..=J.
        #[arg(long)]
        decay: Option<i32>,
    },
    /// Predicted main term, or its ratio to exact counts over a box.
    Mainterm {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long = "Q", default_value_t = cubesum::predict::DEFAULT_MAIN_TRUNCATION)]
        q: u64,
        /// Compare with R(n) for the box of side P over the top half of its range.
        #[arg(long = "P", conflicts_with = "n")]
        p: Option<f64>,
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// Include the per-n rows of the comparison.
        #[arg(long)]
        rows: bool,
    },
    /// The exact lower-bound chain for r(n) and the multiplicity tail.
    Lowerbound {
        #[arg(long = "P")]
        p: f64,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        eta: f64,
        #[arg(long = "K")]
        big_k: f64,
    },
    /// Parameter table for the sufficient number of variables.
    Table1 {
        #[arg(long, num_args = 1..)]
        k: Vec<u32>,
    },
    /// Second moments of the multiplicity weights and the congruence moment identity.
    Moments {
        #[arg(long = "P", required = true, num_args = 1..)]
        p: Vec<f64>,
        #[arg(long)]
        eta: Option<f64>,
        /// Check the identity at this modulus, at the first P.
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, default_value_t = 1)]
        h: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
    /// Run every module's invariant suite.
    VerifyAll {
        /// Smaller instances.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    /// Use the xi-regime with this exponent (needs --s).
    #[arg(long, conflicts_with = "kappa", requires = "s")]
    pub xi: Option<f64>,
    /// Use the kappa-regime (the default, kappa = 0.2).
    #[arg(long)]
    pub kappa: Option<f64>,
}

pub enum Failure {
    Usage(String),
    Guard(String),
    Verify(String),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Guard(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let started = Instant::now();
    let (report, verified) = commands::dispatch(&cli.command, &cli.global)?;
    let runtime = cli.global.timing.then(|| started.elapsed().as_millis());
    let bytes = output::render(&report, cli.global.format, runtime)?;
    output::emit(&bytes, cli.global.output.as_deref())?;
    if !verified {
        return Err(Failure::Verify("one or more invariant checks failed".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.global.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    }
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::Usage(m))) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Ok(Err(Failure::Guard(m))) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Ok(Err(Failure::Verify(m))) => {
            eprintln!("error: {m}");
            ExitCode::from(4)
        }
        Ok(Err(Failure::Io(e))) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(_) => ExitCode::from(4),
    }
}
