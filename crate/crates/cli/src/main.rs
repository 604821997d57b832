mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lipfree::Error;

#[derive(Parser, Debug)]
#[command(
    name = "lipfree",
    version,
    about = "Kantorovich-Rubinstein norms, pair systems and C1 extensions on finite metric spaces"
)]
pub struct Cli {
    /// Arithmetic: exact (rationals and square roots) or f64.
    #[arg(long, value_enum, default_value_t = Mode::Rational, global = true)]
    pub mode: Mode,
    /// Relative duality-gap tolerance in float mode.
    #[arg(long, default_value_t = 1e-9, global = true)]
    pub tol: f64,
    #[arg(long, default_value_t = 1, global = true)]
    pub seed: u64,
    /// Vertex-enumeration cap; sets LIPFREE_CAP.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Rational,
    Float,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build or check pointed metric spaces.
    Space {
        #[command(subcommand)]
        cmd: SpaceCmd,
    },
    /// Norm of a free-space vector with both certificates.
    Norm {
        /// Free-vector JSON; omit with --random.
        file: Option<PathBuf>,
        /// Instead of a file, this many random spaces and vectors from --seed.
        #[arg(long)]
        random: Option<usize>,
        /// Size of each random space.
        #[arg(long, default_value_t = 6)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Pair systems: verification and greedy selection.
    Lemma {
        #[command(subcommand)]
        cmd: LemmaCmd,
    },
    /// Grid approximation and the amalgam and scaling isometries.
    Approx {
        #[command(subcommand)]
        cmd: ApproxCmd,
    },
    /// C1 extension of Lipschitz data on a finite subset of R^d.
    Extend {
        file: PathBuf,
        /// Also write samples of g on the certificate grid as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Accept,
}

#[derive(Subcommand, Debug)]
pub enum SpaceCmd {
    /// The grid A_n = {(i/n^2, j/n^2) : 0 <= i, j <= n}.
    Grid {
        #[arg(long)]
        n: usize,
    },
    /// The scaled grid nA_n.
    Scaled {
        #[arg(long)]
        n: usize,
    },
    /// Amalgam of space files glued at their base points.
    Amalgam {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Euclidean space from {"points": [...], "base": i, "labels"?: [...]}.
    Euclid { file: PathBuf },
    /// Check the metric axioms; prints "ok" or a witness.
    Verify { file: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Primal,
    Dual,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Unbounded,
    Discrete,
    Cluster,
}

#[derive(Subcommand, Debug)]
pub enum LemmaCmd {
    /// Verify a pair-system file.
    Verify { file: PathBuf },
    /// Select a pair system on a space.
    Select {
        #[arg(value_enum)]
        strategy: Strategy,
        space: PathBuf,
        /// Separation constant (discrete).
        #[arg(long)]
        c: Option<String>,
        /// Diameter bound (discrete); defaults to the diameter.
        #[arg(long)]
        d: Option<String>,
        /// Label of the accumulation point (cluster); defaults to the base.
        #[arg(long)]
        a: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ApproxCmd {
    /// Approximate a subspace of F([0,1]^2) by one on a grid (exact mode).
    Claim5 {
        file: PathBuf,
        #[arg(long, default_value = "1/10")]
        eps: String,
    },
    /// Compare a norm on an amalgam with the sum over its summands.
    Amalgam { file: PathBuf },
    /// Transport a vector on nA_n to A_n and compare norms.
    Scaling {
        file: PathBuf,
        #[arg(long)]
        n: usize,
    },
}

/// 1 for a failed check, 3 for an internal certificate failure, 2 otherwise.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::DualityGapExceeded { .. } | Error::Lp(_)) => 3,
        Some(Error::UnverifiedSystem | Error::ChainTooShort(_) | Error::SeparatedSetTooSmall(_) | Error::NoPairsFound) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
