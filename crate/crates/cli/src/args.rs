use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entropy_binpack::generate::Family;
use entropy_binpack::pipeline::Profile;

#[derive(Debug, Parser)]
#[command(name = "binpack", version, about = "Bin packing solvers and experiment driver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and write a certificate and a packing dump.
    Solve(SolveArgs),
    /// Re-audit a packing dump against an instance file.
    Verify(VerifyArgs),
    /// Run solvers over generated instances and print a CSV gap report.
    Bench(BenchArgs),
    /// Generate a random instance.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum)]
pub enum Algo {
    Entropy,
    LpRound,
    Kk,
    Ffd,
    Brute,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Entropy => "entropy",
            Algo::LpRound => "lp-round",
            Algo::Kk => "kk",
            Algo::Ffd => "ffd",
            Algo::Brute => "brute",
        }
    }

    /// Whether the parameter profile affects this solver.
    pub fn uses_profile(self) -> bool {
        matches!(self, Algo::Entropy | Algo::LpRound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Bpp,
    Json,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value = "entropy")]
    pub algo: Algo,
    /// Instance file, BPPLIB text or native JSON.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "desk", value_parser = parse_profile)]
    pub profile: Profile,
    /// Directory for `<stem>.<algo>.cert.json` and `<stem>.<algo>.packing.json`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_name = "FILE")]
    pub packing: PathBuf,
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Certificate whose `cost` must match the packing.
    #[arg(long, value_name = "FILE")]
    pub cert: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ffd,kk,entropy")]
    pub algos: Vec<Algo>,
    #[arg(long, value_parser = parse_family, default_value = "uniform")]
    pub family: Family,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Number of seeds per size.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    #[arg(long, default_value = "desk", value_parser = parse_profile)]
    pub profile: Profile,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Fill `runtime_ms` with wall-clock times (otherwise 0, keeping reports reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "bpp")]
    pub format: Format,
    /// Write here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse()
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}
