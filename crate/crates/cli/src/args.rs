use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use recwalk::DEFAULT_MAX_STATES;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "recwalk",
    version,
    about = "Mixing of random walks on Z/G_n with steps drawn from a linear recurrence",
    after_help = "All logarithms in reported bounds are natural logarithms.\n\
                  Exit codes: 0 success, 1 verification failure, 2 usage or domain error."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    /// Largest state count handled with a stored spectrum.
    #[arg(long = "nmax-states", global = true, default_value_t = DEFAULT_MAX_STATES)]
    pub nmax_states: u64,

    /// Target TV distance, as a rational ("1/4") or decimal.
    #[arg(long, global = true, default_value = "1/4")]
    pub epsilon: Epsilon,

    /// Sequence: a preset (pow2, pow3, fib-odd), inline JSON
    /// {"coeffs":[..],"init":[..]}, or @path to a JSON file. Repeatable.
    #[arg(long = "seq", global = true)]
    pub seq: Vec<String>,

    /// Override for the lower growth base used by the general lower bound.
    #[arg(long, global = true)]
    pub eta1: Option<f64>,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Exact mixing times for n = 1..n-max, one column pair per sequence.
    Table(TableArgs),
    /// Eigenvalues of the transition matrix.
    Spectrum(SpectrumArgs),
    /// Exact TV curve up to the mixing time.
    Mix(MixArgs),
    /// Every applicable mixing-time bound, with the exact value when small.
    Bounds(BoundsArgs),
    /// Numerical checks of the eigenvalue inequalities.
    Verify(VerifyArgs),
    /// Seeded Monte Carlo estimate of the TV curve.
    Simulate(SimulateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Table(_) => "table",
            Command::Spectrum(_) => "spectrum",
            Command::Mix(_) => "mix",
            Command::Bounds(_) => "bounds",
            Command::Verify(_) => "verify",
            Command::Simulate(_) => "simulate",
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::Bounds(_) | Command::Verify(_) => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TableArgs {
    #[arg(long = "n-max", default_value_t = 9)]
    pub n_max: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub n: usize,
    /// Keep only the largest eigenvalues by modulus.
    #[arg(long)]
    pub top: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MixArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BoundsArgs {
    /// Single window length; overrides the sweep range.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "n-min", default_value_t = 2)]
    pub n_min: usize,
    #[arg(long = "n-max", default_value_t = 9)]
    pub n_max: usize,
    /// Override for the general lower-bound constant.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    /// eigmod-bound, angle-cover, lifting, multiset-domination,
    /// ubl-consistency or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long = "n-min", default_value_t = 2)]
    pub n_min: usize,
    #[arg(long = "n-max", default_value_t = 8)]
    pub n_max: usize,
    /// Largest c^n for the lifting suite.
    #[arg(long = "lift-cap", default_value_t = 100_000)]
    pub lift_cap: u64,
    /// Largest c^(n-1) for the domination suite.
    #[arg(long = "domination-cap", default_value_t = 100_000)]
    pub domination_cap: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "t-max", default_value_t = 20)]
    pub t_max: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub trajectories: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A TV target kept in the form the user typed it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Epsilon {
    pub text: String,
    pub value: f64,
}

impl FromStr for Epsilon {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let value = match s.split_once('/') {
            Some((p, q)) => {
                let p: u64 = p
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad numerator in `{s}`"))?;
                let q: u64 = q
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad denominator in `{s}`"))?;
                if q == 0 {
                    return Err(format!("zero denominator in `{s}`"));
                }
                p as f64 / q as f64
            }
            None => s
                .parse::<f64>()
                .map_err(|_| format!("`{s}` is not a rational or decimal"))?,
        };
        if !(value > 0.0 && value < 1.0) {
            return Err(format!("epsilon must lie in (0, 1), got {s}"));
        }
        Ok(Self {
            text: s.to_string(),
            value,
        })
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}
