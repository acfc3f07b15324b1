//! `compass`: sampling, exact-oracle audits, and sweep analysis for
//! corrupted compass percolation, from the command line.
//!
//! Exit codes: 0 success, 1 internal error (I/O), 2 parameter error,
//! 3 infeasible enumeration/fit/estimation, 4 audit inequality violated.

mod commands;
mod manifest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use corrupted_compass::{Error, LatticeSpec};
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "compass",
    version,
    about = "Simulator, exact enumeration oracle, and analysis toolkit for corrupted compass percolation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Print ball and sphere sizes plus the neighbor layout of a lattice.
    LatticeInfo(LatticeInfoArgs),
    /// Sample one configuration and dump it (optionally with a decision-tree trace).
    Sample(SampleArgs),
    /// Monte Carlo estimate of the one-arm probability at a single (n, p).
    Theta(ThetaArgs),
    /// Monte Carlo sweep over radii and parameter values.
    Sweep(SweepArgs),
    /// Exact one-arm polynomial (and optional audits) by full enumeration.
    Oracle(OracleArgs),
    /// Exact inequality audits: Russo, OSSS, revealment, influence, differential.
    Audit(AuditArgs),
    /// Fit exponential decay of the arm probability in n.
    Decay(DecayArgs),
    /// Locate the threshold from crossings of the empirical arm curves.
    Pc(PcArgs),
    /// Check the linear lower bound above an estimated threshold.
    Meanfield(MeanfieldArgs),
    /// Closed-form blocking-bound constants (and optional construction check).
    Constants(ConstantsArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum LatticeTag {
    Z1,
    Z2,
    Z3,
    Tri,
}

impl LatticeTag {
    pub fn spec(self) -> LatticeSpec {
        match self {
            LatticeTag::Z1 => LatticeSpec::Hypercubic(1),
            LatticeTag::Z2 => LatticeSpec::Hypercubic(2),
            LatticeTag::Z3 => LatticeSpec::Hypercubic(3),
            LatticeTag::Tri => LatticeSpec::Triangular,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Evenly spaced parameter grid, written `lo:hi:steps` (inclusive ends).
#[derive(Clone)]
pub struct PGrid(pub Vec<f64>);

impl FromStr for PGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts.as_slice() else {
            return Err(format!("grid {s:?} is not of the form lo:hi:steps"));
        };
        let lo: f64 = lo.parse().map_err(|_| format!("bad grid start {lo:?}"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("bad grid end {hi:?}"))?;
        let steps: usize = steps
            .parse()
            .map_err(|_| format!("bad step count {steps:?}"))?;
        if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
            return Err(format!("grid {s:?} needs finite lo ≤ hi"));
        }
        if steps == 0 {
            return Err("grid needs at least one step".into());
        }
        if steps == 1 {
            if lo != hi {
                return Err("a one-point grid needs lo = hi".into());
            }
            return Ok(PGrid(vec![lo]));
        }
        let pts = (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect();
        Ok(PGrid(pts))
    }
}

/// Inclusive radius window, written `lo:hi`.
#[derive(Copy, Clone)]
pub struct NWindow(pub u32, pub u32);

impl FromStr for NWindow {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("window {s:?} is not of the form lo:hi"))?;
        let lo = lo.parse().map_err(|_| format!("bad window start {lo:?}"))?;
        let hi = hi.parse().map_err(|_| format!("bad window end {hi:?}"))?;
        if lo > hi {
            return Err(format!("window {s:?} needs lo ≤ hi"));
        }
        Ok(NWindow(lo, hi))
    }
}

/// Inclusive parameter window, written `lo:hi`.
#[derive(Copy, Clone)]
pub struct PWindow(pub f64, pub f64);

impl FromStr for PWindow {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("window {s:?} is not of the form lo:hi"))?;
        let lo: f64 = lo.parse().map_err(|_| format!("bad window start {lo:?}"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("bad window end {hi:?}"))?;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(format!("window {s:?} needs finite lo ≤ hi"));
        }
        Ok(PWindow(lo, hi))
    }
}

#[derive(Args)]
pub struct LatticeInfoArgs {
    #[arg(long, value_enum)]
    pub lattice: LatticeTag,
    /// Largest radius to tabulate.
    #[arg(long, default_value_t = 8)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write here (plus a .manifest.json sidecar) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub lattice: LatticeTag,
    /// Ball radius.
    #[arg(long)]
    pub n: u32,
    /// Corruption parameter in [0, 1].
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also run the sphere-seeded decision tree and dump its revelation trace.
    #[arg(long)]
    pub trace: bool,
    /// Seed sphere radius for --trace.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ThetaArgs {
    #[arg(long, value_enum)]
    pub lattice: LatticeTag,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 10_000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores); never changes the estimate.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub lattice: LatticeTag,
    /// Radii, comma-separated (e.g. 10,20,40).
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u32>,
    /// Single parameter value (alternative to --p-grid).
    #[arg(long, conflicts_with = "p_grid", required_unless_present = "p_grid")]
    pub p: Option<f64>,
    /// Parameter grid lo:hi:steps (inclusive ends).
    #[arg(long)]
    pub p_grid: Option<PGrid>,
    #[arg(long, default_value_t = 10_000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub lattice: LatticeTag,
    #[arg(long)]
    pub n: u32,
    /// Parameter values (rationals like 1/2 or decimals) at which to also
    /// run the full audit suite; may be empty.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<String>,
    /// Raise the enumeration budget from 36 to 48 total state bits.
    #[arg(long)]
    pub allow_big_enumeration: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct AuditArgs {
    #[arg(long, value_enum)]
    pub lattice: LatticeTag,
    #[arg(long)]
    pub n: u32,
    /// Parameter values (rationals like 1/2 or decimals), comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<String>,
    /// Parameter grid lo:hi:steps; each point is audited exactly.
    #[arg(long)]
    pub p_grid: Option<PGrid>,
    #[arg(long)]
    pub allow_big_enumeration: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct DecayArgs {
    /// Sweep CSV to fit (alternative to running a sweep inline).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub lattice: Option<LatticeTag>,
    /// Radii for the inline sweep, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u32>,
    /// Parameter value the decay is fitted at.
    #[arg(long)]
    pub p: f64,
    /// Restrict the fit to radii lo:hi.
    #[arg(long)]
    pub window: Option<NWindow>,
    #[arg(long, default_value_t = 10_000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PcArgs {
    #[arg(long, value_enum)]
    pub lattice: LatticeTag,
    /// Radii whose crossings are located, comma-separated; the largest
    /// gives the headline estimate.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u32>,
    #[arg(long, default_value_t = 10_000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Crossing level in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Bisection iterations (resolution 2^-iters).
    #[arg(long, default_value_t = 24)]
    pub iters: u32,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct MeanfieldArgs {
    /// Sweep CSV to check (alternative to running a sweep inline).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub lattice: Option<LatticeTag>,
    /// Radius for the inline sweep.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u32>,
    /// Parameter grid lo:hi:steps for the inline sweep.
    #[arg(long)]
    pub p_grid: Option<PGrid>,
    /// Threshold estimate the bound is anchored to.
    #[arg(long)]
    pub pc: f64,
    /// Parameter window lo:hi (must sit strictly above --pc).
    #[arg(long)]
    pub window: PWindow,
    #[arg(long, default_value_t = 10_000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ConstantsArgs {
    /// Common vertex degree (≥ 3).
    #[arg(long)]
    pub d: u32,
    /// Corruption level in (0, 1).
    #[arg(long)]
    pub delta: f64,
    /// Also Monte Carlo-check the triangular blocking construction with
    /// this many replicas.
    #[arg(long)]
    pub construction_replicas: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub enum CliError {
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Core(
                Error::Parameter(_) | Error::InvalidVertex(_) | Error::OutOfRegion(_),
            ) => ExitCode::from(2),
            CliError::Core(
                Error::EnumerationTooLarge { .. }
                | Error::FitInfeasible(_)
                | Error::EstimationFailed(_),
            ) => ExitCode::from(3),
            CliError::Io(_) => ExitCode::from(1),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
