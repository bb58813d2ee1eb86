//! `ptkr`: command-line front end for the PT-symmetric kicked rotor
//! diagnostics.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ptkr", version, about = "Spectral statistics and OTOCs of the PT-symmetric kicked rotor")]
pub struct Cli {
    /// TOML run configuration; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Eigensolver: auto, faer, cayley or hqr.
    #[arg(long, global = true)]
    pub backend: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, true).ok()
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Complex quasienergy spectrum of the Floquet operator.
    Spectrum(RotorArgs),
    /// Complex level-spacing ratio of a spectrum.
    Clsr(SpectrumInputArgs),
    /// Real level-spacing ratio of the real parts of a spectrum.
    Rlsr(SpectrumInputArgs),
    /// Unfolded nearest-neighbour spacings.
    Unfold(UnfoldArgs),
    /// Spacing ratios of a random-matrix ensemble.
    Rmt(RmtArgs),
    /// Raw and normalized OTOC time series.
    Otoc(OtocArgs),
    /// Lyapunov exponent from the early growth of the normalized OTOC.
    Lyapunov(LyapunovArgs),
    /// (K, lambda) phase-diagram sweep.
    Sweep(SweepArgs),
    /// SVG figure from output files.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RotorArgs {
    /// Kick strength.
    #[arg(long = "K", value_name = "K")]
    pub k: Option<f64>,
    /// Non-Hermiticity parameter.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Effective Planck constant.
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Momentum cutoff; the basis is k = -N ..= N-1.
    #[arg(long = "N", value_name = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative amplitude of the random mass jitter.
    #[arg(long)]
    pub jitter: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct WavepacketArgs {
    /// Momentum index of the wavepacket centre.
    #[arg(long, allow_negative_numbers = true)]
    pub k0: Option<i64>,
    /// Wavepacket width in momentum indices.
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumInputArgs {
    #[command(flatten)]
    pub rotor: RotorArgs,
    /// Read a spectrum (CSV or JSON) instead of computing one. `clsr` also
    /// accepts its own ratio CSV.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnfoldMode {
    /// Complex unfolding when PT symmetry is broken, real otherwise.
    Auto,
    Real,
    Complex,
}

#[derive(Debug, Clone, Args)]
pub struct UnfoldArgs {
    #[command(flatten)]
    pub spectrum: SpectrumInputArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: UnfoldMode,
    /// Half-width of the local-mean window for real unfolding.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    /// Neighbour order for complex unfolding.
    #[arg(long, default_value_t = ptkr::stats::DEFAULT_UNFOLD_ORDER)]
    pub order: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RmtArgs {
    /// ginue, ginoe, aidagger, ptsymmetric, goe, poissonreal or poisson2d.
    #[arg(long)]
    pub ensemble: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Re-read a JSON result written by this subcommand.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OtocArgs {
    #[command(flatten)]
    pub rotor: RotorArgs,
    #[command(flatten)]
    pub wavepacket: WavepacketArgs,
    /// Number of kicks.
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub otoc: OtocArgs,
    /// OTOC table written by `otoc` (its `.json` sidecar is read too), or an
    /// OTOC JSON document.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub rotor: RotorArgs,
    #[command(flatten)]
    pub wavepacket: WavepacketArgs,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Comma-separated, strictly increasing K values.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub k_values: Option<Vec<f64>>,
    /// Comma-separated, strictly increasing lambda values.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub lambda_values: Option<Vec<f64>>,
    /// Comma-separated subset of clsr, alpha, rlsr, otoc.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub diagnostics: Option<Vec<String>>,
    /// Append finished cells to this checkpoint file.
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Finish the sweep recorded in this checkpoint.
    #[arg(long, value_name = "FILE", conflicts_with = "checkpoint")]
    pub resume: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub parallelism: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Heatmap,
    OtocLines,
    Histogram,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    /// Input files: one sweep CSV, any number of OTOC CSVs, or one spacing
    /// CSV.
    #[arg(long, value_name = "FILE", num_args = 1.., required = true)]
    pub input: Vec<PathBuf>,
    /// Column to draw: clsr, neg_cos or alpha for heatmaps; c_norm, c_raw or
    /// norm for OTOC lines.
    #[arg(long)]
    pub value: Option<String>,
    /// Histogram bins.
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
}

/// Exit statuses.
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_COMPUTE: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.code())
        }
    }
}
