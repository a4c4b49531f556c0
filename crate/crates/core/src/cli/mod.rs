//! Command-line front end. The `spdc` binary is a thin shell around [`main`];
//! everything here is also callable in-process, which is how the tests drive it.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{execute, parse_length_nm, CommandOutput};
pub use config::{DispersionSource, RunConfig};
pub use output::{emit, Dataset, DatasetKind, Emitted, Format, RunMeta, Table};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "spdc", version, about = "Laguerre-Gauss decomposition of SPDC biphoton states")]
pub struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one config key, e.g. `--set pump.waist_um=75`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = ".", global = true)]
    pub out: PathBuf,
    #[arg(long, default_value_t = Format::Both, global = true)]
    pub format: Format,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Joint (p, ℓ) correlation matrix.
    Decompose(DecomposeArgs),
    /// Complex spectra of selected mode pairs.
    Spectrum(SpectrumArgs),
    /// Pair-collection probability against collection waist.
    Sweep(SweepArgs),
    /// Normalized spectral overlaps between OAM channels.
    Overlap(ChannelArgs),
    /// Spectrally traced spatial density matrix over OAM channels.
    Density(DensityArgs),
    /// Collection waists or radial-mode superpositions.
    #[command(subcommand)]
    Optimize(OptimizeCommand),
    /// Two-photon state tomography in a two-channel OAM subspace.
    #[command(subcommand)]
    Tomography(TomographyCommand),
    /// Closed-form amplitude against direct numerical quadrature.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long, default_value_t = 3)]
    pub pmax: u32,
    #[arg(long, default_value_t = 1)]
    pub ellmax: u32,
    /// Top-hat filter `CENTER,WIDTH`, e.g. `809.66nm,0.03nm` (bare numbers are nm).
    #[arg(long)]
    pub window: Option<String>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// `P_S,P_I,L` or `P_S,P_I,L,WAIST_UM`. Repeatable.
    #[arg(long = "mode", required = true)]
    pub modes: Vec<String>,
    /// Scale each spectrum to unit L² norm.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args)]
pub struct WaistGrid {
    #[arg(long, default_value_t = 10.0)]
    pub wmin: f64,
    #[arg(long, default_value_t = 100.0)]
    pub wmax: f64,
    #[arg(long, default_value_t = 1.0)]
    pub wstep: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub ells: Vec<i32>,
    #[command(flatten)]
    pub waists: WaistGrid,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// `L` or `L,WAIST_UM` (default waist: signal.waist_um). Repeatable.
    #[arg(long = "channel", required = true, allow_hyphen_values = true)]
    pub channels: Vec<String>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub channels: ChannelArgs,
    /// Basis pair `I,J` for the maximally entangled target.
    #[arg(long, default_value = "0,1")]
    pub pair: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Small,
    Large,
}

#[derive(Debug, Subcommand)]
pub enum OptimizeCommand {
    /// Per-ℓ collection waists equalizing pair probabilities.
    Waists(OptimizeWaistsArgs),
    /// Radial superpositions shaping the joint spectra.
    Modes(OptimizeModesArgs),
}

#[derive(Debug, Args)]
pub struct OptimizeWaistsArgs {
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub ells: Vec<i32>,
    /// Reference ℓ; its waist maximizes its own probability.
    #[arg(long = "ref", allow_negative_numbers = true)]
    pub reference: i32,
    #[arg(long, value_enum, default_value_t = BranchArg::Small)]
    pub branch: BranchArg,
    /// Pump waist override, e.g. `75um` (bare numbers are µm).
    #[arg(long)]
    pub wp: Option<String>,
    #[command(flatten)]
    pub waists: WaistGrid,
}

#[derive(Debug, Args)]
pub struct OptimizeModesArgs {
    #[arg(long, default_value_t = 10)]
    pub pmax: u32,
    /// ℓ whose brightness is optimized first.
    #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
    pub bright: i32,
    /// ℓ′ values matched to the bright spectrum (the bright ℓ is skipped if listed).
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub ells: Vec<i32>,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
}

#[derive(Debug, Subcommand)]
pub enum TomographyCommand {
    /// Counts from the theory state of a two-channel subspace, then reconstruction.
    Simulate(TomographySimulateArgs),
    /// Maximum-likelihood reconstruction from a counts file.
    Reconstruct(TomographyReconstructArgs),
}

#[derive(Debug, Args)]
pub struct SubspaceArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub ell: i32,
    #[arg(long = "ell-tilde", allow_negative_numbers = true)]
    pub ell_tilde: i32,
}

#[derive(Debug, Args)]
pub struct TomographySimulateArgs {
    #[command(flatten)]
    pub subspace: SubspaceArgs,
    /// Collection waist of the ℓ channel in µm (default: signal.waist_um).
    #[arg(long = "waist-ell")]
    pub waist_ell: Option<f64>,
    /// Collection waist of the ℓ̃ channel in µm (default: signal.waist_um).
    #[arg(long = "waist-ell-tilde")]
    pub waist_ell_tilde: Option<f64>,
    /// Expected coincidences per measurement setting (9 settings).
    #[arg(long, default_value_t = 10_000)]
    pub counts_per_setting: u64,
}

#[derive(Debug, Args)]
pub struct TomographyReconstructArgs {
    #[command(flatten)]
    pub subspace: SubspaceArgs,
    #[arg(long)]
    pub counts: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// `P_S,P_I,L`.
    #[arg(long = "mode", default_value = "0,0,1", allow_hyphen_values = true)]
    pub mode: String,
    /// Detunings in rad/s (default: −Ω_max/2, 0, Ω_max/2 of the grid).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub omega: Vec<f64>,
}

/// Parses `args`, runs the command, writes outputs. Returns the exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok((written, error)) => {
            for w in &written {
                println!("{}", w.path.display());
            }
            match error {
                None => 0,
                Some(e) => {
                    eprintln!("error: {e} (partial output written)");
                    1
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Loads the config, executes the command and emits its datasets. A
/// command that fails after producing partial data returns both.
pub fn run(cli: &Cli) -> Result<(Vec<Emitted>, Option<crate::Error>)> {
    if let Some(n) = cli.threads {
        // a pool may already exist when called repeatedly in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_overrides(&cli.overrides)?;
    let out = execute(&cfg, &cli.command, cli.seed)?;
    let meta = RunMeta {
        command: out.command.clone(),
        config: cfg.to_json(),
        seed: cli.seed,
        partial: out.error.is_some(),
    };
    let written = emit(&out.datasets, &cli.out, cli.format, &meta)?;
    Ok((written, out.error))
}
