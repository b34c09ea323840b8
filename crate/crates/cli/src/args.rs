use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use wavemix::TestFunction;

#[derive(Debug, Parser)]
#[command(name = "wavemix", version, about = "Bayesian wavelet estimation of component curves from aggregated data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate test functions on the grid t = m/M.
    Testfuncs(TestfuncsArgs),
    /// Run a Monte Carlo comparison of wavelet and B-spline estimates.
    Simulate(SimulateArgs),
    /// Estimate component curves from aggregated data and known weights.
    Estimate(EstimateArgs),
    /// Tabulate the shrinkage rule for plotting.
    Rulecurve(RulecurveArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

fn parse_tag(s: &str) -> Result<TestFunction, String> {
    s.parse().map_err(|e: wavemix::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct TestfuncsArgs {
    /// Comma-separated function names (default: all six).
    #[arg(long, value_delimiter = ',', value_parser = parse_tag)]
    pub tags: Vec<TestFunction>,
    /// Number of grid points, a power of two.
    #[arg(short = 'm', long = "grid-size", default_value_t = 1024)]
    pub grid_size: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Wavelet and prior settings shared by `simulate` and `estimate`.
#[derive(Debug, Clone, Default, Args)]
pub struct WaveletArgs {
    /// Daubechies vanishing moments, 1..=10.
    #[arg(long)]
    pub filter_n: Option<usize>,
    /// Primary resolution level J0.
    #[arg(long)]
    pub j0: Option<usize>,
    /// Logistic prior scale.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Fixed point-mass weight at every level.
    #[arg(long, conflicts_with = "p_level_dependent")]
    pub p: Option<f64>,
    /// Point-mass weight p(j) = 1 - 1/(j - J0 + 1)^2 (the default).
    #[arg(long)]
    pub p_level_dependent: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Study preset: 1 (Bumps, Blocks), 2 (Bumps, Blocks, Doppler, Heavisine), 3 (Logit, SpaHet).
    #[arg(long)]
    pub study: Option<u32>,
    /// Flat key=value configuration file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated SNR scenarios (default 3,9).
    #[arg(long, value_delimiter = ',')]
    pub snr: Vec<f64>,
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Interior knots of the B-spline baseline.
    #[arg(long)]
    pub knots: Option<usize>,
    #[arg(long)]
    pub spline_order: Option<usize>,
    /// Rescale every component to this standard deviation before mixing.
    #[arg(long)]
    pub rescale: Option<f64>,
    #[command(flatten)]
    pub wavelet: WaveletArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Conversion from the weights file to mixing proportions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightsScale {
    /// Concentrations in percent; divided by 100.
    #[default]
    Percent,
    /// Already proportions.
    Fraction,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// M × I table of aggregated curves, one column per sample.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// L × I table of weights, one row per component.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Flat key=value configuration file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub weights_scale: Option<WeightsScale>,
    /// First grid abscissa (default 1/M).
    #[arg(long, requires = "grid_end")]
    pub grid_start: Option<f64>,
    /// Last grid abscissa (default 1).
    #[arg(long, requires = "grid_start")]
    pub grid_end: Option<f64>,
    #[command(flatten)]
    pub wavelet: WaveletArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RulecurveArgs {
    #[arg(long, default_value_t = 0.9)]
    pub p: f64,
    #[arg(long, default_value_t = 5.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub d_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub d_max: f64,
    #[arg(long, default_value_t = 201)]
    pub steps: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Where to write outputs (default: the manifest's directory).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
