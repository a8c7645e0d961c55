use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::verify::{Suite, VerifyOptions};
use crate::render::FrameMode;
use crate::spectral::DEFAULT_DENSE_CAP;

#[derive(Debug, Parser)]
#[command(name = "difflb", version, about = "Diffusion load balancing simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a balancing process and record per-round metrics.
    Run(RunArgs),
    /// Check the error-propagation formulas and load bounds numerically.
    Verify(VerifyArgs),
    /// Print the second eigenvalue and the optimal beta of a graph.
    Spectral(SpectralArgs),
    /// Re-render torus frames from load snapshots.
    Render(RenderArgs),
}

/// Unset options fall back to the `--config` file, then to defaults.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Flat key=value file; keys are the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// e.g. torus2d:100x100, hypercube:20, regular:1000,19, geometric:10000
    #[arg(long)]
    pub graph: Option<String>,
    /// Seed of random graph families; defaults to --seed.
    #[arg(long)]
    pub graph_seed: Option<u64>,
    /// File with one speed per node.
    #[arg(long)]
    pub speeds: Option<PathBuf>,
    /// fos or sos
    #[arg(long)]
    pub scheme: Option<String>,
    /// auto or a number in (0, 2)
    #[arg(long)]
    pub beta: Option<String>,
    /// none, floor or randomized
    #[arg(long)]
    pub rounding: Option<String>,
    /// discrete or continuous
    #[arg(long)]
    pub mode: Option<String>,
    /// corner:F, uniform:V or file:PATH
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub rounds: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Round from which a second-order run continues first-order.
    #[arg(long)]
    pub switch_at: Option<u64>,
    /// Write a frame every N rounds (torus only).
    #[arg(long)]
    pub frame_stride: Option<u64>,
    /// adaptive or threshold:C
    #[arg(long)]
    pub frame_mode: Option<String>,
    /// Write load snapshots every N rounds.
    #[arg(long)]
    pub snapshot_stride: Option<u64>,
    /// Write load snapshots at the default stride.
    #[arg(long)]
    pub snapshots: bool,
    /// Window of the remaining-imbalance verdict.
    #[arg(long)]
    pub window: Option<usize>,
    /// Improvement below which the run counts as converged.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seeds per configuration of the identity and bound checks.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    /// Random graphs for the Q and gamma checks.
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    /// Directory for verify.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

impl VerifyArgs {
    pub fn options(&self) -> VerifyOptions {
        VerifyOptions {
            seed: self.seed,
            seeds: self.seeds,
            instances: self.instances,
            ..VerifyOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long, default_value_t = 0)]
    pub graph_seed: u64,
    #[arg(long)]
    pub speeds: Option<PathBuf>,
    /// Largest n handled by dense eigensolvers.
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    pub dense_cap: usize,
    /// Snapshot directory to project onto the eigenbasis.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub snapshots: PathBuf,
    /// torus2d:WxH matching the snapshots.
    #[arg(long)]
    pub graph: String,
    #[arg(long, default_value = "adaptive", value_parser = parse_frame_mode)]
    pub frame_mode: FrameMode,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn parse_frame_mode(s: &str) -> Result<FrameMode, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}
