//! Command-line driver: `run`, `verify`, `spectral` and `render`.
//!
//! Every output goes below the `--out` directory. Options of `run` can also
//! come from a flat `key=value` file given with `--config`; flags win.

mod cli;
mod config;
mod output;
mod spec;
pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::diffusion::{Realize, Simulator};
use crate::error::{Error, Result};
use crate::metrics::{self, RoundRecord};
use crate::render;
use crate::spectral;

pub use cli::{Cli, Command, RenderArgs, RunArgs, SpectralArgs, VerifyArgs};
pub use config::{Mode, RunConfig};
pub use output::{read_snapshot, snapshot_file_name, write_snapshot};
pub use spec::{default_geometric_radius, GraphSpec};
pub use verify::{CheckLine, Suite, VerifyOptions};

/// Process entry point; returns the exit status.
pub fn main() -> i32 {
    run_cli(std::env::args_os())
}

/// 0 on success, 1 on failure, 2 on a usage error.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => RunConfig::from_args(&a).and_then(|c| with_workers(a.workers, || cmd_run(&c))),
        Command::Verify(a) => with_workers(a.workers, || cmd_verify(&a)),
        Command::Spectral(a) => cmd_spectral(&a),
        Command::Render(a) => cmd_render(&a),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e @ Error::InvalidConfig(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => f(),
        Some(0) => Err(Error::InvalidConfig("--workers must be at least 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {w} workers: {e}")))?
            .install(f),
    }
}

/// Result of [`cmd_run`] besides the files it writes.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub rounds: u64,
    pub beta: f64,
    pub verdict: Option<metrics::ImbalanceVerdict>,
    pub min_transient: f64,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "rounds={} beta={:.10} ", self.rounds, self.beta)?;
        match self.verdict {
            Some(v) => {
                write!(f, "remaining_imbalance={} ", v.remaining_imbalance)?;
                match v.converged_at {
                    Some(r) => write!(f, "converged_at={r} ")?,
                    None => write!(f, "converged_at=never ")?,
                }
            }
            None => write!(f, "remaining_imbalance=n/a ")?,
        }
        if self.min_transient.is_finite() {
            write!(f, "min_transient={}", self.min_transient)
        } else {
            write!(f, "min_transient=n/a")
        }
    }
}

fn cmd_run(config: &RunConfig) -> Result<bool> {
    let summary = execute_run(config)?;
    println!("{summary}");
    Ok(true)
}

/// Build the graph, run the configured process and write all outputs.
pub fn execute_run(config: &RunConfig) -> Result<RunSummary> {
    let graph = config.build_graph()?;
    std::fs::create_dir_all(&config.out)?;
    match config.mode {
        Mode::Discrete => drive::<i64>(config, &graph),
        Mode::Continuous => drive::<f64>(config, &graph),
    }
}

fn drive<L: Realize>(config: &RunConfig, graph: &crate::Graph) -> Result<RunSummary> {
    let x0 = crate::diffusion::initial_load_as::<L>(&config.init, graph)?;
    let mut sim = Simulator::new(graph, config.scheme.clone(), x0)?;
    let mut csv = output::MetricsWriter::create(&config.out.join("metrics.csv"))?;

    let frames = match (config.frame_stride, config.graph.torus_dims()) {
        (Some(stride), Some(dims)) if stride > 0 => {
            let dir = config.out.join("frames");
            std::fs::create_dir_all(&dir)?;
            Some((stride, dims, dir))
        }
        (Some(stride), None) if stride > 0 => {
            return Err(Error::InvalidConfig("frames can only be rendered for torus2d graphs".into()));
        }
        _ => None,
    };
    let snapshots = match config.snapshot_stride(graph.n()) {
        Some(stride) => {
            let dir = config.out.join("snapshots");
            std::fs::create_dir_all(&dir)?;
            Some((stride, dir))
        }
        None => None,
    };
    let emit = |sim: &Simulator<'_, L>| -> Result<()> {
        let r = sim.round();
        if let Some((stride, (w, h), dir)) = &frames {
            if r % stride == 0 {
                let frame = render::render(sim.loads(), *w, *h, config.frame_mode)?;
                render::write_pgm(&frame, &dir.join(render::frame_file_name(r)))?;
            }
        }
        if let Some((stride, dir)) = &snapshots {
            if r % stride == 0 {
                write_snapshot(&dir.join(snapshot_file_name(r)), r, sim.loads())?;
            }
        }
        Ok(())
    };

    emit(&sim)?;
    let mut series = Vec::with_capacity(config.scheme.rounds as usize);
    let mut min_transient = f64::INFINITY;
    let records: Vec<RoundRecord> = sim.run_with(|s, rec| {
        csv.write(rec)?;
        emit(s)
    })?;
    for rec in &records {
        series.push(rec.max_above_avg);
        min_transient = min_transient.min(rec.min_transient);
    }
    csv.finish()?;
    // judge only the rounds after a scheme switch
    let from = match config.scheme.switch_at {
        Some(s) if config.scheme.scheme == crate::diffusion::Scheme::Sos => (s as usize).min(series.len()),
        _ => 0,
    };
    Ok(RunSummary {
        rounds: records.len() as u64,
        beta: sim.beta(),
        verdict: metrics::remaining_imbalance(&series[from..], config.window, config.tol)
            .ok()
            .map(|v| metrics::ImbalanceVerdict {
                converged_at: v.converged_at.map(|r| r + from),
                ..v
            }),
        min_transient,
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let opts = args.options();
    let lines = verify::run_suite(args.suite, &opts)?;
    for l in &lines {
        println!("{l}");
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!("{}: {} checks, {failed} failed", args.suite.name(), lines.len());
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        verify::write_report_csv(&out.join("verify.csv"), &lines)?;
    }
    Ok(failed == 0)
}

fn cmd_spectral(args: &SpectralArgs) -> Result<bool> {
    let graph = config::build_graph(&args.graph, args.graph_seed, args.speeds.as_deref())?;
    let spectrum = spectral::lambda2_with_cap(&graph, args.dense_cap)?;
    let beta = spectral::beta_opt(spectrum.lambda)?;
    println!(
        "n={} lambda={:.10} beta={:.10} source={}",
        graph.n(),
        spectrum.lambda,
        beta,
        spectrum.source
    );
    if let Some(dir) = &args.trace {
        let basis = spectral::eigenbasis_with_cap(&graph, args.dense_cap)?;
        let mut samples = Vec::new();
        for (round, path) in snapshot_files(dir)? {
            let x = read_snapshot(&path, graph.n())?;
            samples.push(spectral::coefficient_sample(round, &basis.coefficients(&x)?));
        }
        std::fs::create_dir_all(&args.out)?;
        let path = args.out.join("coefficients.csv");
        spectral::write_coefficient_trace(&path, &samples)?;
        println!("wrote {} samples to {}", samples.len(), path.display());
    }
    Ok(true)
}

fn cmd_render(args: &RenderArgs) -> Result<bool> {
    let spec: GraphSpec = args.graph.parse()?;
    let (w, h) = spec
        .torus_dims()
        .ok_or_else(|| Error::InvalidConfig("render needs a torus2d graph".into()))?;
    let dir = args.out.join("frames");
    std::fs::create_dir_all(&dir)?;
    let mut count = 0;
    for (round, path) in snapshot_files(&args.snapshots)? {
        let x = read_snapshot(&path, w * h)?;
        let frame = render::render(&x, w, h, args.frame_mode)?;
        render::write_pgm(&frame, &dir.join(render::frame_file_name(round)))?;
        count += 1;
    }
    println!("rendered {count} frames to {}", dir.display());
    Ok(true)
}

/// Snapshot files of a directory with their rounds, in round order.
fn snapshot_files(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default();
        if let Some(r) = name
            .strip_prefix("snapshot_")
            .and_then(|s| s.strip_suffix(".txt"))
            .and_then(|s| s.parse::<u64>().ok())
        {
            out.push((r, path));
        }
    }
    out.sort();
    Ok(out)
}
