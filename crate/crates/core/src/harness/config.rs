//! Resolution of `run` options: flags, then the config file, then defaults.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::cli::RunArgs;
use super::spec::GraphSpec;
use crate::diffusion::{InitKind, Rounding, SchemeConfig};
use crate::error::{Error, Result};
use crate::graph::{read_speeds, Graph};
use crate::metrics::{DEFAULT_TOL, DEFAULT_WINDOW};
use crate::render::FrameMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Discrete,
    Continuous,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(Mode::Discrete),
            "continuous" => Ok(Mode::Continuous),
            _ => Err(Error::InvalidConfig(format!("mode must be discrete or continuous, got '{s}'"))),
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub graph: GraphSpec,
    pub graph_seed: u64,
    pub speeds: Option<PathBuf>,
    pub scheme: SchemeConfig,
    pub init: InitKind,
    pub mode: Mode,
    pub out: PathBuf,
    pub frame_stride: Option<u64>,
    pub frame_mode: FrameMode,
    /// `Some(0)` asks for the size-dependent default stride.
    pub snapshot_stride: Option<u64>,
    pub window: usize,
    pub tol: f64,
}

const KEYS: &[&str] = &[
    "graph",
    "graph-seed",
    "speeds",
    "scheme",
    "beta",
    "rounding",
    "mode",
    "init",
    "rounds",
    "seed",
    "switch-at",
    "frame-stride",
    "frame-mode",
    "snapshot-stride",
    "snapshots",
    "window",
    "tol",
    "out",
];

/// Parse `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let (k, v) = line.split_once('=').ok_or_else(|| err("expected key=value".into()))?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            return Err(err(format!("unknown key '{k}'")));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

struct Layers<'a> {
    file: HashMap<String, String>,
    args: &'a RunArgs,
}

impl Layers<'_> {
    /// Flag value if given, else the file value, parsed.
    fn get<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::InvalidConfig(format!("bad value '{v}' for {key}: {e}")))
            })
            .transpose()
    }
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => parse_config_file(p)?,
            None => HashMap::new(),
        };
        let l = Layers { file, args };
        let a = l.args;

        let graph: GraphSpec = l
            .get("graph", a.graph.clone())?
            .ok_or_else(|| Error::InvalidConfig("--graph is required".into()))?
            .parse()?;
        let seed = l.get("seed", a.seed)?.unwrap_or(0);
        let rounding: Option<Rounding> = l.get::<String>("rounding", a.rounding.clone())?.map(|s| s.parse()).transpose()?;
        let mode: Option<Mode> = l.get::<String>("mode", a.mode.clone())?.map(|s| s.parse()).transpose()?;
        let (mode, rounding) = match (mode, rounding) {
            (None, None) => (Mode::Discrete, Rounding::Randomized),
            (None, Some(Rounding::None)) => (Mode::Continuous, Rounding::None),
            (None, Some(r)) => (Mode::Discrete, r),
            (Some(Mode::Continuous), None | Some(Rounding::None)) => (Mode::Continuous, Rounding::None),
            (Some(Mode::Continuous), Some(r)) => {
                return Err(Error::InvalidConfig(format!("continuous mode cannot use rounding '{r}'")));
            }
            (Some(Mode::Discrete), None) => (Mode::Discrete, Rounding::Randomized),
            (Some(Mode::Discrete), Some(Rounding::None)) => {
                return Err(Error::InvalidConfig("discrete mode needs floor or randomized rounding".into()));
            }
            (Some(Mode::Discrete), Some(r)) => (Mode::Discrete, r),
        };
        let defaults = SchemeConfig::default();
        let scheme = SchemeConfig {
            scheme: l
                .get::<String>("scheme", a.scheme.clone())?
                .map(|s| s.parse())
                .transpose()?
                .unwrap_or(defaults.scheme),
            beta: l
                .get::<String>("beta", a.beta.clone())?
                .map(|s| s.parse())
                .transpose()?
                .unwrap_or(defaults.beta),
            rounding,
            switch_at: l.get("switch-at", a.switch_at)?,
            rounds: l.get("rounds", a.rounds)?.unwrap_or(defaults.rounds),
            seed,
        };
        let snapshots = a.snapshots || l.get::<bool>("snapshots", None)?.unwrap_or(false);
        let snapshot_stride = match l.get("snapshot-stride", a.snapshot_stride)? {
            Some(0) => return Err(Error::InvalidConfig("snapshot stride must be positive".into())),
            Some(s) => Some(s),
            None if snapshots => Some(0),
            None => None,
        };
        Ok(RunConfig {
            graph,
            graph_seed: l.get("graph-seed", a.graph_seed)?.unwrap_or(seed),
            speeds: l.get("speeds", a.speeds.clone())?,
            scheme,
            init: l
                .get::<String>("init", a.init.clone())?
                .map(|s| s.parse())
                .transpose()?
                .unwrap_or(InitKind::Corner(1000.0)),
            mode,
            out: l.get("out", a.out.clone())?.unwrap_or_else(|| PathBuf::from(".")),
            frame_stride: l.get("frame-stride", a.frame_stride)?,
            frame_mode: l
                .get::<String>("frame-mode", a.frame_mode.clone())?
                .map(|s| s.parse())
                .transpose()?
                .unwrap_or(FrameMode::Adaptive),
            snapshot_stride,
            window: l.get("window", a.window)?.unwrap_or(DEFAULT_WINDOW),
            tol: l.get("tol", a.tol)?.unwrap_or(DEFAULT_TOL),
        })
    }

    pub fn build_graph(&self) -> Result<Graph> {
        build_graph_spec(&self.graph, self.graph_seed, self.speeds.as_deref())
    }

    /// Every round up to 10^4 nodes, every 100 rounds above.
    pub fn snapshot_stride(&self, n: usize) -> Option<u64> {
        match self.snapshot_stride {
            Some(0) => Some(if n <= 10_000 { 1 } else { 100 }),
            s => s,
        }
    }
}

fn build_graph_spec(spec: &GraphSpec, seed: u64, speeds: Option<&Path>) -> Result<Graph> {
    let g = spec.build(seed)?;
    match speeds {
        Some(p) => g.with_speeds(read_speeds(p)?),
        None => Ok(g),
    }
}

pub fn build_graph(spec: &str, seed: u64, speeds: Option<&Path>) -> Result<Graph> {
    build_graph_spec(&spec.parse()?, seed, speeds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{BetaChoice, Scheme};

    fn args(graph: &str) -> RunArgs {
        RunArgs {
            graph: Some(graph.into()),
            ..RunArgs::default()
        }
    }

    #[test]
    fn defaults() {
        let c = RunConfig::from_args(&args("cycle:5")).unwrap();
        assert_eq!(c.mode, Mode::Discrete);
        assert_eq!(c.scheme.rounding, Rounding::Randomized);
        assert_eq!(c.init, InitKind::Corner(1000.0));
        assert_eq!(c.graph_seed, 0);
        assert_eq!(c.snapshot_stride(100), None);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# comment\nscheme = fos\nrounds=7\nbeta=1.5\nseed=3\ngraph=cycle:9\n").unwrap();
        let mut a = args("cycle:5");
        a.config = Some(path.clone());
        a.rounds = Some(11);
        let c = RunConfig::from_args(&a).unwrap();
        assert_eq!(c.graph, GraphSpec::Cycle { n: 5 });
        assert_eq!(c.scheme.scheme, Scheme::Fos);
        assert_eq!(c.scheme.rounds, 11);
        assert_eq!(c.scheme.beta, BetaChoice::Value(1.5));
        assert_eq!(c.graph_seed, 3);

        std::fs::write(&path, "colour=blue\n").unwrap();
        assert!(RunConfig::from_args(&a).is_err());
    }

    #[test]
    fn mode_and_rounding() {
        let mut a = args("cycle:5");
        a.rounding = Some("none".into());
        assert_eq!(RunConfig::from_args(&a).unwrap().mode, Mode::Continuous);
        a.mode = Some("discrete".into());
        assert!(RunConfig::from_args(&a).is_err());
        a.rounding = Some("floor".into());
        a.mode = Some("continuous".into());
        assert!(RunConfig::from_args(&a).is_err());
        a.rounding = None;
        assert_eq!(RunConfig::from_args(&a).unwrap().scheme.rounding, Rounding::None);
    }

    #[test]
    fn snapshot_default_stride() {
        let mut a = args("cycle:5");
        a.snapshots = true;
        let c = RunConfig::from_args(&a).unwrap();
        assert_eq!(c.snapshot_stride(10_000), Some(1));
        assert_eq!(c.snapshot_stride(10_001), Some(100));
    }
}
