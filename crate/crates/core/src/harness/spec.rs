//! Compact `family:params` graph descriptions.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq)]
pub enum GraphSpec {
    Torus2d { width: usize, height: usize },
    Hypercube { dimension: u32 },
    Regular { n: usize, d: usize },
    /// Radius defaults to `ln(n)^(1/4)`.
    Geometric { n: usize, radius: Option<f64> },
    Cycle { n: usize },
    Path { n: usize },
    Complete { n: usize },
}

impl GraphSpec {
    /// `seed` is used by the random families only.
    pub fn build(&self, seed: u64) -> Result<Graph> {
        match *self {
            GraphSpec::Torus2d { width, height } => Graph::torus2d(width, height),
            GraphSpec::Hypercube { dimension } => Graph::hypercube(dimension),
            GraphSpec::Regular { n, d } => Graph::random_regular(n, d, seed),
            GraphSpec::Geometric { n, radius } => {
                Graph::random_geometric(n, radius.unwrap_or_else(|| default_geometric_radius(n)), seed)
            }
            GraphSpec::Cycle { n } => Graph::cycle(n),
            GraphSpec::Path { n } => Graph::path(n),
            GraphSpec::Complete { n } => Graph::complete(n),
        }
    }

    pub fn torus_dims(&self) -> Option<(usize, usize)> {
        match *self {
            GraphSpec::Torus2d { width, height } => Some((width, height)),
            _ => None,
        }
    }
}

pub fn default_geometric_radius(n: usize) -> f64 {
    (n as f64).ln().powf(0.25)
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidConfig(format!("bad graph spec '{s}': {why}"));
        let (family, params) = s.split_once(':').ok_or_else(|| bad("expected family:params"))?;
        let int = |v: &str| v.trim().parse::<usize>().map_err(|_| bad("expected an integer"));
        let list: Vec<&str> = params.split(',').collect();
        Ok(match family {
            "torus2d" => {
                let (w, h) = params.split_once('x').ok_or_else(|| bad("expected WxH"))?;
                GraphSpec::Torus2d {
                    width: int(w)?,
                    height: int(h)?,
                }
            }
            "hypercube" => GraphSpec::Hypercube {
                dimension: params.trim().parse().map_err(|_| bad("expected a dimension"))?,
            },
            "regular" => match list[..] {
                [n, d] => GraphSpec::Regular { n: int(n)?, d: int(d)? },
                _ => return Err(bad("expected n,d")),
            },
            "geometric" => match list[..] {
                [n] => GraphSpec::Geometric { n: int(n)?, radius: None },
                [n, r] => GraphSpec::Geometric {
                    n: int(n)?,
                    radius: Some(r.trim().parse().map_err(|_| bad("expected a radius"))?),
                },
                _ => return Err(bad("expected n or n,r")),
            },
            "cycle" => GraphSpec::Cycle { n: int(params)? },
            "path" => GraphSpec::Path { n: int(params)? },
            "complete" => GraphSpec::Complete { n: int(params)? },
            _ => return Err(bad("unknown family")),
        })
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Torus2d { width, height } => write!(f, "torus2d:{width}x{height}"),
            GraphSpec::Hypercube { dimension } => write!(f, "hypercube:{dimension}"),
            GraphSpec::Regular { n, d } => write!(f, "regular:{n},{d}"),
            GraphSpec::Geometric { n, radius: None } => write!(f, "geometric:{n}"),
            GraphSpec::Geometric { n, radius: Some(r) } => write!(f, "geometric:{n},{r}"),
            GraphSpec::Cycle { n } => write!(f, "cycle:{n}"),
            GraphSpec::Path { n } => write!(f, "path:{n}"),
            GraphSpec::Complete { n } => write!(f, "complete:{n}"),
        }
    }
}
