//! Simulation and analysis of diffusion load balancing on networks.
//!
//! Nodes hold load and repeatedly exchange it with their neighbors in
//! synchronous rounds. The crate covers first-order diffusion and its
//! over-relaxed second-order variant, both as idealized continuous
//! processes and as discrete token processes with floor or randomized
//! rounding, on homogeneous and heterogeneous (speed-weighted) networks.
//!
//! - [`graph`]: benchmark networks and diffusion weights
//! - [`spectral`]: second eigenvalue, optimal relaxation, eigenvector coefficients
//! - [`diffusion`]: the round-by-round processes
//! - [`metrics`]: per-round quality measures
//! - [`theory`]: error propagation, exact deviation formula, explicit bounds
//! - [`render`]: grayscale torus frames
//! - [`harness`]: the `difflb` command line tool

pub mod diffusion;
pub mod error;
pub mod graph;
pub mod harness;
pub mod load;
pub mod metrics;
pub mod render;
pub mod spectral;
pub mod theory;

pub use error::{Error, Result};
pub use graph::Graph;
pub use load::Load;
