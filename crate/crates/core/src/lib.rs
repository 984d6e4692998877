//! Bernoulli first-passage percolation on the triangular lattice.
//!
//! Sites are blue (passage weight 0) with probability `p` and yellow
//! (weight 1) otherwise. The crate computes exact discrete quantities on
//! sampled or hand-built configurations (passage times, clusters, chain
//! distances, separator dualities, arm events) and runs the Monte Carlo
//! estimators built on them (time constants, correlation lengths, limit-shape
//! anisotropy).

pub mod arms;
pub mod clusters;
pub mod config;
pub mod duality;
pub mod error;
pub mod flow;
pub mod fpp;
pub mod geometry;
pub mod lattice;
pub mod montecarlo;
pub mod records;
pub mod scaling;
pub mod stats;

pub use config::Configuration;
pub use error::{Error, Result};
pub use lattice::{AxisBox, Point, Region, SiteCoord, Window};
pub use stats::MCEstimate;

/// The critical density of site percolation on the triangular lattice.
pub const P_C: f64 = 0.5;
