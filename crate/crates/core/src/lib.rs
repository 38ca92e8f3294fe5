//! Depth-prediction evaluation toolkit.
//!
//! The crate covers the whole path from a raw prediction to a number:
//!
//! * [`grid`] holds the dense depth/disparity grids, validity masks and the
//!   elementwise transforms (reciprocal, affine) everything else composes.
//! * [`align`] implements the scale-and-shift solvers (closed-form least
//!   squares, median scale, RANSAC, point-map shift recovery) and the
//!   representation dispatch that decides in which space a prediction is
//!   aligned.
//! * [`metrics`] computes δ accuracy, AbsRel, RMSE, MAE and bad-pixel rates.
//! * [`experiments`] runs the seeded synthetic studies that show how the
//!   alignment step biases those metrics.
//! * [`bench`] ingests proxy-task result tables and derives improvement
//!   ratios, per-task ranks and cross-task average ranks.
//! * [`io`] reads and writes grids as PFM or CSV.

pub mod align;
pub mod bench;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod metrics;

pub use error::{Error, Result};
