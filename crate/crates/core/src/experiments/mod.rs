//! Seeded synthetic studies of how alignment biases depth metrics.
//!
//! * [`run_robustness`] adds growing Gaussian noise to a perfect depth map
//!   and to its reciprocal, aligns each in its own space and tracks δ₁.
//! * [`run_sensitivity`] corrupts a shrinking top-left block of a perfect
//!   prediction with a perturbation of constant total mass, and compares δ
//!   and AbsRel with and without alignment.
//!
//! Both are fully determined by their config: the scene is drawn from one
//! stream and each level from its own, so serial and parallel runs agree
//! bit for bit.

mod curves;
mod rng;
mod robustness;
mod sensitivity;

pub use curves::{curves_to_csv, curves_to_svg, emit_curves, CurveFormat};
pub use rng::{gaussian_draw, uniform_draw, RngSpec, SampleStream};
pub use robustness::{run_robustness, RobustnessConfig, RobustnessCurves};
pub use sensitivity::{
    default_sizes, flatten_sensitivity, run_sensitivity, AlignMode, SensitivityConfig,
    SensitivityCurves,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Stream id reserved for drawing the synthetic scene; levels use their
/// index as stream id.
pub const SCENE_STREAM: u64 = u64::MAX;

/// A labelled sequence of `(control parameter, metric)` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCurve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl ExperimentCurve {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        let curve = Self {
            label: label.into(),
            points,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// x must be strictly monotone (either direction) and y finite.
    pub fn validate(&self) -> Result<()> {
        if let Some((_, y)) = self.points.iter().find(|(_, y)| !y.is_finite()) {
            return Err(invalid(format!(
                "curve `{}` has non-finite value {y}",
                self.label
            )));
        }
        let increasing = self.points.windows(2).all(|w| w[0].0 < w[1].0);
        let decreasing = self.points.windows(2).all(|w| w[0].0 > w[1].0);
        if !(increasing || decreasing) {
            return Err(invalid(format!(
                "curve `{}` does not have strictly monotone x",
                self.label
            )));
        }
        Ok(())
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// The y value at exactly `x`, if present.
    pub fn at(&self, x: f64) -> Option<f64> {
        self.points.iter().find(|p| p.0 == x).map(|p| p.1)
    }
}

/// Runs `f` over `0..count`, in parallel if asked, keeping index order.
pub(crate) fn map_levels<T, F>(count: usize, parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    if parallel {
        (0..count).into_par_iter().map(f).collect()
    } else {
        (0..count).map(f).collect()
    }
}
