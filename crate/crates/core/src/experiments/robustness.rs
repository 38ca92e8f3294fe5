use crate::align::{align_prediction, AlignSpec, Prediction};
use crate::error::{invalid, Result};
use crate::grid::{DepthGrid, GridKind, Representation, Space, ValidityMask, DEFAULT_INVERT_FLOOR};
use crate::metrics::{delta_counts, DELTA_THRESHOLDS};

use super::{map_levels, ExperimentCurve, RngSpec, SCENE_STREAM};

/// Noise robustness of depth-space versus disparity-space alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessConfig {
    /// Side of the square synthetic grid.
    pub n: usize,
    /// Largest disturbance factor.
    pub max_disturbance: f64,
    /// Spacing of the disturbance factors `0, step, 2·step, …`.
    pub step: f64,
    /// Noise standard deviation per unit of disturbance.
    pub noise_scale: f64,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        Self {
            n: 500,
            max_disturbance: 1.8,
            step: 0.05,
            noise_scale: 0.01,
            seed: 0,
            parallel: true,
        }
    }
}

const MAX_LEVELS: usize = 1_000_000;

impl RobustnessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid(format!(
                "grid size must be at least 2, got {}",
                self.n
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid(format!("step must be positive, got {}", self.step)));
        }
        if !(self.max_disturbance >= 0.0 && self.max_disturbance.is_finite()) {
            return Err(invalid(format!(
                "max disturbance must be non-negative, got {}",
                self.max_disturbance
            )));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(invalid(format!(
                "noise scale must be non-negative, got {}",
                self.noise_scale
            )));
        }
        if self.max_disturbance / self.step >= MAX_LEVELS as f64 {
            return Err(invalid("too many disturbance levels"));
        }
        Ok(())
    }

    /// `[0, step, 2·step, …]` up to and including `max_disturbance`
    /// (within floating-point slack).
    pub fn disturbance_levels(&self) -> Vec<f64> {
        let count = (self.max_disturbance / self.step + 1e-9).floor() as usize;
        (0..=count).map(|k| k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessCurves {
    /// δ₁ after aligning the noisy depth in depth space.
    pub depth: ExperimentCurve,
    /// δ₁ after aligning the noisy disparity in disparity space.
    pub disparity: ExperimentCurve,
}

impl RobustnessCurves {
    pub fn curves(&self) -> Vec<ExperimentCurve> {
        vec![self.depth.clone(), self.disparity.clone()]
    }
}

fn delta1(out: &crate::align::AlignOutcome, gt: &DepthGrid) -> Result<f64> {
    let (pass, total) = delta_counts(&out.aligned, gt, &out.mask, DELTA_THRESHOLDS[0])?;
    Ok(pass as f64 / (total + out.dropped) as f64)
}

/// Runs the noise sweep: the same zero-mean noise is added to the depth map
/// and to its reciprocal, each is aligned by least squares in its own space,
/// and δ₁ is measured against the ground-truth depth.
pub fn run_robustness(cfg: &RobustnessConfig) -> Result<RobustnessCurves> {
    cfg.validate()?;
    let n = cfg.n;
    let mut scene = RngSpec::new(cfg.seed, SCENE_STREAM).stream();
    let gt_values: Vec<f64> = (0..n * n).map(|_| scene.uniform_positive(10.0)).collect();
    let gt = DepthGrid::from_vec(n, n, gt_values, GridKind::Depth)?;
    let (gt_disp, _) = gt.invert(DEFAULT_INVERT_FLOOR)?;
    let mask = ValidityMask::full(n, n)?;
    let levels = cfg.disturbance_levels();

    let rows = map_levels(levels.len(), cfg.parallel, |k| {
        let d = levels[k];
        let sigma = d * cfg.noise_scale;
        let mut stream = RngSpec::new(cfg.seed, k as u64).stream();
        let noise: Vec<f64> = (0..n * n).map(|_| stream.gaussian(sigma)).collect();

        let noisy = |base: &DepthGrid, kind| {
            let v = base
                .values()
                .iter()
                .zip(&noise)
                .map(|(a, e)| a + e)
                .collect();
            DepthGrid::from_vec(n, n, v, kind)
        };
        let pred_depth = noisy(&gt, GridKind::Depth)?;
        let pred_disp = noisy(&gt_disp, GridKind::Disparity)?;

        let by_depth = align_prediction(
            Prediction::Grid(&pred_depth),
            &gt,
            Representation::AffineInvariantDepth,
            &AlignSpec::lsq(Space::Depth),
            &mask,
        )?;
        let by_disp = align_prediction(
            Prediction::Grid(&pred_disp),
            &gt,
            Representation::AffineInvariantDisparity,
            &AlignSpec::lsq(Space::Disparity),
            &mask,
        )?;
        Ok((d, delta1(&by_depth, &gt)?, delta1(&by_disp, &gt)?))
    })?;

    Ok(RobustnessCurves {
        depth: ExperimentCurve::new(
            "delta1_depth_space",
            rows.iter().map(|r| (r.0, r.1)).collect(),
        )?,
        disparity: ExperimentCurve::new(
            "delta1_disparity_space",
            rows.iter().map(|r| (r.0, r.2)).collect(),
        )?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_levels_match_sweep() {
        let levels = RobustnessConfig::default().disturbance_levels();
        assert_eq!(levels.len(), 37);
        assert_eq!(levels[0], 0.0);
        assert!((levels[36] - 1.8).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let bad = |f: fn(&mut RobustnessConfig)| {
            let mut c = RobustnessConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.step = -1.0));
        assert!(bad(|c| c.step = 0.0));
        assert!(bad(|c| c.n = 1));
        assert!(bad(|c| c.max_disturbance = f64::NAN));
        assert!(bad(|c| c.noise_scale = -0.1));
        assert!(RobustnessConfig::default().validate().is_ok());
    }

    #[test]
    fn zero_disturbance_is_perfect() {
        let cfg = RobustnessConfig {
            n: 40,
            max_disturbance: 0.1,
            seed: 5,
            ..Default::default()
        };
        let out = run_robustness(&cfg).unwrap();
        assert_eq!(out.depth.points[0], (0.0, 1.0));
        assert_eq!(out.disparity.points[0], (0.0, 1.0));
        assert_eq!(out.depth.points.len(), 3);
    }

    #[test]
    fn serial_matches_parallel() {
        let cfg = RobustnessConfig {
            n: 30,
            max_disturbance: 0.5,
            step: 0.1,
            noise_scale: 0.05,
            seed: 9,
            parallel: false,
        };
        let serial = run_robustness(&cfg).unwrap();
        let parallel = run_robustness(&RobustnessConfig {
            parallel: true,
            ..cfg
        })
        .unwrap();
        assert_eq!(serial, parallel);
    }
}
