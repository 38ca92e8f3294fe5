use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::align::{align_prediction, AlignSpec, Prediction, RansacConfig};
use crate::error::{invalid, Error, Result};
use crate::grid::{DepthGrid, GridKind, Representation, Space, ValidityMask};
use crate::metrics::{abs_rel, delta_counts, DELTA_THRESHOLDS};

use super::{map_levels, ExperimentCurve, RngSpec, SCENE_STREAM};

/// Offset separating the RANSAC seeds from the perturbation streams.
const RANSAC_SEED_OFFSET: u64 = 0x005e_ed0f_5ac0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignMode {
    None,
    Lsq,
    Ransac,
}

impl AlignMode {
    pub fn label(self) -> &'static str {
        match self {
            AlignMode::None => "none",
            AlignMode::Lsq => "lsq",
            AlignMode::Ransac => "ransac",
        }
    }
}

impl fmt::Display for AlignMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AlignMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(AlignMode::None),
            "lsq" => Ok(AlignMode::Lsq),
            "ransac" => Ok(AlignMode::Ransac),
            other => Err(invalid(format!("unknown align mode `{other}`"))),
        }
    }
}

/// `n, n−10, …` down to the last positive size.
pub fn default_sizes(n: usize) -> Vec<usize> {
    (0..)
        .map(|k| n as i64 - 10 * k)
        .take_while(|&m| m > 0)
        .map(|m| m as usize)
        .collect()
}

/// Local-outlier sensitivity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityConfig {
    pub n: usize,
    /// Side lengths of the corrupted top-left block, strictly descending.
    pub sizes: Vec<usize>,
    pub align_modes: Vec<AlignMode>,
    /// RANSAC settings for [`AlignMode::Ransac`]; the seed is replaced per
    /// level.
    pub ransac: RansacConfig,
    /// Upper end of the uniform block error before the `n²/m²` rescale.
    /// Zero disables the perturbation.
    pub error_scale: f64,
    pub seed: u64,
    pub parallel: bool,
}

impl SensitivityConfig {
    pub fn with_n(n: usize) -> Self {
        Self {
            n,
            sizes: default_sizes(n),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid(format!(
                "grid size must be at least 2, got {}",
                self.n
            )));
        }
        if self.sizes.is_empty() {
            return Err(invalid("size sequence is empty"));
        }
        if let Some(&m) = self.sizes.iter().find(|&&m| m == 0 || m > self.n) {
            return Err(invalid(format!("block size {m} outside 1..={}", self.n)));
        }
        if self.sizes.windows(2).any(|w| w[0] <= w[1]) {
            return Err(invalid("block sizes must be strictly descending"));
        }
        if self.align_modes.is_empty() {
            return Err(invalid("no align mode selected"));
        }
        let mut modes = self.align_modes.clone();
        modes.sort();
        modes.dedup();
        if modes.len() != self.align_modes.len() {
            return Err(invalid("align modes repeat"));
        }
        if !(self.error_scale >= 0.0 && self.error_scale.is_finite()) {
            return Err(invalid(format!(
                "error scale must be non-negative, got {}",
                self.error_scale
            )));
        }
        self.ransac.validate()
    }
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self {
            n: 500,
            sizes: default_sizes(500),
            align_modes: vec![AlignMode::None, AlignMode::Lsq, AlignMode::Ransac],
            ransac: RansacConfig {
                iterations: 256,
                inlier_threshold: 0.2,
                seed: 0,
            },
            error_scale: 1.0,
            seed: 0,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCurves {
    pub delta: ExperimentCurve,
    pub abs_rel: ExperimentCurve,
}

/// Runs the shrinking-block sweep.
///
/// The prediction starts equal to a uniform `(0, 10)` ground truth. For each
/// block size `m` a fresh copy gets `E · n²/m²` added to its top-left
/// `m × m` block, with `E` uniform in `[0, error_scale)`, so the expected
/// injected mass is the same for every `m`. δ₁ and AbsRel are reported per
/// align mode, keyed by `m`.
pub fn run_sensitivity(cfg: &SensitivityConfig) -> Result<IndexMap<AlignMode, SensitivityCurves>> {
    cfg.validate()?;
    let n = cfg.n;
    let mut scene = RngSpec::new(cfg.seed, SCENE_STREAM).stream();
    let gt_values: Vec<f64> = (0..n * n).map(|_| scene.uniform_positive(10.0)).collect();
    let gt = DepthGrid::from_vec(n, n, gt_values, GridKind::Depth)?;
    let mask = ValidityMask::full(n, n)?;

    let rows = map_levels(cfg.sizes.len(), cfg.parallel, |k| {
        let m = cfg.sizes[k];
        let gain = (n * n) as f64 / (m * m) as f64;
        let mut stream = RngSpec::new(cfg.seed, k as u64).stream();
        let mut pred = gt.clone();
        let values = pred.values_mut();
        for r in 0..m {
            for c in 0..m {
                values[r * n + c] += stream.uniform(0.0, 1.0) * cfg.error_scale * gain;
            }
        }

        cfg.align_modes
            .iter()
            .map(|&mode| {
                let spec = match mode {
                    AlignMode::None => AlignSpec::none(Space::Depth),
                    AlignMode::Lsq => AlignSpec::lsq(Space::Depth),
                    AlignMode::Ransac => AlignSpec::ransac(
                        Space::Depth,
                        RansacConfig {
                            seed: RngSpec::new(cfg.seed.wrapping_add(RANSAC_SEED_OFFSET), k as u64)
                                .derived_seed(),
                            ..cfg.ransac
                        },
                    ),
                };
                let out = align_prediction(
                    Prediction::Grid(&pred),
                    &gt,
                    Representation::AffineInvariantDepth,
                    &spec,
                    &mask,
                )?;
                let (pass, total) =
                    delta_counts(&out.aligned, &gt, &out.mask, DELTA_THRESHOLDS[0])?;
                let delta = pass as f64 / (total + out.dropped) as f64;
                Ok((delta, abs_rel(&out.aligned, &gt, &out.mask)?))
            })
            .collect::<Result<Vec<(f64, f64)>>>()
    })?;

    cfg.align_modes
        .iter()
        .enumerate()
        .map(|(j, &mode)| {
            let pick = |f: fn(&(f64, f64)) -> f64| {
                cfg.sizes
                    .iter()
                    .zip(&rows)
                    .map(|(&m, r)| (m as f64, f(&r[j])))
                    .collect::<Vec<_>>()
            };
            Ok((
                mode,
                SensitivityCurves {
                    delta: ExperimentCurve::new(format!("delta1_{mode}"), pick(|r| r.0))?,
                    abs_rel: ExperimentCurve::new(format!("absrel_{mode}"), pick(|r| r.1))?,
                },
            ))
        })
        .collect()
}

/// Flattens the per-mode curves: all δ curves first, then all AbsRel.
pub fn flatten_sensitivity(
    curves: &IndexMap<AlignMode, SensitivityCurves>,
) -> Vec<ExperimentCurve> {
    curves
        .values()
        .map(|c| c.delta.clone())
        .chain(curves.values().map(|c| c.abs_rel.clone()))
        .collect()
}
