//! Scale-and-shift solvers and the representation dispatch.
//!
//! Every solver fits `target ≈ scale · pred + shift` over the valid pixels
//! of a mask. Which space the fit happens in depends on how the model
//! expresses its prediction:
//!
//! | representation              | aligned against            |
//! |-----------------------------|----------------------------|
//! | metric depth                | nothing, or ground truth   |
//! | affine-invariant depth      | ground-truth depth         |
//! | affine-invariant disparity  | reciprocal of ground truth |
//! | affine-invariant point map  | shift recovery, then either |

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{
    AlignmentParams, CameraIntrinsics, DepthGrid, GridKind, Representation, Space, ValidityMask,
    DEFAULT_INVERT_FLOOR,
};

/// Variance of the prediction below which a fit is refused.
pub const DEGENERATE_VARIANCE: f64 = 1e-15;

/// Pixels closer than this to the principal column are skipped by
/// [`recover_pointmap_shift`].
pub const PRINCIPAL_AXIS_MARGIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    LsqScaleShift,
    LsqScaleOnly,
    MedianScaleOnly,
    RansacScaleShift,
    None,
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lsq" | "lsq-scale-shift" => Ok(Solver::LsqScaleShift),
            "lsq-scale" | "lsq-scale-only" => Ok(Solver::LsqScaleOnly),
            "median" | "median-scale-only" => Ok(Solver::MedianScaleOnly),
            "ransac" | "ransac-scale-shift" => Ok(Solver::RansacScaleShift),
            "none" => Ok(Solver::None),
            other => Err(invalid(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RansacConfig {
    pub iterations: usize,
    /// Inlier residual bound, relative to `max(|target|, 1e-9)`.
    pub inlier_threshold: f64,
    pub seed: u64,
}

impl RansacConfig {
    /// Minimal sample for a scale-and-shift model.
    pub const SAMPLE_SIZE: usize = 2;

    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(invalid("RANSAC needs at least one iteration"));
        }
        if !(self.inlier_threshold > 0.0 && self.inlier_threshold < 1.0) {
            return Err(invalid(format!(
                "RANSAC inlier threshold must lie in (0, 1), got {}",
                self.inlier_threshold
            )));
        }
        Ok(())
    }
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            iterations: 256,
            inlier_threshold: 0.05,
            seed: 0,
        }
    }
}

/// Which solver to run and in which space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignSpec {
    pub solver: Solver,
    pub space: Space,
    pub ransac: Option<RansacConfig>,
}

impl AlignSpec {
    pub fn new(solver: Solver, space: Space) -> Self {
        Self {
            solver,
            space,
            ransac: None,
        }
    }

    pub fn none(space: Space) -> Self {
        Self::new(Solver::None, space)
    }

    pub fn lsq(space: Space) -> Self {
        Self::new(Solver::LsqScaleShift, space)
    }

    pub fn ransac(space: Space, cfg: RansacConfig) -> Self {
        Self {
            solver: Solver::RansacScaleShift,
            space,
            ransac: Some(cfg),
        }
    }
}

/// Per-pixel camera-frame coordinates, defined up to a global scale and a
/// shift along z.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMap {
    width: usize,
    height: usize,
    xyz: Vec<[f64; 3]>,
}

impl PointMap {
    pub fn new(width: usize, height: usize, xyz: Vec<[f64; 3]>) -> Result<Self> {
        if width == 0 || height == 0 || xyz.len() != width * height {
            return Err(invalid(format!(
                "point map of {} points does not fit {width}x{height}",
                xyz.len()
            )));
        }
        Ok(Self { width, height, xyz })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn xyz(&self) -> &[[f64; 3]] {
        &self.xyz
    }

    /// The z channel as a depth grid.
    pub fn depth(&self) -> DepthGrid {
        DepthGrid::from_vec(
            self.width,
            self.height,
            self.xyz.iter().map(|p| p[2]).collect(),
            GridKind::Depth,
        )
        .expect("point map dimensions are validated on construction")
    }
}

fn space_of(target: &DepthGrid) -> Space {
    match target.kind() {
        GridKind::Disparity => Space::Disparity,
        _ => Space::Depth,
    }
}

fn valid_pairs(
    pred: &DepthGrid,
    target: &DepthGrid,
    mask: &ValidityMask,
) -> Result<(Vec<f64>, Vec<f64>)> {
    pred.require_same_shape(target)?;
    pred.require_mask(mask)?;
    let (p, t) = (pred.values(), target.values());
    Ok(mask.indices().map(|i| (p[i], t[i])).unzip())
}

/// Closed-form least squares on paired samples.
fn lsq_fit(p: &[f64], t: &[f64]) -> Result<(f64, f64)> {
    let n = p.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "scale-and-shift fit needs at least 2 valid pixels, got {n}"
        )));
    }
    let nf = n as f64;
    let mean_p = p.iter().sum::<f64>() / nf;
    let mean_t = t.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&pi, &ti) in p.iter().zip(t) {
        let dp = pi - mean_p;
        sxx += dp * dp;
        sxy += dp * (ti - mean_t);
    }
    if sxx.is_nan() || sxx / nf < DEGENERATE_VARIANCE {
        return Err(Error::DegeneratePrediction(format!(
            "prediction variance {} is below {DEGENERATE_VARIANCE}",
            sxx / nf
        )));
    }
    let scale = sxy / sxx;
    Ok((scale, mean_t - scale * mean_p))
}

fn params(scale: f64, shift: f64, space: Space) -> Result<AlignmentParams> {
    AlignmentParams::new(scale, shift, space)
        .map_err(|_| Error::DegeneratePrediction(format!("non-finite fit ({scale}, {shift})")))
}

/// Least-squares `(scale, shift)` minimising `Σ (s·p + b − t)²` over valid
/// pixels: `s = cov(p, t) / var(p)`, `b = mean(t) − s · mean(p)`.
pub fn solve_scale_shift_lsq(
    pred: &DepthGrid,
    target: &DepthGrid,
    mask: &ValidityMask,
) -> Result<AlignmentParams> {
    let (p, t) = valid_pairs(pred, target, mask)?;
    let (s, b) = lsq_fit(&p, &t)?;
    params(s, b, space_of(target))
}

/// Least-squares scale with the shift pinned at zero: `s = Σ p·t / Σ p²`.
pub fn solve_scale_lsq(
    pred: &DepthGrid,
    target: &DepthGrid,
    mask: &ValidityMask,
) -> Result<AlignmentParams> {
    let (p, t) = valid_pairs(pred, target, mask)?;
    if p.is_empty() {
        return Err(Error::InsufficientData("no valid pixels".into()));
    }
    let spp: f64 = p.iter().map(|v| v * v).sum();
    let spt: f64 = p.iter().zip(&t).map(|(a, b)| a * b).sum();
    if spp.is_nan() || spp / (p.len() as f64) < DEGENERATE_VARIANCE {
        return Err(Error::DegeneratePrediction(
            "prediction is identically zero".into(),
        ));
    }
    params(spt / spp, 0.0, space_of(target))
}

fn median_in_place(v: &mut [f64]) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Scale-only alignment: the median of `t / p` over valid pixels where both
/// are positive.
pub fn solve_scale_median(
    pred: &DepthGrid,
    target: &DepthGrid,
    mask: &ValidityMask,
) -> Result<AlignmentParams> {
    let (p, t) = valid_pairs(pred, target, mask)?;
    let mut ratios: Vec<f64> = p
        .iter()
        .zip(&t)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(a, b)| b / a)
        .collect();
    if ratios.is_empty() {
        return Err(Error::InsufficientData(
            "median scale needs a valid pixel with positive prediction and target".into(),
        ));
    }
    params(median_in_place(&mut ratios), 0.0, space_of(target))
}

fn is_inlier(s: f64, b: f64, p: f64, t: f64, threshold: f64) -> bool {
    (s * p + b - t).abs() <= threshold * t.abs().max(1e-9)
}

/// RANSAC over two-pixel samples, refitting by least squares on the largest
/// consensus set. Deterministic for a given `cfg.seed`.
pub fn solve_ransac(
    pred: &DepthGrid,
    target: &DepthGrid,
    mask: &ValidityMask,
    cfg: &RansacConfig,
) -> Result<AlignmentParams> {
    cfg.validate()?;
    let (p, t) = valid_pairs(pred, target, mask)?;
    let n = p.len();
    if n < RansacConfig::SAMPLE_SIZE {
        return Err(Error::InsufficientData(format!(
            "RANSAC needs at least {} valid pixels, got {n}",
            RansacConfig::SAMPLE_SIZE
        )));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.seed);
    let mut best: Option<(usize, f64, f64)> = None;
    for _ in 0..cfg.iterations {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        if p[i] == p[j] {
            continue;
        }
        let s = (t[i] - t[j]) / (p[i] - p[j]);
        let b = t[i] - s * p[i];
        if !s.is_finite() || !b.is_finite() {
            continue;
        }
        let count = p
            .iter()
            .zip(&t)
            .filter(|(&pk, &tk)| is_inlier(s, b, pk, tk, cfg.inlier_threshold))
            .count();
        if best.is_none_or(|(c, _, _)| count > c) {
            best = Some((count, s, b));
        }
    }
    let (_, s, b) = best.ok_or_else(|| {
        Error::DegeneratePrediction("every RANSAC sample had equal predictions".into())
    })?;
    let (ip, it): (Vec<f64>, Vec<f64>) = p
        .iter()
        .zip(&t)
        .filter(|(&pk, &tk)| is_inlier(s, b, pk, tk, cfg.inlier_threshold))
        .map(|(&a, &b)| (a, b))
        .unzip();
    let (s, b) = match lsq_fit(&ip, &it) {
        Ok(fit) => fit,
        // inlier set collapsed onto near-equal predictions: keep the sample model
        Err(Error::DegeneratePrediction(_)) | Err(Error::InsufficientData(_)) => (s, b),
        Err(e) => return Err(e),
    };
    params(s, b, space_of(target))
}

/// Recovers the z-shift of an affine-invariant point map.
///
/// For a pinhole camera, a true point satisfies `x = (u − cx) · z / fx`. A
/// prediction scaled by `s` and shifted by `b` along z has `x̂ = s·x` and
/// `ẑ = s·z + b`, so every pixel gives `b = ẑ − x̂ · fx / (u − cx)`. The
/// column index is taken as `u`; pixels within
/// [`PRINCIPAL_AXIS_MARGIN`] of `cx` are skipped, and the median of the
/// per-pixel candidates is returned.
pub fn recover_pointmap_shift(
    pm: &PointMap,
    intr: &CameraIntrinsics,
    mask: &ValidityMask,
) -> Result<f64> {
    if !mask.same_shape(pm.width, pm.height) {
        return Err(invalid("mask does not match point map"));
    }
    let mut candidates: Vec<f64> = mask
        .indices()
        .filter_map(|i| {
            let du = (i % pm.width) as f64 - intr.cx;
            let [x, _, z] = pm.xyz[i];
            (du.abs() > PRINCIPAL_AXIS_MARGIN && x.is_finite() && z.is_finite())
                .then(|| z - x * intr.fx / du)
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::InsufficientData(
            "no valid pixel away from the principal column".into(),
        ));
    }
    Ok(median_in_place(&mut candidates))
}

/// A prediction payload together with what it needs for alignment.
#[derive(Debug, Clone, Copy)]
pub enum Prediction<'a> {
    Grid(&'a DepthGrid),
    PointMap {
        map: &'a PointMap,
        intrinsics: CameraIntrinsics,
    },
}

/// Result of [`align_prediction`].
#[derive(Debug, Clone)]
pub struct AlignOutcome {
    /// Aligned prediction, always in depth units.
    pub aligned: DepthGrid,
    pub params: AlignmentParams,
    /// Pixels the metrics should use.
    pub mask: ValidityMask,
    /// Pixels that were valid going into a disparity-space alignment but
    /// whose aligned disparity could not be turned back into a depth.
    pub dropped: usize,
    /// Shift removed from a point map's z channel before alignment.
    pub pointmap_shift: Option<f64>,
}

fn run_solver(
    spec: &AlignSpec,
    pred: &DepthGrid,
    target: &DepthGrid,
    mask: &ValidityMask,
) -> Result<AlignmentParams> {
    match spec.solver {
        Solver::None => Ok(AlignmentParams::identity(space_of(target))),
        Solver::LsqScaleShift => solve_scale_shift_lsq(pred, target, mask),
        Solver::LsqScaleOnly => solve_scale_lsq(pred, target, mask),
        Solver::MedianScaleOnly => solve_scale_median(pred, target, mask),
        Solver::RansacScaleShift => {
            let cfg = spec.ransac.unwrap_or_default();
            solve_ransac(pred, target, mask, &cfg)
        }
    }
}

/// Aligns `pred` (already expressed in `spec.space`) to `gt_depth` and
/// returns the aligned depth.
fn align_in_space(
    pred: &DepthGrid,
    gt_depth: &DepthGrid,
    mask: &ValidityMask,
    spec: &AlignSpec,
) -> Result<AlignOutcome> {
    match spec.space {
        Space::Depth => {
            let gt = gt_depth.clone().with_kind(GridKind::Depth);
            let params = run_solver(spec, pred, &gt, mask)?;
            Ok(AlignOutcome {
                aligned: pred.apply_affine(&params).with_kind(GridKind::Depth),
                params,
                mask: mask.clone(),
                dropped: 0,
                pointmap_shift: None,
            })
        }
        Space::Disparity => {
            let (gt_disp, gt_ok) = gt_depth
                .clone()
                .with_kind(GridKind::Depth)
                .invert(DEFAULT_INVERT_FLOOR)?;
            let solve_mask = mask.intersect(&gt_ok)?;
            let params = run_solver(spec, pred, &gt_disp, &solve_mask)?;
            let aligned_disp = pred.apply_affine(&params).with_kind(GridKind::Disparity);
            let (aligned, ok) = aligned_disp.invert(DEFAULT_INVERT_FLOOR)?;
            let out_mask = solve_mask.intersect(&ok)?;
            Ok(AlignOutcome {
                aligned,
                params,
                dropped: solve_mask.count() - out_mask.count(),
                mask: out_mask,
                pointmap_shift: None,
            })
        }
    }
}

/// Routes a prediction through the alignment its representation calls for.
///
/// Ground-truth pixels that are not finite and positive are dropped from
/// the mask up front, as are non-finite prediction pixels.
pub fn align_prediction(
    pred: Prediction<'_>,
    gt_depth: &DepthGrid,
    repr: Representation,
    spec: &AlignSpec,
    mask: &ValidityMask,
) -> Result<AlignOutcome> {
    gt_depth.require_mask(mask)?;
    let gt_ok = ValidityMask::from_bits(
        gt_depth.width(),
        gt_depth.height(),
        gt_depth
            .values()
            .iter()
            .map(|&v| v.is_finite() && v > 0.0)
            .collect(),
    )?;
    let base = mask.intersect(&gt_ok)?;

    match (repr, pred) {
        (Representation::AffineInvariantPointmap, Prediction::PointMap { map, intrinsics }) => {
            if map.width != gt_depth.width() || map.height != gt_depth.height() {
                return Err(invalid(format!(
                    "point map is {}x{} but ground truth is {}x{}",
                    map.width,
                    map.height,
                    gt_depth.width(),
                    gt_depth.height()
                )));
            }
            let shift = recover_pointmap_shift(map, &intrinsics, &base)?;
            let z = map.depth();
            let base = base.intersect(&ValidityMask::finite(&z))?;
            let unshifted = z.apply_affine(&AlignmentParams::new(1.0, -shift, Space::Depth)?);
            let mut out = match spec.space {
                Space::Depth => align_in_space(&unshifted, gt_depth, &base, spec)?,
                Space::Disparity => {
                    let (disp, ok) = unshifted.invert(DEFAULT_INVERT_FLOOR)?;
                    let m = base.intersect(&ok)?;
                    let mut out = align_in_space(&disp, gt_depth, &m, spec)?;
                    out.dropped += base.count() - m.count();
                    out
                }
            };
            out.pointmap_shift = Some(shift);
            Ok(out)
        }
        (Representation::AffineInvariantPointmap, Prediction::Grid(_)) => Err(invalid(
            "point-map representation needs a point-map prediction",
        )),
        (_, Prediction::PointMap { .. }) => Err(invalid(
            "point-map prediction given for a grid representation",
        )),
        (repr, Prediction::Grid(grid)) => {
            grid.require_same_shape(gt_depth)?;
            let expected = match repr {
                Representation::AffineInvariantDisparity => Space::Disparity,
                _ => Space::Depth,
            };
            if spec.space != expected {
                return Err(invalid(format!(
                    "{repr:?} predictions are aligned in {expected:?} space, not {:?}",
                    spec.space
                )));
            }
            let base = base.intersect(&ValidityMask::finite(grid))?;
            let kind = match expected {
                Space::Depth => GridKind::Depth,
                Space::Disparity => GridKind::Disparity,
            };
            align_in_space(&grid.clone().with_kind(kind), gt_depth, &base, spec)
        }
    }
}
