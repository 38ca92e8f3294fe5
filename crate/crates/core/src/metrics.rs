//! Depth metrics over a validity mask.
//!
//! All reductions run left to right in pixel order, so results are bitwise
//! reproducible.

use serde::{Deserialize, Serialize, Serializer};

use crate::align::{align_prediction, AlignOutcome, AlignSpec, Prediction};
use crate::error::{invalid, Error, Result};
use crate::grid::{DepthGrid, Representation, ValidityMask};

/// Standard δ thresholds: 1.25, 1.25², 1.25³.
pub const DELTA_THRESHOLDS: [f64; 3] = [1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25];

/// Absolute-error thresholds reported as bad-pixel rates.
pub const BAD_PIXEL_THRESHOLDS: [f64; 3] = [1.0, 2.0, 3.0];

fn pairs<'a>(
    aligned: &'a DepthGrid,
    gt: &'a DepthGrid,
    mask: &'a ValidityMask,
) -> Result<impl Iterator<Item = (f64, f64)> + 'a> {
    aligned.require_same_shape(gt)?;
    aligned.require_mask(mask)?;
    if mask.count() == 0 {
        return Err(Error::InsufficientData("no valid pixels".into()));
    }
    let (a, d) = (aligned.values(), gt.values());
    Ok(mask.indices().map(move |i| (a[i], d[i])))
}

fn delta_pass(a: f64, d: f64, threshold: f64) -> bool {
    a > 0.0 && (a / d).max(d / a) < threshold
}

/// `(passing, valid)` pixel counts for the δ criterion.
pub fn delta_counts(
    aligned: &DepthGrid,
    gt: &DepthGrid,
    mask: &ValidityMask,
    threshold: f64,
) -> Result<(usize, usize)> {
    if threshold.is_nan() || threshold <= 1.0 {
        return Err(invalid(format!(
            "δ threshold must exceed 1, got {threshold}"
        )));
    }
    let mut pass = 0;
    let mut total = 0;
    for (a, d) in pairs(aligned, gt, mask)? {
        total += 1;
        if delta_pass(a, d, threshold) {
            pass += 1;
        }
    }
    Ok((pass, total))
}

/// Fraction of valid pixels with `max(a/d, d/a) < threshold`. Non-positive
/// aligned values always fail.
pub fn delta_accuracy(
    aligned: &DepthGrid,
    gt: &DepthGrid,
    mask: &ValidityMask,
    threshold: f64,
) -> Result<f64> {
    let (pass, total) = delta_counts(aligned, gt, mask, threshold)?;
    Ok(pass as f64 / total as f64)
}

fn mean_of(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Mean of `|a − d| / d`.
pub fn abs_rel(aligned: &DepthGrid, gt: &DepthGrid, mask: &ValidityMask) -> Result<f64> {
    Ok(mean_of(
        pairs(aligned, gt, mask)?.map(|(a, d)| (a - d).abs() / d),
    ))
}

pub fn rmse(aligned: &DepthGrid, gt: &DepthGrid, mask: &ValidityMask) -> Result<f64> {
    Ok(mean_of(pairs(aligned, gt, mask)?.map(|(a, d)| (a - d) * (a - d))).sqrt())
}

pub fn mae(aligned: &DepthGrid, gt: &DepthGrid, mask: &ValidityMask) -> Result<f64> {
    Ok(mean_of(
        pairs(aligned, gt, mask)?.map(|(a, d)| (a - d).abs()),
    ))
}

/// Fraction of valid pixels with `|a − d| > threshold`.
pub fn bad_pixel_rate(
    aligned: &DepthGrid,
    gt: &DepthGrid,
    mask: &ValidityMask,
    threshold: f64,
) -> Result<f64> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(invalid(format!(
            "bad-pixel threshold must be positive, got {threshold}"
        )));
    }
    Ok(mean_of(pairs(aligned, gt, mask)?.map(|(a, d)| {
        f64::from(u8::from((a - d).abs() > threshold))
    })))
}

/// Rounds to six significant digits for serialization.
fn six_sig<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*v, 6))
}

fn round_sig(v: f64, digits: usize) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{:.*e}", digits - 1, v).parse().unwrap_or(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BadPixelRate {
    #[serde(serialize_with = "six_sig")]
    pub threshold: f64,
    #[serde(serialize_with = "six_sig")]
    pub fraction: f64,
}

/// The full metric suite for one prediction/ground-truth pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    #[serde(serialize_with = "six_sig")]
    pub delta1: f64,
    #[serde(serialize_with = "six_sig")]
    pub delta2: f64,
    #[serde(serialize_with = "six_sig")]
    pub delta3: f64,
    #[serde(serialize_with = "six_sig")]
    pub abs_rel: f64,
    #[serde(serialize_with = "six_sig")]
    pub rmse: f64,
    #[serde(serialize_with = "six_sig")]
    pub mae: f64,
    pub bad_pixel: Vec<BadPixelRate>,
    pub valid_count: usize,
}

impl MetricReport {
    /// Computes every metric on an already aligned prediction.
    ///
    /// `dropped` pixels (valid before alignment, lost when an aligned
    /// disparity could not be inverted) count as δ failures; the remaining
    /// metrics only see `mask`.
    pub fn compute(
        aligned: &DepthGrid,
        gt: &DepthGrid,
        mask: &ValidityMask,
        dropped: usize,
    ) -> Result<Self> {
        let delta = |t: f64| -> Result<f64> {
            let (pass, total) = delta_counts(aligned, gt, mask, t)?;
            Ok(pass as f64 / (total + dropped) as f64)
        };
        Ok(MetricReport {
            delta1: delta(DELTA_THRESHOLDS[0])?,
            delta2: delta(DELTA_THRESHOLDS[1])?,
            delta3: delta(DELTA_THRESHOLDS[2])?,
            abs_rel: abs_rel(aligned, gt, mask)?,
            rmse: rmse(aligned, gt, mask)?,
            mae: mae(aligned, gt, mask)?,
            bad_pixel: BAD_PIXEL_THRESHOLDS
                .iter()
                .map(|&t| {
                    Ok(BadPixelRate {
                        threshold: t,
                        fraction: bad_pixel_rate(aligned, gt, mask, t)?,
                    })
                })
                .collect::<Result<_>>()?,
            valid_count: mask.count(),
        })
    }

    pub fn from_outcome(outcome: &AlignOutcome, gt: &DepthGrid) -> Result<Self> {
        Self::compute(&outcome.aligned, gt, &outcome.mask, outcome.dropped)
    }
}

/// Aligns a prediction as its representation requires, then measures it.
pub fn evaluate(
    pred: Prediction<'_>,
    gt_depth: &DepthGrid,
    repr: Representation,
    spec: &AlignSpec,
    mask: &ValidityMask,
) -> Result<MetricReport> {
    let outcome = align_prediction(pred, gt_depth, repr, spec, mask)?;
    MetricReport::from_outcome(&outcome, gt_depth)
}
