//! Dense grids, validity masks and the elementwise transforms shared by the
//! solvers and metrics.
//!
//! Grids are row-major: pixel `(x, y)` lives at `values[y * width + x]`, so
//! "the top-left `m × m` block" means rows `0..m` and columns `0..m`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default reciprocal floor used by [`DepthGrid::invert`].
pub const DEFAULT_INVERT_FLOOR: f64 = 1e-9;

/// What the values of a grid mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Depth,
    Disparity,
    Generic,
}

impl GridKind {
    /// The kind obtained by taking reciprocals.
    pub fn inverted(self) -> Self {
        match self {
            GridKind::Depth => GridKind::Disparity,
            GridKind::Disparity => GridKind::Depth,
            GridKind::Generic => GridKind::Generic,
        }
    }
}

/// The space an alignment is solved in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Depth,
    Disparity,
}

impl std::str::FromStr for Space {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depth" => Ok(Space::Depth),
            "disparity" => Ok(Space::Disparity),
            other => Err(invalid(format!("unknown space `{other}`"))),
        }
    }
}

/// A scale-and-shift pair `v ↦ scale · v + shift`, tagged with the space it
/// was solved in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentParams {
    pub scale: f64,
    pub shift: f64,
    pub space: Space,
}

impl AlignmentParams {
    pub fn new(scale: f64, shift: f64, space: Space) -> Result<Self> {
        if !scale.is_finite() || !shift.is_finite() {
            return Err(invalid(format!(
                "alignment parameters must be finite, got ({scale}, {shift})"
            )));
        }
        Ok(Self {
            scale,
            shift,
            space,
        })
    }

    pub fn identity(space: Space) -> Self {
        Self {
            scale: 1.0,
            shift: 0.0,
            space,
        }
    }

    /// The map undoing this one. Fails for a zero scale.
    pub fn inverse(&self) -> Result<Self> {
        if self.scale == 0.0 {
            return Err(invalid("zero scale has no inverse"));
        }
        Self::new(1.0 / self.scale, -self.shift / self.scale, self.space)
    }

    pub fn is_identity(&self) -> bool {
        self.scale == 1.0 && self.shift == 0.0
    }
}

/// How a model expresses its prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    MetricDepth,
    AffineInvariantDepth,
    AffineInvariantDisparity,
    AffineInvariantPointmap,
}

impl std::str::FromStr for Representation {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metric" | "metric-depth" => Ok(Representation::MetricDepth),
            "affine-depth" | "affine-invariant-depth" => Ok(Representation::AffineInvariantDepth),
            "affine-disparity" | "affine-invariant-disparity" => {
                Ok(Representation::AffineInvariantDisparity)
            }
            "pointmap" | "affine-invariant-pointmap" => Ok(Representation::AffineInvariantPointmap),
            other => Err(invalid(format!("unknown representation `{other}`"))),
        }
    }
}

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0) || !fx.is_finite() || !fy.is_finite() {
            return Err(invalid(format!(
                "focal lengths must be positive and finite, got fx={fx}, fy={fy}"
            )));
        }
        if !cx.is_finite() || !cy.is_finite() {
            return Err(invalid("principal point must be finite"));
        }
        Ok(Self { fx, fy, cx, cy })
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(invalid(format!(
            "grid dimensions must be positive, got {width}x{height}"
        )));
    }
    Ok(())
}

/// One boolean per pixel; only `true` pixels take part in any computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl ValidityMask {
    pub fn full(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            bits: vec![true; width * height],
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            bits: vec![false; width * height],
        })
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if bits.len() != width * height {
            return Err(invalid(format!(
                "mask has {} bits, expected {}x{}",
                bits.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Valid wherever the grid value is finite.
    pub fn finite(grid: &DepthGrid) -> Self {
        Self {
            width: grid.width,
            height: grid.height,
            bits: grid.values.iter().map(|v| v.is_finite()).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn same_shape(&self, width: usize, height: usize) -> bool {
        self.width == width && self.height == height
    }

    /// Pixelwise logical AND.
    pub fn intersect(&self, other: &ValidityMask) -> Result<ValidityMask> {
        if !other.same_shape(self.width, self.height) {
            return Err(invalid(format!(
                "mask shapes differ: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(ValidityMask {
            width: self.width,
            height: self.height,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a && b)
                .collect(),
        })
    }

    /// Indices of valid pixels in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }
}

/// Free-function form of [`ValidityMask::intersect`].
pub fn intersect_masks(a: &ValidityMask, b: &ValidityMask) -> Result<ValidityMask> {
    a.intersect(b)
}

/// Row-major grid of depth, disparity or unitless values.
///
/// Pixels outside an accompanying [`ValidityMask`] may hold anything,
/// including NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthGrid {
    width: usize,
    height: usize,
    values: Vec<f64>,
    kind: GridKind,
}

impl DepthGrid {
    /// A grid with every pixel set to `fill`.
    pub fn filled(width: usize, height: usize, fill: f64, kind: GridKind) -> Result<Self> {
        check_dims(width, height)?;
        if !fill.is_finite() {
            return Err(invalid(format!("fill value must be finite, got {fill}")));
        }
        Ok(Self {
            width,
            height,
            values: vec![fill; width * height],
            kind,
        })
    }

    pub fn from_vec(width: usize, height: usize, values: Vec<f64>, kind: GridKind) -> Result<Self> {
        check_dims(width, height)?;
        if values.len() != width * height {
            return Err(invalid(format!(
                "grid has {} values, expected {}x{}",
                values.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            values,
            kind,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: GridKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn same_shape(&self, other: &DepthGrid) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn require_same_shape(&self, other: &DepthGrid) -> Result<()> {
        if !self.same_shape(other) {
            return Err(invalid(format!(
                "grid shapes differ: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    pub(crate) fn require_mask(&self, mask: &ValidityMask) -> Result<()> {
        if !mask.same_shape(self.width, self.height) {
            return Err(invalid(format!(
                "mask is {}x{} but grid is {}x{}",
                mask.width, mask.height, self.width, self.height
            )));
        }
        Ok(())
    }

    /// Pixelwise reciprocal. Pixels below `floor` (including NaN and
    /// non-positive values) become invalid and hold NaN; the kind flips
    /// between depth and disparity.
    pub fn invert(&self, floor: f64) -> Result<(DepthGrid, ValidityMask)> {
        if floor.is_nan() || floor <= 0.0 {
            return Err(invalid(format!(
                "reciprocal floor must be positive, got {floor}"
            )));
        }
        let mut bits = Vec::with_capacity(self.values.len());
        let values = self
            .values
            .iter()
            .map(|&v| {
                let ok = v >= floor && v.is_finite();
                bits.push(ok);
                if ok {
                    1.0 / v
                } else {
                    f64::NAN
                }
            })
            .collect();
        Ok((
            DepthGrid {
                width: self.width,
                height: self.height,
                values,
                kind: self.kind.inverted(),
            },
            ValidityMask {
                width: self.width,
                height: self.height,
                bits,
            },
        ))
    }

    /// Pixelwise `scale · v + shift`.
    pub fn apply_affine(&self, params: &AlignmentParams) -> DepthGrid {
        let (s, b) = (params.scale, params.shift);
        let values = if params.is_identity() {
            self.values.clone()
        } else {
            self.values.iter().map(|&v| s * v + b).collect()
        };
        DepthGrid {
            width: self.width,
            height: self.height,
            values,
            kind: self.kind,
        }
    }
}

/// Free-function form of [`DepthGrid::filled`].
pub fn make_grid(width: usize, height: usize, fill: f64, kind: GridKind) -> Result<DepthGrid> {
    DepthGrid::filled(width, height, fill, kind)
}

/// Free-function form of [`DepthGrid::invert`].
pub fn invert_grid(grid: &DepthGrid, floor: f64) -> Result<(DepthGrid, ValidityMask)> {
    grid.invert(floor)
}

/// Free-function form of [`DepthGrid::apply_affine`].
pub fn apply_affine(grid: &DepthGrid, params: &AlignmentParams) -> DepthGrid {
    grid.apply_affine(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(values: &[f64], kind: GridKind) -> DepthGrid {
        DepthGrid::from_vec(values.len(), 1, values.to_vec(), kind).unwrap()
    }

    #[test]
    fn make_grid_constant_fill() {
        let g = make_grid(2, 2, 0.0, GridKind::Generic).unwrap();
        assert_eq!(g.values(), &[0.0; 4]);
        let g = make_grid(1, 3, 5.0, GridKind::Depth).unwrap();
        assert_eq!(g.values(), &[5.0, 5.0, 5.0]);
        assert_eq!((g.width(), g.height()), (1, 3));
    }

    #[test]
    fn make_grid_rejects_zero_dimension() {
        assert!(matches!(
            make_grid(0, 3, 1.0, GridKind::Depth),
            Err(crate::Error::InvalidArgument(_))
        ));
        assert!(make_grid(3, 0, 1.0, GridKind::Depth).is_err());
        assert!(make_grid(3, 3, f64::NAN, GridKind::Depth).is_err());
    }

    #[test]
    fn invert_exact_reciprocals() {
        let (inv, mask) = row(&[1.0, 2.0, 4.0], GridKind::Depth).invert(1e-9).unwrap();
        assert_eq!(inv.values(), &[1.0, 0.5, 0.25]);
        assert_eq!(mask.count(), 3);
        assert_eq!(inv.kind(), GridKind::Disparity);
    }

    #[test]
    fn invert_marks_zero_invalid() {
        let (inv, mask) = row(&[1.0, 0.0, 2.0], GridKind::Depth).invert(1e-9).unwrap();
        assert_eq!(mask.bits(), &[true, false, true]);
        assert_eq!(inv.values()[0], 1.0);
        assert_eq!(inv.values()[2], 0.5);
        assert!(inv.values()[1].is_nan());
    }

    #[test]
    fn invert_rejects_non_positive_floor() {
        assert!(row(&[1.0], GridKind::Depth).invert(0.0).is_err());
    }

    #[test]
    fn affine_examples() {
        let g = row(&[1.0, 2.0], GridKind::Generic);
        let id = AlignmentParams::identity(Space::Depth);
        assert_eq!(g.apply_affine(&id).values(), &[1.0, 2.0]);
        let p = AlignmentParams::new(2.0, 3.0, Space::Depth).unwrap();
        let h = g.apply_affine(&p);
        assert_eq!(h.values(), &[5.0, 7.0]);
        let back = h.apply_affine(&AlignmentParams::new(0.5, -1.5, Space::Depth).unwrap());
        assert_eq!(back.values(), g.values());
    }

    #[test]
    fn params_must_be_finite() {
        assert!(AlignmentParams::new(f64::INFINITY, 0.0, Space::Depth).is_err());
        assert!(AlignmentParams::new(1.0, f64::NAN, Space::Depth).is_err());
        assert!(AlignmentParams::new(0.0, 1.0, Space::Depth)
            .unwrap()
            .inverse()
            .is_err());
    }

    #[test]
    fn mask_intersection() {
        let t = ValidityMask::full(2, 2).unwrap();
        let f = ValidityMask::empty(2, 2).unwrap();
        assert_eq!(intersect_masks(&t, &t).unwrap(), t);
        assert_eq!(intersect_masks(&t, &f).unwrap(), f);
        let other = ValidityMask::full(3, 2).unwrap();
        assert!(matches!(
            intersect_masks(&t, &other),
            Err(crate::Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn intrinsics_require_positive_focal() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(CameraIntrinsics::new(1.0, -1.0, 0.0, 0.0).is_err());
        assert!(CameraIntrinsics::new(100.0, 100.0, 50.0, 50.0).is_ok());
    }

    proptest! {
        #[test]
        fn invert_is_involution(values in prop::collection::vec(1e-6f64..1e6, 1..64)) {
            let g = row(&values, GridKind::Depth);
            let (inv, m1) = g.invert(DEFAULT_INVERT_FLOOR).unwrap();
            let (back, m2) = inv.invert(DEFAULT_INVERT_FLOOR).unwrap();
            prop_assert_eq!(m1.count(), values.len());
            prop_assert_eq!(m2.count(), values.len());
            prop_assert_eq!(back.kind(), GridKind::Depth);
            for (a, b) in back.values().iter().zip(&values) {
                prop_assert!(((a - b) / b).abs() <= 1e-12);
            }
        }

        #[test]
        fn affine_identity_is_bytewise(values in prop::collection::vec(-1e6f64..1e6, 1..64)) {
            let g = row(&values, GridKind::Generic);
            let out = g.apply_affine(&AlignmentParams::identity(Space::Depth));
            for (a, b) in out.values().iter().zip(&values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn affine_inverse_recovers(
            values in prop::collection::vec(0.1f64..100.0, 1..64),
            s in prop_oneof![0.05f64..20.0, -20.0f64..-0.05],
            b in -10.0f64..10.0,
        ) {
            let g = row(&values, GridKind::Generic);
            let p = AlignmentParams::new(s, b, Space::Depth).unwrap();
            let back = g.apply_affine(&p).apply_affine(&p.inverse().unwrap());
            for (a, v) in back.values().iter().zip(&values) {
                prop_assert!(!a.is_nan());
                prop_assert!(((a - v) / v).abs() <= 1e-12, "{} vs {}", a, v);
            }
        }
    }
}
