use depth_eval::align::{
    align_prediction, recover_pointmap_shift, solve_ransac, solve_scale_median,
    solve_scale_shift_lsq, AlignSpec, PointMap, Prediction, RansacConfig,
};
use depth_eval::experiments::RngSpec;
use depth_eval::grid::{
    CameraIntrinsics, DepthGrid, GridKind, Representation, Space, ValidityMask,
};
use depth_eval::metrics::rmse;
use depth_eval::Error;

fn grid(values: Vec<f64>, w: usize, h: usize, kind: GridKind) -> DepthGrid {
    DepthGrid::from_vec(w, h, values, kind).unwrap()
}

#[test]
fn random_affine_depth_cases_are_recovered() {
    let (w, h) = (12, 9);
    let mask = ValidityMask::full(w, h).unwrap();
    for case in 0..50 {
        let mut s = RngSpec::new(100, case).stream();
        let gt: Vec<f64> = (0..w * h).map(|_| s.uniform(0.5, 20.0)).collect();
        let (scale, shift) = (s.uniform(0.1, 10.0), s.uniform(-5.0, 5.0));
        let pred = grid(
            gt.iter().map(|t| (t - shift) / scale).collect(),
            w,
            h,
            GridKind::Depth,
        );
        let gt = grid(gt, w, h, GridKind::Depth);
        let p = solve_scale_shift_lsq(&pred, &gt, &mask).unwrap();
        assert!((p.scale - scale).abs() < 1e-10 && (p.shift - shift).abs() < 1e-10);
    }
}

#[test]
fn pointmap_route_matches_metric_truth() {
    let (w, h) = (10, 8);
    let intr = CameraIntrinsics::new(300.0, 280.0, 4.5, 3.5).unwrap();
    let mut s = RngSpec::new(5, 0).stream();
    let depth: Vec<f64> = (0..w * h).map(|_| s.uniform(1.0, 6.0)).collect();
    let (scale, shift) = (0.4, 0.75);
    let xyz = depth
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let (u, v) = ((i % w) as f64, (i / w) as f64);
            let zs = z * scale;
            [
                (u - intr.cx) * zs / intr.fx,
                (v - intr.cy) * zs / intr.fy,
                zs + shift,
            ]
        })
        .collect();
    let pm = PointMap::new(w, h, xyz).unwrap();
    let gt = grid(depth, w, h, GridKind::Depth);
    let mask = ValidityMask::full(w, h).unwrap();
    assert!((recover_pointmap_shift(&pm, &intr, &mask).unwrap() - shift).abs() < 1e-10);

    let out = align_prediction(
        Prediction::PointMap {
            map: &pm,
            intrinsics: intr,
        },
        &gt,
        Representation::AffineInvariantPointmap,
        &AlignSpec::lsq(Space::Depth),
        &mask,
    )
    .unwrap();
    assert!((out.pointmap_shift.unwrap() - shift).abs() < 1e-10);
    assert!(rmse(&out.aligned, &gt, &out.mask).unwrap() < 1e-10);
}

#[test]
fn ransac_ignores_gross_outliers_but_lsq_does_not() {
    let (w, h) = (20, 20);
    let mut s = RngSpec::new(6, 0).stream();
    let gt: Vec<f64> = (0..w * h).map(|_| s.uniform(1.0, 10.0)).collect();
    let mut pred: Vec<f64> = gt.iter().map(|g| 2.0 * g - 1.0).collect();
    for i in (0..w * h).step_by(20) {
        pred[i] += 40.0;
    }
    let gt = grid(gt, w, h, GridKind::Depth);
    let pred = grid(pred, w, h, GridKind::Depth);
    let mask = ValidityMask::full(w, h).unwrap();
    let r = solve_ransac(&pred, &gt, &mask, &RansacConfig::with_seed(1)).unwrap();
    assert!((r.scale - 0.5).abs() < 1e-9 && (r.shift - 0.5).abs() < 1e-9);
    let l = solve_scale_shift_lsq(&pred, &gt, &mask).unwrap();
    assert!((l.scale - 0.5).abs() > 0.01);
    let again = solve_ransac(&pred, &gt, &mask, &RansacConfig::with_seed(1)).unwrap();
    assert_eq!(r, again);
}

#[test]
fn degenerate_and_empty_inputs() {
    let gt = grid(vec![1.0, 2.0, 3.0, 4.0], 2, 2, GridKind::Depth);
    let flat = grid(vec![5.0; 4], 2, 2, GridKind::Depth);
    let full = ValidityMask::full(2, 2).unwrap();
    let empty = ValidityMask::empty(2, 2).unwrap();
    assert!(matches!(
        solve_scale_shift_lsq(&flat, &gt, &full),
        Err(Error::DegeneratePrediction(_))
    ));
    assert!(matches!(
        solve_scale_shift_lsq(&gt, &gt, &empty),
        Err(Error::InsufficientData(_))
    ));
    assert!(solve_scale_median(&gt, &gt, &empty).is_err());
}
