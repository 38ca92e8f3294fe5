use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use depth_eval::align::{align_prediction, AlignSpec, Prediction, RansacConfig, Solver};
use depth_eval::bench::{
    average_rank, emit_report, load_table, ReportFormat, TableFormat, DEFAULT_BASELINE,
};
use depth_eval::experiments::{
    default_sizes, emit_curves, flatten_sensitivity, run_robustness, run_sensitivity, AlignMode,
    CurveFormat, ExperimentCurve, RobustnessConfig, SensitivityConfig,
};
use depth_eval::grid::{CameraIntrinsics, GridKind, Representation, Space};
use depth_eval::io::{load_grid, load_mask, load_pointmap};
use depth_eval::metrics::MetricReport;
use depth_eval::{Error, Result};

const EXIT_INVALID: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

/// Evaluate depth predictions, run the alignment-bias experiments and rank
/// benchmark tables.
#[derive(Parser, Debug)]
#[command(name = "depth-eval", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Align a prediction to ground truth and compute depth metrics.
    Eval(EvalArgs),
    /// Run a seeded synthetic experiment and write its curves.
    Experiment(ExperimentArgs),
    /// Rank methods across result tables by improvement ratio.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReprArg {
    Metric,
    AffineDepth,
    AffineDisparity,
    Pointmap,
}

impl From<ReprArg> for Representation {
    fn from(r: ReprArg) -> Self {
        match r {
            ReprArg::Metric => Representation::MetricDepth,
            ReprArg::AffineDepth => Representation::AffineInvariantDepth,
            ReprArg::AffineDisparity => Representation::AffineInvariantDisparity,
            ReprArg::Pointmap => Representation::AffineInvariantPointmap,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverArg {
    None,
    Lsq,
    Median,
    Ransac,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::None => Solver::None,
            SolverArg::Lsq => Solver::LsqScaleShift,
            SolverArg::Median => Solver::MedianScaleOnly,
            SolverArg::Ransac => Solver::RansacScaleShift,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpaceArg {
    Depth,
    Disparity,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Prediction grid (.pfm or CSV); a 3-channel PFM for point maps.
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth depth grid (.pfm or CSV).
    #[arg(long)]
    gt: PathBuf,
    /// Optional validity mask; finite non-zero pixels are valid.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// What the prediction represents.
    #[arg(long, value_enum, default_value = "metric")]
    repr: ReprArg,
    /// Alignment solver.
    #[arg(long, value_enum, default_value = "none")]
    align: SolverArg,
    /// Alignment space [default: disparity for affine-disparity, else depth].
    #[arg(long, value_enum)]
    space: Option<SpaceArg>,
    /// RANSAC seed.
    #[arg(long, default_value_t = 0)]
    ransac_seed: u64,
    /// RANSAC relative inlier threshold.
    #[arg(long, default_value_t = 0.05)]
    ransac_threshold: f64,
    /// RANSAC iterations.
    #[arg(long, default_value_t = 256)]
    ransac_iterations: usize,
    /// Focal length in x, pixels (point maps only).
    #[arg(long)]
    fx: Option<f64>,
    /// Focal length in y, pixels [default: fx].
    #[arg(long)]
    fy: Option<f64>,
    /// Principal point x [default: (width - 1) / 2].
    #[arg(long, allow_negative_numbers = true)]
    cx: Option<f64>,
    /// Principal point y [default: (height - 1) / 2].
    #[arg(long, allow_negative_numbers = true)]
    cy: Option<f64>,
    /// Output JSON path; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Robustness,
    Sensitivity,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Experiment to run (alternative to --kind).
    #[arg(value_enum, conflicts_with = "kind")]
    kind_pos: Option<Kind>,
    /// Experiment to run.
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Side of the square synthetic grid.
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Largest disturbance factor (robustness).
    #[arg(long, default_value_t = 1.8, allow_negative_numbers = true)]
    max_disturbance: f64,
    /// Disturbance step (robustness).
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    step: f64,
    /// Noise standard deviation per unit disturbance (robustness).
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    noise_scale: f64,
    /// Block sizes as start:end:step, descending (sensitivity)
    /// [default: n:10:10].
    #[arg(long)]
    sizes: Option<String>,
    /// Comma-separated align modes (sensitivity).
    #[arg(long, default_value = "none,lsq,ransac")]
    align: String,
    /// RANSAC relative inlier threshold (sensitivity).
    #[arg(long, default_value_t = 0.2)]
    ransac_threshold: f64,
    /// RANSAC iterations (sensitivity).
    #[arg(long, default_value_t = 256)]
    ransac_iterations: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Curve CSV path [default: <kind>.csv].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG chart here.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Run levels one after another instead of in parallel.
    #[arg(long)]
    serial: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Md,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Result tables (.csv or .json).
    #[arg(required = true)]
    tables: Vec<PathBuf>,
    /// Name of the baseline row in every table.
    #[arg(long, default_value = DEFAULT_BASELINE)]
    baseline: String,
    /// Report format.
    #[arg(long, value_enum, default_value = "md")]
    format: FormatArg,
    /// Output path; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<bool> {
    match out {
        Some(p) => {
            fs::write(p, text)?;
            Ok(true)
        }
        None => {
            print!("{text}");
            Ok(false)
        }
    }
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let repr: Representation = a.repr.into();
    let space = match a.space {
        Some(SpaceArg::Depth) => Space::Depth,
        Some(SpaceArg::Disparity) => Space::Disparity,
        None if repr == Representation::AffineInvariantDisparity => Space::Disparity,
        None => Space::Depth,
    };
    let mut spec = AlignSpec::new(a.align.into(), space);
    if spec.solver == Solver::RansacScaleShift {
        let cfg = RansacConfig {
            iterations: a.ransac_iterations,
            inlier_threshold: a.ransac_threshold,
            seed: a.ransac_seed,
        };
        cfg.validate()?;
        spec.ransac = Some(cfg);
    }

    let (gt, gt_ok) = load_grid(&a.gt, GridKind::Depth)?;
    let mut mask = gt_ok;
    if let Some(p) = &a.mask {
        mask = mask.intersect(&load_mask(p)?)?;
    }

    let outcome = if repr == Representation::AffineInvariantPointmap {
        let (map, ok) = load_pointmap(&a.pred)?;
        let fx =
            a.fx.ok_or_else(|| Error::InvalidArgument("point maps need --fx".into()))?;
        let intrinsics = CameraIntrinsics::new(
            fx,
            a.fy.unwrap_or(fx),
            a.cx.unwrap_or((map.width() as f64 - 1.0) / 2.0),
            a.cy.unwrap_or((map.height() as f64 - 1.0) / 2.0),
        )?;
        let mask = mask.intersect(&ok)?;
        align_prediction(
            Prediction::PointMap {
                map: &map,
                intrinsics,
            },
            &gt,
            repr,
            &spec,
            &mask,
        )?
    } else {
        let kind = if repr == Representation::AffineInvariantDisparity {
            GridKind::Disparity
        } else {
            GridKind::Depth
        };
        let (pred, ok) = load_grid(&a.pred, kind)?;
        let mask = mask.intersect(&ok)?;
        align_prediction(Prediction::Grid(&pred), &gt, repr, &spec, &mask)?
    };
    let metrics = MetricReport::from_outcome(&outcome, &gt)?;

    let mut doc = serde_json::json!({
        "params": outcome.params,
        "metrics": metrics,
    });
    if let Some(shift) = outcome.pointmap_shift {
        doc["pointmap_shift"] = serde_json::json!(shift);
    }
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    if write_or_print(a.out.as_deref(), &text)? {
        println!(
            "delta1={:.6} abs_rel={:.6} rmse={:.6} scale={} shift={} valid={}",
            metrics.delta1,
            metrics.abs_rel,
            metrics.rmse,
            outcome.params.scale,
            outcome.params.shift,
            metrics.valid_count
        );
    }
    Ok(())
}

fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("--sizes must be start:end:step, got `{spec}`"));
    let parts: Vec<usize> = spec
        .split(':')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, end, step] = parts[..] else {
        return Err(bad());
    };
    if step == 0 || end == 0 || start < end {
        return Err(bad());
    }
    Ok((end..=start).rev().step_by(step).collect())
}

fn cmd_experiment(a: ExperimentArgs) -> Result<()> {
    let kind = a
        .kind
        .or(a.kind_pos)
        .ok_or_else(|| Error::InvalidArgument("choose robustness or sensitivity".into()))?;
    let curves: Vec<ExperimentCurve> = match kind {
        Kind::Robustness => run_robustness(&RobustnessConfig {
            n: a.n,
            max_disturbance: a.max_disturbance,
            step: a.step,
            noise_scale: a.noise_scale,
            seed: a.seed,
            parallel: !a.serial,
        })?
        .curves(),
        Kind::Sensitivity => {
            let sizes = match &a.sizes {
                Some(s) => parse_sizes(s)?,
                None => default_sizes(a.n),
            };
            let align_modes = a
                .align
                .split(',')
                .map(str::parse::<AlignMode>)
                .collect::<Result<Vec<_>>>()?;
            let out = run_sensitivity(&SensitivityConfig {
                n: a.n,
                sizes,
                align_modes,
                ransac: RansacConfig {
                    iterations: a.ransac_iterations,
                    inlier_threshold: a.ransac_threshold,
                    seed: 0,
                },
                error_scale: 1.0,
                seed: a.seed,
                parallel: !a.serial,
            })?;
            flatten_sensitivity(&out)
        }
    };

    let name = match kind {
        Kind::Robustness => "robustness.csv",
        Kind::Sensitivity => "sensitivity.csv",
    };
    let out = a.out.unwrap_or_else(|| PathBuf::from(name));
    emit_curves(&curves, &out, CurveFormat::Csv)?;
    if let Some(svg) = &a.svg {
        emit_curves(&curves, svg, CurveFormat::Svg)?;
    }
    println!(
        "wrote {} curves x {} points to {}",
        curves.len(),
        curves[0].points.len(),
        out.display()
    );
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let tables = a
        .tables
        .iter()
        .map(|p| load_table(p, TableFormat::from_path(p), Some(&a.baseline)))
        .collect::<Result<Vec<_>>>()?;
    let report = average_rank(&tables)?;
    let format = match a.format {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Md => ReportFormat::Markdown,
    };
    let text = emit_report(&report, format)?;
    if write_or_print(a.out.as_deref(), &text)? {
        let best = report
            .average_rank
            .iter()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(m, r)| format!("{m} ({r:.2})"))
            .unwrap_or_default();
        println!(
            "ranked {} methods over {} tasks; best average rank: {best}",
            report.average_rank.len(),
            report.per_task.len()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric_degeneracy() {
                ExitCode::from(EXIT_DEGENERATE)
            } else {
                ExitCode::from(EXIT_INVALID)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_ranges() {
        assert_eq!(
            parse_sizes("100:10:10").unwrap(),
            vec![100, 90, 80, 70, 60, 50, 40, 30, 20, 10]
        );
        assert_eq!(parse_sizes("25:5:10").unwrap(), vec![25, 15, 5]);
        assert_eq!(parse_sizes("7:7:3").unwrap(), vec![7]);
        for bad in ["10:100:10", "100:10:0", "100:0:10", "a:b:c", "100:10"] {
            assert!(parse_sizes(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
