use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

use super::ExperimentCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveFormat {
    Csv,
    Svg,
}

impl FromStr for CurveFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(CurveFormat::Csv),
            "svg" => Ok(CurveFormat::Svg),
            other => Err(invalid(format!("unknown curve format `{other}`"))),
        }
    }
}

fn check_nonempty(curves: &[ExperimentCurve]) -> Result<()> {
    if curves.is_empty() {
        return Err(invalid("no curves to emit"));
    }
    for c in curves {
        c.validate()?;
    }
    Ok(())
}

/// One row per x value, one column per curve. All curves must share the
/// same x values in the same order.
pub fn curves_to_csv(curves: &[ExperimentCurve]) -> Result<String> {
    check_nonempty(curves)?;
    let first = &curves[0];
    for c in &curves[1..] {
        let same = c.points.len() == first.points.len()
            && c.xs()
                .zip(first.xs())
                .all(|(a, b)| a.to_bits() == b.to_bits());
        if !same {
            return Err(invalid(format!(
                "curve `{}` is not sampled at the same x values as `{}`",
                c.label, first.label
            )));
        }
    }
    if let Some(c) = curves.iter().find(|c| c.label.contains([',', '"', '\n'])) {
        return Err(invalid(format!(
            "curve label `{}` is not CSV-safe",
            c.label
        )));
    }

    let mut out = String::from("x");
    for c in curves {
        out.push(',');
        out.push_str(&c.label);
    }
    out.push('\n');
    for (i, x) in first.xs().enumerate() {
        write!(out, "{x}").unwrap();
        for c in curves {
            write!(out, ",{}", c.points[i].1).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// A standalone line chart: fixed 800×600 viewBox, axes with min/max tick
/// labels, one polyline per curve and a legend.
pub fn curves_to_svg(curves: &[ExperimentCurve]) -> Result<String> {
    check_nonempty(curves)?;
    let (x0, x1) = span(curves.iter().flat_map(|c| c.xs()));
    let (y0, y1) = span(curves.iter().flat_map(|c| c.ys()));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(
        s,
        r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black" stroke-width="1"/>"#
    )
    .unwrap();
    for (v, x, anchor) in [(x0, l, "start"), (x1, r, "end")] {
        writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="{anchor}">{v:.4}</text>"#,
            b + 18.0
        )
        .unwrap();
    }
    for (v, y) in [(y0, b), (y1, t)] {
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{v:.4}</text>"#,
            l - 6.0,
            y + 4.0
        )
        .unwrap();
    }

    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = c
            .points
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", px(x), py(y)))
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        )
        .unwrap();
        let ly = t + 16.0 * i as f64;
        writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            r - 160.0,
            r - 140.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            r - 134.0,
            ly + 4.0,
            escape_xml(&c.label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes the curves to `path` in the given format.
pub fn emit_curves(curves: &[ExperimentCurve], path: &Path, format: CurveFormat) -> Result<()> {
    let text = match format {
        CurveFormat::Csv => curves_to_csv(curves)?,
        CurveFormat::Svg => curves_to_svg(curves)?,
    };
    fs::write(path, text)?;
    Ok(())
}
