//! Output formats for sweep results. All output is a pure function of the
//! result, so identical runs produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::zeno_static::{ConvergenceRecord, NormKind};

use super::ExperimentResult;

pub const CSV_HEADER: &str = "n,error,norm_kind";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// `n,error,norm_kind` rows; floats use the shortest representation that
/// parses back to the same value.
pub fn to_csv(result: &ExperimentResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &result.records {
        writeln!(out, "{},{:?},{}", r.n, r.error, r.norm_kind).unwrap();
    }
    out
}

/// Parses the output of [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ConvergenceRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, column: 1, message: format!("expected header `{CSV_HEADER}`") }),
    }
    let mut records = Vec::new();
    for (k, line) in lines {
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse { line: k + 1, column: 1, message };
        let fields: Vec<&str> = line.split(',').collect();
        let [n, error, kind] = fields[..] else {
            return Err(bad(format!("expected 3 fields, found {}", fields.len())));
        };
        records.push(ConvergenceRecord {
            n: n.parse().map_err(|e| bad(format!("n: {e}")))?,
            error: error.parse().map_err(|e| bad(format!("error: {e}")))?,
            norm_kind: kind.parse::<NormKind>().map_err(|e| bad(e.to_string()))?,
        });
    }
    Ok(records)
}

pub fn to_json(result: &ExperimentResult) -> String {
    let mut s = serde_json::to_string_pretty(result).expect("result serializes");
    s.push('\n');
    s
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

/// Log-log scatter of error against `n` with the fitted slope.
pub fn to_svg(result: &ExperimentResult) -> String {
    let pts: Vec<(f64, f64)> =
        result.records.iter().filter(|r| r.error > 0.0).map(|r| ((r.n as f64).log10(), r.error.log10())).collect();
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let (x0, x1) = bounds(pts.iter().map(|p| p.0));
    let (y0, y1) = bounds(pts.iter().map(|p| p.1));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    writeln!(
        out,
        r#"<path d="M{m:.1} {b:.1} H{r:.1} M{m:.1} {b:.1} V{m:.1}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    )
    .unwrap();
    for k in x0.ceil() as i32..=x1.floor() as i32 {
        let x = sx(k as f64);
        writeln!(
            out,
            r#"<text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle">1e{k}</text>"#,
            HEIGHT - MARGIN + 16.0
        )
        .unwrap();
    }
    for k in y0.ceil() as i32..=y1.floor() as i32 {
        let y = sy(k as f64);
        writeln!(out, r#"<text x="{:.1}" y="{y:.1}" font-size="11" text-anchor="end">1e{k}</text>"#, MARGIN - 6.0)
            .unwrap();
    }
    for &(x, y) in &pts {
        writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="steelblue"/>"#, sx(x), sy(y)).unwrap();
    }
    let label = match result.slope {
        Some(s) => format!("slope {s:.3}"),
        None => "slope n/a".to_string(),
    };
    writeln!(
        out,
        r#"<text x="{:.1}" y="24" font-size="14" text-anchor="middle">{} ({}), {label}</text>"#,
        WIDTH / 2.0,
        escape(&result.scenario),
        result.metadata.norm_kind
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">n</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

/// Padded range of the values; a unit interval around a single value.
fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render(result: &ExperimentResult, format: Format) -> String {
    match format {
        Format::Csv => to_csv(result),
        Format::Json => to_json(result),
        Format::Svg => to_svg(result),
    }
}

/// Writes `result` to `out` in the given format.
pub fn emit(result: &ExperimentResult, format: Format, out: impl AsRef<Path>) -> Result<()> {
    std::fs::write(out, render(result, format))?;
    Ok(())
}
