//! SVG plots drawn from report rows. Log axes are drawn as log10 of the data.

use std::fs;
use std::path::{Path, PathBuf};

use plotters::prelude::*;
use serde_json::Value;
use tracelab::fit::fit_line;

use crate::report::Report;

#[derive(Debug)]
pub struct PlotError(pub String);

impl std::fmt::Display for PlotError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for PlotError {}

fn err<E: std::fmt::Display>(e: E) -> PlotError {
    PlotError(e.to_string())
}

type Series = (String, Vec<(f64, f64)>);

const PALETTE: [RGBColor; 8] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
    RGBColor(227, 119, 194),
    RGBColor(127, 127, 127),
];

fn num(row: &Value, key: &str) -> Option<f64> {
    row.get(key).and_then(Value::as_f64)
}

fn text(row: &Value, key: &str) -> String {
    match row.get(key) {
        Some(Value::String(s)) => s.clone(),
        Some(v) => v.to_string(),
        None => String::new(),
    }
}

/// Groups rows of `table` by `key`, keeping first-seen order.
fn group(report: &Report, table: &str, key: impl Fn(&Value) -> String, x: &str, y: &str, log: bool) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for row in report.table(table) {
        let (Some(xv), Some(yv)) = (num(row, x), num(row, y)) else {
            continue;
        };
        let p = if log {
            if xv <= 0.0 || yv <= 0.0 {
                continue;
            }
            (xv.log10(), yv.log10())
        } else {
            (xv, yv)
        };
        let k = key(row);
        match out.iter_mut().find(|s| s.0 == k) {
            Some(s) => s.1.push(p),
            None => out.push((k, vec![p])),
        }
    }
    out.retain(|s| s.1.len() >= 2);
    out
}

fn with_slopes(series: Vec<Series>) -> Vec<Series> {
    series
        .into_iter()
        .map(|(name, pts)| {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
            let label = match fit_line(&x, &y) {
                Ok(f) => format!("{name} (slope {:.3})", f.slope),
                Err(_) => name,
            };
            (label, pts)
        })
        .collect()
}

fn bounds(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let pts = series.iter().flat_map(|s| s.1.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let pad = |a: f64, b: f64| {
        let d = if b > a { 0.05 * (b - a) } else { 0.5 };
        (a - d, b + d)
    };
    (pad(x0, x1), pad(y0, y1))
}

fn line_chart(path: &Path, title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> Result<(), PlotError> {
    let ((x0, x1), (y0, y1)) = bounds(series);
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(err)?;
    chart
        .configure_mesh()
        .x_desc(xlabel)
        .y_desc(ylabel)
        .draw()
        .map_err(err)?;
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(pts.iter().copied(), color))
            .map_err(err)?
            .label(name.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
        chart
            .draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))
            .map_err(err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(err)?;
    root.present().map_err(err)?;
    Ok(())
}

fn histogram(path: &Path, title: &str, values: &[f64]) -> Result<(), PlotError> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = 12usize;
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0u32; bins];
    for v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let top = *counts.iter().max().unwrap_or(&1);
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(lo..lo + width * bins as f64, 0u32..top + 1)
        .map_err(err)?;
    chart
        .configure_mesh()
        .x_desc("ratio")
        .y_desc("count")
        .draw()
        .map_err(err)?;
    chart
        .draw_series(counts.iter().enumerate().map(|(i, &c)| {
            let x = lo + width * i as f64;
            Rectangle::new([(x, 0), (x + width, c)], PALETTE[0].filled())
        }))
        .map_err(err)?;
    root.present().map_err(err)?;
    Ok(())
}

/// Every plot the report has rows for; an empty list means nothing to draw.
pub fn plot(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, PlotError> {
    fs::create_dir_all(dir).map_err(err)?;
    let mut written = Vec::new();

    let div = group(
        report,
        "divergence",
        |r| text(r, "function"),
        "log_inverse_floor",
        "value",
        false,
    );
    if !div.is_empty() {
        let p = dir.join("divergence.svg");
        line_chart(
            &p,
            "truncated B^{1,1} seminorm",
            "ln(1/floor)",
            "value",
            &with_slopes(div),
        )?;
        written.push(p);
    }

    let key = |r: &Value| format!("{} {}", text(r, "function"), text(r, "kind"));
    let mut trace = group(report, "trace_limit", key, "t", "l1_error", true);
    trace.truncate(PALETTE.len());
    if !trace.is_empty() {
        let p = dir.join("trace_limit.svg");
        line_chart(&p, "trace recovery", "log10 t", "log10 L1 error", &with_slopes(trace))?;
        written.push(p);
    }

    let key = |r: &Value| format!("{} {}", text(r, "construction"), text(r, "bucket"));
    let decay = group(report, "decay", key, "param_l_or_j", "value", true);
    if !decay.is_empty() {
        let p = dir.join("decay.svg");
        line_chart(&p, "lifting decay", "log10 L or j", "log10 value", &with_slopes(decay))?;
        written.push(p);
    }

    let mut cases: Vec<(String, Vec<f64>)> = Vec::new();
    for row in report.table("ratio") {
        if row["variant"] != "base" || row["function_id"] == "reference" {
            continue;
        }
        let Some(r) = num(row, "ratio") else { continue };
        let name = format!("m{}_a{}_p{}", text(row, "m"), text(row, "a"), text(row, "p"));
        match cases.iter_mut().find(|c| c.0 == name) {
            Some(c) => c.1.push(r),
            None => cases.push((name, vec![r])),
        }
    }
    for (name, values) in cases {
        let p = dir.join(format!("ratio_{}.svg", name.replace(['.', '-'], "_")));
        histogram(&p, &format!("ratio across the family, {name}"), &values)?;
        written.push(p);
    }
    if written.is_empty() {
        return Err(PlotError("no plottable rows in the report".into()));
    }
    Ok(written)
}

pub fn has_plottable(report: &Report) -> bool {
    ["divergence", "trace_limit", "decay", "ratio"]
        .iter()
        .any(|t| report.table(t).next().is_some())
}
