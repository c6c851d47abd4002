//! Flat-file reports: the results CSV (fixed column order, fit footer as
//! comment rows, exact round-trip) and a self-contained log–log SVG plot.

use std::fmt::Write as _;

use anyhow::{bail, Result};

use crate::experiment::RunResult;
use crate::fit::{Axis, RateFit};

pub const CSV_HEADER: &str = "family,variant,m,eps,seed,queries,floor_violations";

pub fn emit_results_csv(results: &[RunResult], fits: &[RateFit]) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in results {
        let q = match r.queries {
            Some(q) => q.to_string(),
            None => "budget_exhausted".to_string(),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.family, r.variant, r.m, r.eps, r.seed, q, r.floor_violations
        );
    }
    for f in fits {
        let _ = writeln!(
            s,
            "# fit axis={} slope={} intercept={} r_squared={}",
            f.axis.name(),
            f.slope,
            f.intercept,
            f.r_squared
        );
    }
    s
}

pub fn parse_results_csv(text: &str) -> Result<(Vec<RunResult>, Vec<RateFit>)> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => bail!("bad results header: {other:?}"),
    }
    let mut results = Vec::new();
    let mut fits = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# fit ") {
            let mut slope = f64::NAN;
            let mut intercept = f64::NAN;
            let mut r2 = f64::NAN;
            let mut axis = Axis::InvEps;
            for tok in rest.split_whitespace() {
                let (k, v) = tok
                    .split_once('=')
                    .ok_or_else(|| anyhow::anyhow!("bad fit token {tok}"))?;
                match k {
                    "axis" => {
                        axis = Axis::parse(v)
                            .ok_or_else(|| anyhow::anyhow!("bad fit axis {v}"))?
                    }
                    "slope" => slope = v.parse()?,
                    "intercept" => intercept = v.parse()?,
                    "r_squared" => r2 = v.parse()?,
                    _ => bail!("unknown fit field {k}"),
                }
            }
            fits.push(RateFit {
                slope,
                intercept,
                r_squared: r2,
                axis,
            });
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            bail!("bad results row: {line}");
        }
        results.push(RunResult {
            family: cols[0].to_string(),
            variant: cols[1].to_string(),
            m: cols[2].parse()?,
            eps: cols[3].parse()?,
            seed: cols[4].parse()?,
            queries: if cols[5] == "budget_exhausted" {
                None
            } else {
                Some(cols[5].parse()?)
            },
            floor_violations: cols[6].parse()?,
        });
    }
    Ok((results, fits))
}

/// Per-trace CSV rows: (query_index, component, cumulative_queries,
/// suboptimality, seed), one row per recorded trace point.
pub fn emit_trace_csv(trace: &proxsum::solvers::RunTrace, seed: u64) -> String {
    let mut s = String::from("query_index,component,cumulative_queries,suboptimality,seed\n");
    for (i, p) in trace.points.iter().enumerate() {
        let sub = p
            .suboptimality
            .map(|v| v.to_string())
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "{},{},{},{},{}", i, "-", p.queries, sub, seed);
    }
    s
}

/// Self-contained log–log scatter plot with an optional fitted line and
/// slope annotation. Byte-stable for identical inputs.
pub fn emit_svg(points: &[(f64, f64)], fit: Option<&RateFit>, title: &str) -> String {
    let (w, h, ml, mb) = (640.0, 480.0, 70.0, 50.0);
    let finite: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if finite.is_empty() {
        x0 = 0.0;
        x1 = 1.0;
        y0 = 0.0;
        y1 = 1.0;
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - 20.0);
    let py = |y: f64| (h - mb) - (y - y0) / (y1 - y0) * (h - mb - 30.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"20\" font-family=\"monospace\" font-size=\"14\">{title}</text>",
        ml
    );
    // axes
    let _ = writeln!(
        s,
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        h - mb,
        w - 20.0,
        h - mb
    );
    let _ = writeln!(
        s,
        "<line x1=\"{ml}\" y1=\"30\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>",
        h - mb
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">log10(x)</text>",
        w - 90.0,
        h - 15.0
    );
    let _ = writeln!(
        s,
        "<text x=\"8\" y=\"28\" font-family=\"monospace\" font-size=\"12\">log10(queries)</text>"
    );
    for &(x, y) in &finite {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"steelblue\"/>",
            px(x),
            py(y)
        );
    }
    if let Some(f) = fit {
        // the fit is in natural logs: log10 y = slope·log10 x + intercept/ln(10)
        let b10 = f.intercept / std::f64::consts::LN_10;
        let ya = f.slope * x0 + b10;
        let yb = f.slope * x1 + b10;
        let _ = writeln!(
            s,
            "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"crimson\" stroke-width=\"1.5\"/>",
            px(x0),
            py(ya),
            px(x1),
            py(yb)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"44\" font-family=\"monospace\" font-size=\"12\" fill=\"crimson\">slope = {:.4} (R² = {:.4}, axis {})</text>",
            ml,
            f.slope,
            f.r_squared,
            f.axis.name()
        );
    }
    s.push_str("</svg>\n");
    s
}
