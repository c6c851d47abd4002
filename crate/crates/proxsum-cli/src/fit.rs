//! Rate-exponent fits: least squares on log–log pairs, with medians taken
//! across seeds at each grid value.

use anyhow::{bail, Result};

use crate::experiment::RunResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    InvEps,
    M,
    /// κ sweeps store the condition number in the eps column.
    Kappa,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::InvEps => "inv_eps",
            Axis::M => "m",
            Axis::Kappa => "kappa",
        }
    }
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "inv_eps" => Axis::InvEps,
            "m" => Axis::M,
            "kappa" => Axis::Kappa,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub axis: Axis,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least squares of log(median queries) against log(axis value).
pub fn fit_rate(results: &[RunResult], axis: Axis) -> Result<RateFit> {
    let mut groups: std::collections::BTreeMap<u64, (f64, Vec<f64>)> =
        std::collections::BTreeMap::new();
    for r in results {
        let x = match axis {
            Axis::InvEps => 1.0 / r.eps,
            Axis::M => r.m as f64,
            Axis::Kappa => r.eps,
        };
        if let Some(q) = r.queries {
            groups
                .entry(x.to_bits())
                .or_insert((x, Vec::new()))
                .1
                .push(q as f64);
        }
    }
    let pts: Vec<(f64, f64)> = groups
        .into_values()
        .map(|(x, qs)| (x.ln(), median(qs).ln()))
        .collect();
    if pts.len() < 3 {
        bail!(
            "rate fit needs at least 3 grid points with finite queries, got {}",
            pts.len()
        );
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        bail!("degenerate axis values");
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        axis,
    })
}

/// Least-squares linear fit of (x, ln y); returns (slope, intercept, R²).
/// Used for semilog convergence checks.
pub fn semilog_fit(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 3 {
        bail!("semilog fit needs at least 3 points");
    }
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, y)| *y > 0.0)
        .map(|&(x, y)| (x, y.ln()))
        .collect();
    if pts.len() < 3 {
        bail!("semilog fit needs at least 3 positive points");
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((slope, intercept, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(qf: impl Fn(f64) -> f64, grid: &[f64], seeds: usize) -> Vec<RunResult> {
        let mut out = Vec::new();
        for &eps in grid {
            for s in 0..seeds {
                out.push(RunResult {
                    family: "synthetic".into(),
                    variant: "-".into(),
                    m: 4,
                    eps,
                    seed: s as u64,
                    queries: Some(qf(eps).round() as u64),
                    floor_violations: 0,
                });
            }
        }
        out
    }

    #[test]
    fn exact_power_laws_are_recovered() {
        let grid = [0.1, 0.05, 0.02, 0.01];
        let fit = fit_rate(&synthetic(|e| 1000.0 / e, &grid, 1), Axis::InvEps).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-9, "slope {}", fit.slope);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);

        // query counts are integers, so the √ε law is recovered up to
        // rounding noise
        let fit = fit_rate(&synthetic(|e| 1000.0 / e.sqrt(), &grid, 1), Axis::InvEps).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-4, "slope {}", fit.slope);
    }

    #[test]
    fn noisy_power_law_slope_within_band() {
        use rand::Rng;
        let grid = [0.1, 0.05, 0.02, 0.01, 0.005];
        let mut rng = proxsum::rng::rng(77);
        for _ in 0..20 {
            let noise: Vec<f64> = (0..grid.len() * 3)
                .map(|_| 1.0 + rng.gen_range(-0.05..0.05))
                .collect();
            let mut idx = 0;
            let mut results = Vec::new();
            for &eps in &grid {
                for s in 0..3 {
                    results.push(RunResult {
                        family: "synthetic".into(),
                        variant: "-".into(),
                        m: 4,
                        eps,
                        seed: s,
                        queries: Some((1000.0 / eps * noise[idx]).round() as u64),
                        floor_violations: 0,
                    });
                    idx += 1;
                }
            }
            let fit = fit_rate(&results, Axis::InvEps).unwrap();
            assert!((fit.slope - 1.0).abs() <= 0.03, "slope {}", fit.slope);
        }
    }

    #[test]
    fn insufficient_points_is_an_error() {
        let grid = [0.1, 0.05];
        assert!(fit_rate(&synthetic(|e| 10.0 / e, &grid, 1), Axis::InvEps).is_err());
    }
}
