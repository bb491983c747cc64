use super::{DiscreteLaw, GaussianSpec, MetricOnT, SampleBatch};
use crate::error::{Error, Result};
use serde::Serialize;
use statrs::function::erf::erfc;
use std::collections::BTreeMap;

/// Outcome of a numerical check.
///
/// `statistic` is the measured quantity and `threshold` the value it must
/// not exceed; `slack = threshold - statistic`. Extra diagnostics go in
/// `details`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    pub statistic: f64,
    pub threshold: f64,
    pub slack: f64,
    pub details: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    /// Report for the inequality `statistic <= threshold + tol`.
    pub fn inequality(name: &str, statistic: f64, threshold: f64, tol: f64) -> Self {
        CheckReport {
            name: name.to_string(),
            pass: statistic <= threshold + tol,
            statistic,
            threshold,
            slack: threshold - statistic,
            details: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// Where increments `X_t - X_s` come from.
#[derive(Debug, Clone, Copy)]
pub enum IncrementSource<'a> {
    /// Exact tails from a finitely supported law.
    Law(&'a DiscreteLaw),
    /// Empirical tails from `m` rows, compared with a `3 sqrt(bound/m)` slack.
    Batch(&'a SampleBatch),
    /// Analytic Gaussian tails.
    Gaussian(&'a GaussianSpec),
}

/// Standard normal upper tail `P[Z > z]`.
pub(crate) fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Checks `P[|X_t - X_s| > x d(t,s)] <= 2 exp(-x^2/2)` for every pair with
/// `d(t,s) > 0` and every `x` in `x_grid`.
///
/// `statistic` is the worst ratio of tail to allowance (bound plus sampling
/// slack), so the check passes when it is at most 1. The worst raw
/// tail/bound ratio is reported as `worst_ratio`.
pub fn subgaussian_increment_check(
    source: IncrementSource<'_>,
    metric: &MetricOnT,
    x_grid: &[f64],
) -> Result<CheckReport> {
    let index = match source {
        IncrementSource::Law(l) => l.index(),
        IncrementSource::Batch(b) => b.index(),
        IncrementSource::Gaussian(g) => g.index(),
    };
    index.ensure_same(metric.index())?;
    if x_grid.is_empty() || x_grid.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidInput("x grid must be nonempty and positive".into()));
    }
    let n = metric.len();
    let sample_count = match source {
        IncrementSource::Batch(b) => Some(b.len() as f64),
        _ => None,
    };

    let mut worst_allowance_ratio = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut worst = (0usize, 0usize, 0.0f64);
    let mut pairs = 0usize;
    for t in 0..n {
        for s in (t + 1)..n {
            let d = metric.dist(t, s);
            if d <= 0.0 {
                continue;
            }
            pairs += 1;
            for &x in x_grid {
                let level = x * d;
                let tail = match source {
                    IncrementSource::Law(l) => l
                        .iter()
                        .filter(|(a, _)| (a[t] - a[s]).abs() > level * (1.0 + 1e-12))
                        .map(|(_, w)| w)
                        .sum::<f64>(),
                    IncrementSource::Batch(b) => {
                        let hits = b.rows().filter(|r| (r[t] - r[s]).abs() > level).count();
                        hits as f64 / b.len() as f64
                    }
                    IncrementSource::Gaussian(g) => {
                        let c = g.cov();
                        let mu = g.mean()[t] - g.mean()[s];
                        let var = (c[(t, t)] + c[(s, s)] - 2.0 * c[(t, s)]).max(0.0);
                        if var == 0.0 {
                            if mu.abs() > level { 1.0 } else { 0.0 }
                        } else {
                            let sd = var.sqrt();
                            normal_sf((level - mu) / sd) + normal_sf((level + mu) / sd)
                        }
                    }
                };
                let bound = 2.0 * (-x * x / 2.0).exp();
                let allowance = bound + sample_count.map_or(0.0, |m| 3.0 * (bound / m).sqrt());
                let ratio = tail / bound;
                let allowance_ratio = tail / allowance;
                worst_ratio = worst_ratio.max(ratio);
                if allowance_ratio > worst_allowance_ratio {
                    worst_allowance_ratio = allowance_ratio;
                    worst = (t, s, x);
                }
            }
        }
    }
    let mut report = CheckReport::inequality("subgaussian_increments", worst_allowance_ratio, 1.0, 1e-12)
        .with_detail("worst_ratio", worst_ratio)
        .with_detail("pairs_checked", pairs as f64);
    if pairs > 0 {
        report = report
            .with_detail("worst_t", worst.0 as f64)
            .with_detail("worst_s", worst.1 as f64)
            .with_detail("worst_x", worst.2);
    }
    Ok(report)
}

/// Passes iff every coordinate of `E[X]` is within `tol` of zero.
pub fn centeredness_check(law: &DiscreteLaw, tol: f64) -> CheckReport {
    let dev = law.mean().iter().fold(0.0f64, |a, m| a.max(m.abs()));
    CheckReport::inequality("centered", dev, tol, 0.0).with_detail("max_deviation", dev)
}
