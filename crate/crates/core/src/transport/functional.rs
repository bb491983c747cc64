use super::{solve_transport, Sense, TransportPlan};
use crate::error::{Error, Result};
use crate::model::{CheckReport, DiscreteLaw, MeasureOnT};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Vector norm on `R^T` used for transport costs and truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Euclidean,
    Sup,
}

impl Norm {
    pub fn of(&self, x: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Norm::Sup => x.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        }
    }

    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            Norm::Sup => x.iter().zip(y).fold(0.0f64, |a, (u, v)| a.max((u - v).abs())),
        }
    }
}

/// Fernique's functional `F(P, mu) = sup E[X_Z]` over couplings of the law
/// `P` of `X` with the law `mu` of `Z`.
///
/// Solved as a transportation problem with atoms as rows, indices as
/// columns and `cost[k][t] = atoms[k][t]`.
pub fn fernique_functional(law: &DiscreteLaw, mu: &MeasureOnT) -> Result<TransportPlan> {
    law.index().ensure_same(mu.index())?;
    let cost = DMatrix::from_fn(law.num_atoms(), law.dim(), |k, t| law.atoms()[k][t]);
    solve_transport(&cost, law.weights(), mu.probs(), Sense::Maximize)
}

/// `W1` between two discrete laws under `norm`, with the optimal coupling.
pub fn wasserstein1_plan(a: &DiscreteLaw, b: &DiscreteLaw, norm: Norm) -> Result<TransportPlan> {
    a.index().ensure_same(b.index())?;
    let cost = DMatrix::from_fn(a.num_atoms(), b.num_atoms(), |i, j| norm.dist(&a.atoms()[i], &b.atoms()[j]));
    solve_transport(&cost, a.weights(), b.weights(), Sense::Minimize)
}

/// `W1` with the Euclidean norm.
pub fn wasserstein1(a: &DiscreteLaw, b: &DiscreteLaw) -> Result<f64> {
    Ok(wasserstein1_plan(a, b, Norm::Euclidean)?.value.max(0.0))
}

/// Total variation distance `1/2 sum_t |a_t - b_t|`.
pub fn total_variation(a: &MeasureOnT, b: &MeasureOnT) -> Result<f64> {
    a.index().ensure_same(b.index())?;
    Ok(0.5 * a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// Checks `|F(P, mu) - F(P', mu)| <= W1(P, P')`, both sides by LP.
pub fn continuity_gap_w1(a: &DiscreteLaw, b: &DiscreteLaw, mu: &MeasureOnT, norm: Norm) -> Result<CheckReport> {
    let fa = fernique_functional(a, mu)?.value;
    let fb = fernique_functional(b, mu)?.value;
    let w = wasserstein1_plan(a, b, norm)?.value;
    Ok(CheckReport::inequality("continuity_w1", (fa - fb).abs(), w, 1e-9)
        .with_detail("f_a", fa)
        .with_detail("f_b", fb)
        .with_detail("w1", w))
}

/// `E[||X|| 1{||X|| > r}]`.
pub fn tail_moment(law: &DiscreteLaw, r: f64, norm: Norm) -> f64 {
    law.iter()
        .map(|(a, w)| {
            let x = norm.of(a);
            if x > r { w * x } else { 0.0 }
        })
        .sum()
}

/// Right-hand side `r ||mu - mu'||_TV + 2 E[||X|| 1{||X|| > r}]`, where the
/// total variation norm of the signed measure is `sum_t |mu_t - mu'_t|`
/// (twice [`total_variation`]).
fn tv_bound(law: &DiscreteLaw, tv: f64, r: f64, norm: Norm) -> f64 {
    r * 2.0 * tv + 2.0 * tail_moment(law, r, norm)
}

/// Checks `|F(P, mu) - F(P, mu')| <= r ||mu - mu'||_TV + 2 E[||X|| 1{||X|| > r}]`.
pub fn continuity_gap_tv(
    law: &DiscreteLaw,
    mu_a: &MeasureOnT,
    mu_b: &MeasureOnT,
    r: f64,
    norm: Norm,
) -> Result<CheckReport> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("truncation radius must be >= 0, got {r}")));
    }
    let tv = total_variation(mu_a, mu_b)?;
    let fa = fernique_functional(law, mu_a)?.value;
    let fb = fernique_functional(law, mu_b)?.value;
    let rhs = tv_bound(law, tv, r, norm);
    Ok(CheckReport::inequality("continuity_tv", (fa - fb).abs(), rhs, 1e-9)
        .with_detail("tv", tv)
        .with_detail("r", r)
        .with_detail("truncation", 2.0 * tail_moment(law, r, norm)))
}

/// The radius in `grid` giving the smallest right-hand side of the TV
/// bound, with that bound.
pub fn best_truncation_radius(
    law: &DiscreteLaw,
    mu_a: &MeasureOnT,
    mu_b: &MeasureOnT,
    grid: &[f64],
    norm: Norm,
) -> Result<(f64, f64)> {
    let tv = total_variation(mu_a, mu_b)?;
    grid.iter()
        .filter(|r| **r >= 0.0)
        .map(|&r| (r, tv_bound(law, tv, r, norm)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::InvalidInput("radius grid is empty".into()))
}
