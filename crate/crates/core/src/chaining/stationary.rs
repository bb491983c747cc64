use super::covering::{CoverMethod, EXACT_MAX_N};
use super::entropy::{entropy_integral, EntropyIntegral};
use crate::error::{Error, Result};
use crate::model::{
    sample_source, subgaussian_increment_check, CheckReport, GaussianSpec, IncrementSource, ProcessSource,
};
use crate::rng::derive_seed;
use crate::stats::{Estimate, Moments};
use serde::Serialize;

const INVARIANCE_TOL: f64 = 1e-12;

/// Acceptance band for the ratios `entropy / E[sup]`.
pub const SANDWICH_BAND: (f64, f64) = (1.0 / 64.0, 64.0);

/// A group acting on `T = {0, ..., n-1}`, given by generating permutations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupAction {
    n: usize,
    generators: Vec<Vec<usize>>,
    verified_transitive: bool,
}

impl GroupAction {
    /// Each generator maps `t` to `generator[t]` and must be a bijection.
    pub fn new(n: usize, generators: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("group action on an empty set".into()));
        }
        for (g, perm) in generators.iter().enumerate() {
            let mut seen = vec![false; n];
            if perm.len() != n || !perm.iter().all(|&t| t < n && !std::mem::replace(&mut seen[t], true)) {
                return Err(Error::InvalidInput(format!("generator {g} is not a permutation of {n} points")));
            }
        }
        let mut action = GroupAction { n, generators, verified_transitive: false };
        action.verified_transitive = action.orbit(0).len() == n;
        Ok(action)
    }

    /// Cyclic shift `t -> t + 1 mod n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(n, vec![(0..n).map(|t| (t + 1) % n).collect()])
    }

    /// The full symmetric group, generated by a transposition and an `n`-cycle.
    pub fn symmetric(n: usize) -> Result<Self> {
        let mut gens = vec![(0..n).map(|t| (t + 1) % n).collect::<Vec<_>>()];
        if n > 2 {
            let mut swap: Vec<usize> = (0..n).collect();
            swap.swap(0, 1);
            gens.push(swap);
        }
        Self::new(n, gens)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }

    pub fn verified_transitive(&self) -> bool {
        self.verified_transitive
    }

    /// Orbit of `t`, sorted.
    pub fn orbit(&self, t: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![t];
        seen[t] = true;
        while let Some(s) = stack.pop() {
            for g in &self.generators {
                if !seen[g[s]] {
                    seen[g[s]] = true;
                    stack.push(g[s]);
                }
            }
        }
        (0..self.n).filter(|&s| seen[s]).collect()
    }
}

/// Checks transitivity and `Sigma[g(t), g(s)] = Sigma[t, s]`,
/// `mean[g(t)] = mean[t]` for every generator `g`.
pub fn verify_stationary(spec: &GaussianSpec, action: &GroupAction) -> Result<CheckReport> {
    let n = spec.dim();
    if action.len() != n {
        return Err(Error::InvalidInput(format!("action on {} points, process on {n}", action.len())));
    }
    let orbit = action.orbit(0).len();
    if orbit != n {
        return Err(Error::NotTransitive { orbit, n });
    }
    let cov = spec.cov();
    let mut worst = 0.0f64;
    for (gi, g) in action.generators().iter().enumerate() {
        for t in 0..n {
            let dm = (spec.mean()[g[t]] - spec.mean()[t]).abs();
            if dm > INVARIANCE_TOL {
                return Err(Error::NotInvariant { generator: gi, row: t, col: t });
            }
            for s in 0..n {
                let dc = (cov[(g[t], g[s])] - cov[(t, s)]).abs();
                if dc > INVARIANCE_TOL {
                    return Err(Error::NotInvariant { generator: gi, row: t, col: s });
                }
                worst = worst.max(dc);
            }
        }
    }
    Ok(CheckReport::inequality("stationarity", worst, INVARIANCE_TOL, 0.0)
        .with_detail("generators", action.generators().len() as f64)
        .with_detail("orbit", orbit as f64))
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub entropy: EntropyIntegral,
    pub sup_x: Estimate,
    pub sup_g: Estimate,
    /// `entropy / E[sup X]`; `None` when the denominator is zero.
    pub ratio_x: Option<f64>,
    pub ratio_g: Option<f64>,
    pub band: (f64, f64),
    pub pass: bool,
    pub stationarity: CheckReport,
    pub domination: CheckReport,
}

fn expected_sup(source: &ProcessSource, samples: usize, seed: u64) -> Result<Estimate> {
    match source {
        ProcessSource::Law(law) => Ok(Estimate::exact(
            law.iter().map(|(a, w)| w * a.iter().copied().fold(f64::NEG_INFINITY, f64::max)).sum(),
        )),
        ProcessSource::Gaussian(_) => {
            if samples < 100 {
                return Err(Error::InsufficientSamples { got: samples, min: 100 });
            }
            let batch = sample_source(source, samples, seed)?;
            let mut m = Moments::default();
            for row in batch.rows() {
                m.push(row.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            }
            Ok(Estimate::from_moments(&m))
        }
    }
}

fn x_grid() -> Vec<f64> {
    (1..=16).map(|i| 0.25 * i as f64).collect()
}

/// Compares `E[sup X]` and `E[sup G]` with the entropy integral of the
/// natural metric of the stationary Gaussian `spec`. Passes when both
/// ratios lie in [`SANDWICH_BAND`], or when all three quantities vanish.
pub fn fernique_sandwich_check(
    law_x: &ProcessSource,
    spec: &GaussianSpec,
    action: &GroupAction,
    samples: usize,
    seed: u64,
) -> Result<SandwichReport> {
    law_x.index().ensure_same(spec.index())?;
    let stationarity = verify_stationary(spec, action)?;
    let metric = spec.natural_metric()?;
    let source = match law_x {
        ProcessSource::Law(l) => IncrementSource::Law(l),
        ProcessSource::Gaussian(g) => IncrementSource::Gaussian(g),
    };
    let domination = subgaussian_increment_check(source, &metric, &x_grid())?;
    if !domination.pass {
        return Err(Error::PreconditionFailed(format!(
            "process is not dominated by the natural metric (worst tail ratio {})",
            domination.statistic
        )));
    }
    let method = if metric.len() <= EXACT_MAX_N { CoverMethod::Exact } else { CoverMethod::Greedy };
    let entropy = entropy_integral(&metric, method)?;
    let sup_x = expected_sup(law_x, samples, derive_seed(seed, 0))?;
    let sup_g = expected_sup(&ProcessSource::Gaussian(spec.clone()), samples, derive_seed(seed, 1))?;

    let ratio = |den: f64| (den > 0.0).then(|| entropy.exact / den);
    let (ratio_x, ratio_g) = (ratio(sup_x.mean), ratio(sup_g.mean));
    let in_band = |r: Option<f64>| r.is_some_and(|r| SANDWICH_BAND.0 <= r && r <= SANDWICH_BAND.1);
    let all_zero = entropy.exact == 0.0 && sup_x.mean.abs() <= 1e-12 && sup_g.mean.abs() <= 1e-12;
    let pass = all_zero || (in_band(ratio_x) && in_band(ratio_g));
    Ok(SandwichReport { entropy, sup_x, sup_g, ratio_x, ratio_g, band: SANDWICH_BAND, pass, stationarity, domination })
}
