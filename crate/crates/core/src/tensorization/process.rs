use super::sequences::SequenceClass;
use crate::error::{Error, Result};
use crate::model::{
    metric_from_covariance, CheckReport, GaussianSpec, MetricOnT, ProcessSampler, ProcessSource,
};
use crate::rng::stream_rng;
use crate::stats::{Estimate, Moments};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

/// Largest class for which a sequence-indexed matrix is materialized.
pub const COV_CAP: usize = 5_000;

/// Replicates per RNG stream.
const REPLICATES_PER_STREAM: usize = 1024;

/// `d_N(s, r) = (1/M) sqrt(sum_i d(s_i, r_i)^2)` on the sequence class.
pub fn tensor_metric(metric: &MetricOnT, class: &SequenceClass) -> Result<MetricOnT> {
    metric.index().ensure_same(class.base().index())?;
    let size = class.size();
    if size > COV_CAP {
        return Err(Error::ClassTooLarge { size: size as u128, cap: COV_CAP as u128 });
    }
    let m = class.len_per_sequence() as f64;
    let seqs = class.sequences();
    let mut dist = DMatrix::zeros(size, size);
    for a in 0..size {
        for b in (a + 1)..size {
            let ss: f64 = seqs[a].iter().zip(&seqs[b]).map(|(&t, &s)| metric.dist(t, s).powi(2)).sum();
            let d = ss.sqrt() / m;
            dist[(a, b)] = d;
            dist[(b, a)] = d;
        }
    }
    Ok(MetricOnT::from_parts_unchecked(class.index_set(), dist))
}

/// The averaged Gaussian process on a sequence class, with covariance
/// `Cov(G_s, G_r) = (1/M^2) sum_i cov(s_i, r_i)`.
#[derive(Debug, Clone)]
pub struct TensorGaussian {
    source: GaussianSpec,
    class: SequenceClass,
    cov: DMatrix<f64>,
}

fn sequence_cov(spec_cov: &DMatrix<f64>, s: &[usize], r: &[usize]) -> f64 {
    let m = s.len() as f64;
    s.iter().zip(r).map(|(&a, &b)| spec_cov[(a, b)]).sum::<f64>() / (m * m)
}

pub fn tensor_gaussian_cov(spec: &GaussianSpec, class: &SequenceClass) -> Result<TensorGaussian> {
    spec.index().ensure_same(class.base().index())?;
    if !spec.is_centered() {
        return Err(Error::PreconditionFailed("tensorized Gaussian needs a centered spec".into()));
    }
    let size = class.size();
    if size > COV_CAP {
        return Err(Error::ClassTooLarge { size: size as u128, cap: COV_CAP as u128 });
    }
    let seqs = class.sequences();
    let mut cov = DMatrix::zeros(size, size);
    for a in 0..size {
        for b in a..size {
            let v = sequence_cov(spec.cov(), &seqs[a], &seqs[b]);
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    Ok(TensorGaussian { source: spec.clone(), class: class.clone(), cov })
}

impl TensorGaussian {
    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn class(&self) -> &SequenceClass {
        &self.class
    }

    pub fn source(&self) -> &GaussianSpec {
        &self.source
    }

    /// Natural metric computed from the sequence covariance.
    pub fn natural_metric(&self) -> Result<MetricOnT> {
        let dist = metric_from_covariance(&self.cov)?;
        Ok(MetricOnT::from_parts_unchecked(self.class.index_set(), dist))
    }

    /// The process as a [`GaussianSpec`] indexed by sequences (validates PSD).
    pub fn to_spec(&self) -> Result<GaussianSpec> {
        GaussianSpec::centered(self.class.index_set(), self.cov.clone())
    }
}

/// Runs `replicates` draws of the averaged process, calling `visit` with
/// the values `X_s` for every sequence. Streams of replicates are processed
/// in parallel and combined in stream order.
fn for_each_replicate<A, F, G>(
    source: &ProcessSource,
    class: &SequenceClass,
    replicates: usize,
    seed: u64,
    init: G,
    visit: F,
) -> Vec<A>
where
    A: Send,
    G: Fn() -> A + Sync,
    F: Fn(&mut A, &[f64]) + Sync,
{
    let sampler = ProcessSampler::new(source);
    let n = source.dim();
    let m = class.len_per_sequence();
    let flat: Vec<u32> = class.sequences().iter().flatten().map(|&t| t as u32).collect();
    let size = class.size();
    let streams = replicates.div_ceil(REPLICATES_PER_STREAM);
    (0..streams)
        .into_par_iter()
        .map(|stream| {
            let mut rng = stream_rng(seed, stream as u64);
            let count = REPLICATES_PER_STREAM.min(replicates - stream * REPLICATES_PER_STREAM);
            let mut copies = vec![0.0; m * n];
            let mut values = vec![0.0; size];
            let mut acc = init();
            for _ in 0..count {
                for copy in copies.chunks_exact_mut(n) {
                    sampler.draw(&mut rng, copy);
                }
                for (s, v) in values.iter_mut().enumerate() {
                    let seq = &flat[s * m..(s + 1) * m];
                    let total: f64 = seq.iter().enumerate().map(|(i, &t)| copies[i * n + t as usize]).sum();
                    *v = total / m as f64;
                }
                visit(&mut acc, &values);
            }
            acc
        })
        .collect()
}

/// Monte Carlo estimate of `E[sup_s X_s]` over the class, from `samples`
/// independent replicates (each using `M` fresh copies of the base process).
pub fn mc_sup_tensorized(source: &ProcessSource, class: &SequenceClass, samples: usize, seed: u64) -> Result<Estimate> {
    source.index().ensure_same(class.base().index())?;
    if samples < 100 {
        return Err(Error::InsufficientSamples { got: samples, min: 100 });
    }
    let parts = for_each_replicate(source, class, samples, seed, Moments::default, |acc, values| {
        let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        acc.push(sup);
    });
    let mut total = Moments::default();
    parts.iter().for_each(|p| total.merge(p));
    Ok(Estimate::from_moments(&total))
}

/// Checks that the covariance of the averaged Gaussian is invariant under
/// `trials` random permutations of sequence positions, and that the action
/// is transitive on the class.
pub fn stationarity_check(tensor: &TensorGaussian, trials: usize, seed: u64) -> Result<CheckReport> {
    let class = tensor.class();
    if class.size() < 2 {
        return Err(Error::InvalidInput("stationarity check needs at least two sequences".into()));
    }
    let positions = class.positions();
    let seqs = class.sequences();
    let m = class.len_per_sequence();
    let size = class.size();
    let mut rng = stream_rng(seed, 0);
    let mut worst = 0.0f64;
    let mut perm: Vec<usize> = (0..m).collect();
    let mut image = vec![0usize; size];
    for _ in 0..trials {
        perm.shuffle(&mut rng);
        let permuted: Vec<Vec<usize>> = seqs.iter().map(|s| perm.iter().map(|&p| s[p]).collect()).collect();
        for (a, p) in permuted.iter().enumerate() {
            image[a] = *positions
                .get(p.as_slice())
                .ok_or_else(|| Error::InvalidInput("permutation left the class".into()))?;
        }
        for a in 0..size {
            for b in a..size {
                let orig = tensor.cov[(a, b)];
                let looked_up = tensor.cov[(image[a], image[b])];
                let recomputed = sequence_cov(tensor.source.cov(), &permuted[a], &permuted[b]);
                worst = worst.max((looked_up - orig).abs()).max((recomputed - orig).abs());
            }
        }
    }

    // transitivity: a permutation carrying the first sequence to each other one
    let first = &seqs[0];
    let mut transitive = true;
    for target in seqs {
        let mut used = vec![false; m];
        let mut sigma = Vec::with_capacity(m);
        for &t in target {
            match (0..m).find(|&j| !used[j] && first[j] == t) {
                Some(j) => {
                    used[j] = true;
                    sigma.push(j);
                }
                None => break,
            }
        }
        let mapped: Vec<usize> = sigma.iter().map(|&j| first[j]).collect();
        transitive &= mapped == *target;
    }

    let mut report = CheckReport::inequality("tensor_stationarity", worst, 1e-12, 0.0)
        .with_detail("trials", trials as f64)
        .with_detail("class_size", size as f64)
        .with_detail("transitive", if transitive { 1.0 } else { 0.0 });
    report.pass &= transitive;
    Ok(report)
}

/// Tail check for the averaged process at constant `c`, plus the smallest
/// constant in `c_grid` at which every pair passes.
#[derive(Debug, Clone, Serialize)]
pub struct TensorSubgaussianReport {
    pub report: CheckReport,
    pub smallest_passing_c: Option<f64>,
}

/// Monte Carlo check of `P[|X_s - X_r| > c x d_N(s, r)] <= 2 exp(-x^2 / 2)`
/// over all pairs of the class, with the `3 sqrt(bound / samples)` slack.
#[allow(clippy::too_many_arguments)]
pub fn tensor_subgaussian_check(
    source: &ProcessSource,
    class: &SequenceClass,
    metric: &MetricOnT,
    c: f64,
    c_grid: &[f64],
    x_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<TensorSubgaussianReport> {
    source.index().ensure_same(class.base().index())?;
    if !(c > 0.0) {
        return Err(Error::NonpositiveC(c));
    }
    if x_grid.is_empty() || x_grid.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidInput("x grid must be nonempty and positive".into()));
    }
    if samples < 100 {
        return Err(Error::InsufficientSamples { got: samples, min: 100 });
    }
    let dn = tensor_metric(metric, class)?;
    let size = class.size();
    let pairs: Vec<(usize, usize, f64)> = (0..size)
        .flat_map(|a| ((a + 1)..size).map(move |b| (a, b)))
        .map(|(a, b)| (a, b, dn.dist(a, b)))
        .filter(|p| p.2 > 0.0)
        .collect();
    let mut constants: Vec<f64> = c_grid.iter().copied().filter(|v| *v > 0.0).collect();
    constants.push(c);
    constants.sort_by(f64::total_cmp);
    constants.dedup();
    let (nx, nc) = (x_grid.len(), constants.len());
    let cells = pairs.len() * nx * nc;

    let parts = for_each_replicate(source, class, samples, seed, || vec![0u64; cells], |hits, values| {
        for (p, &(a, b, d)) in pairs.iter().enumerate() {
            let r = (values[a] - values[b]).abs() / d;
            for (xi, x) in x_grid.iter().enumerate() {
                let base = (p * nx + xi) * nc;
                for (ci, cc) in constants.iter().enumerate() {
                    if r > cc * x {
                        hits[base + ci] += 1;
                    } else {
                        // constants are sorted ascending
                        break;
                    }
                }
            }
        }
    });
    let mut hits = vec![0u64; cells];
    for part in &parts {
        for (h, v) in hits.iter_mut().zip(part) {
            *h += v;
        }
    }

    let m = samples as f64;
    let worst_for = |ci: usize| -> f64 {
        let mut worst = 0.0f64;
        for p in 0..pairs.len() {
            for (xi, x) in x_grid.iter().enumerate() {
                let bound = 2.0 * (-x * x / 2.0).exp();
                let allowance = bound + 3.0 * (bound / m).sqrt();
                let tail = hits[(p * nx + xi) * nc + ci] as f64 / m;
                worst = worst.max(tail / allowance);
            }
        }
        worst
    };
    let at_c = constants.iter().position(|v| *v == c).expect("c is in the list");
    let report = CheckReport::inequality("tensor_subgaussian", worst_for(at_c), 1.0, 1e-12)
        .with_detail("c", c)
        .with_detail("pairs", pairs.len() as f64);
    let smallest_passing_c = constants
        .iter()
        .enumerate()
        .filter(|(_, v)| c_grid.contains(v))
        .find(|(ci, _)| worst_for(*ci) <= 1.0)
        .map(|(_, v)| *v);
    Ok(TensorSubgaussianReport { report, smallest_passing_c })
}
