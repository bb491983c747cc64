use super::{DiscreteLaw, GaussianSpec, ProcessSource, SampleBatch};
#[cfg(test)]
use super::IndexSet;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::collections::HashMap;

/// Rows per RNG stream when sampling in parallel.
const ROWS_PER_STREAM: usize = 4096;

/// Draws single realizations of a [`ProcessSource`].
#[derive(Debug, Clone)]
pub enum ProcessSampler {
    Law { atoms: Vec<Vec<f64>>, cumulative: Vec<f64> },
    Gaussian { mean: Vec<f64>, factor: DMatrix<f64>, scratch_len: usize },
}

impl ProcessSampler {
    pub fn new(source: &ProcessSource) -> Self {
        match source {
            ProcessSource::Law(l) => Self::for_law(l),
            ProcessSource::Gaussian(g) => Self::for_gaussian(g),
        }
    }

    pub fn for_law(law: &DiscreteLaw) -> Self {
        let mut acc = 0.0;
        let cumulative = law
            .weights()
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        ProcessSampler::Law { atoms: law.atoms().to_vec(), cumulative }
    }

    pub fn for_gaussian(spec: &GaussianSpec) -> Self {
        ProcessSampler::Gaussian {
            mean: spec.mean().to_vec(),
            factor: spec.sqrt_factor(),
            scratch_len: spec.dim(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ProcessSampler::Law { atoms, .. } => atoms[0].len(),
            ProcessSampler::Gaussian { mean, .. } => mean.len(),
        }
    }

    /// Writes one realization into `out` (length `dim()`).
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            ProcessSampler::Law { atoms, cumulative } => {
                let total = *cumulative.last().expect("nonempty law");
                let u: f64 = rng.random::<f64>() * total;
                let k = cumulative.partition_point(|c| *c <= u).min(atoms.len() - 1);
                out.copy_from_slice(&atoms[k]);
            }
            ProcessSampler::Gaussian { mean, factor, scratch_len } => {
                let n = *scratch_len;
                let mut z = [0.0f64; 32];
                let mut zvec;
                let z: &mut [f64] = if n <= 32 {
                    &mut z[..n]
                } else {
                    zvec = vec![0.0; n];
                    &mut zvec
                };
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = mean[i];
                    for (j, zj) in z.iter().enumerate() {
                        acc += factor[(i, j)] * zj;
                    }
                    *o = acc;
                }
            }
        }
    }
}

/// `m` i.i.d. draws from `N(mean, cov)` using the symmetric square root of
/// `cov`. Bitwise deterministic in `(spec, m, seed)` and independent of the
/// thread count.
pub fn sample_gaussian(spec: &GaussianSpec, m: usize, seed: u64) -> Result<SampleBatch> {
    sample_source(&ProcessSource::Gaussian(spec.clone()), m, seed)
}

/// `m` i.i.d. draws from either kind of base process.
pub fn sample_source(source: &ProcessSource, m: usize, seed: u64) -> Result<SampleBatch> {
    if m == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let sampler = ProcessSampler::new(source);
    let n = source.dim();
    let mut data = vec![0.0; m * n];
    data.par_chunks_mut(ROWS_PER_STREAM * n).enumerate().for_each(|(block, chunk)| {
        let mut rng = stream_rng(seed, block as u64);
        for row in chunk.chunks_exact_mut(n) {
            sampler.draw(&mut rng, row);
        }
    });
    Ok(SampleBatch::from_flat(source.index().clone(), data, Some(seed)))
}

/// The empirical law `(1/m) sum_i delta_{X_i}`. Rows that agree bit for bit
/// are merged; atoms appear in order of first occurrence.
pub fn empirical_law(batch: &SampleBatch) -> Result<DiscreteLaw> {
    let mut slot: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut atoms: Vec<Vec<f64>> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for row in batch.rows() {
        let key: Vec<u64> = row.iter().map(|x| x.to_bits()).collect();
        match slot.get(&key) {
            Some(&k) => counts[k] += 1,
            None => {
                slot.insert(key, atoms.len());
                atoms.push(row.to_vec());
                counts.push(1);
            }
        }
    }
    let m = batch.len() as f64;
    let weights = counts.iter().map(|&c| c as f64 / m).collect();
    DiscreteLaw::new(batch.index().clone(), atoms, weights)
}
