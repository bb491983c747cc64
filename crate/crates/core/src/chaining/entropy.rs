use super::covering::{covering_number, CoverMethod};
use crate::error::Result;
use crate::model::MetricOnT;
use serde::Serialize;

/// `int_0^inf sqrt(log N(T, d, eps)) d eps`, bracketed on the dyadic
/// ladder `eps_j = diam 2^-j` and also computed exactly from the step
/// function `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyIntegral {
    /// `sum_j (eps_j - eps_{j+1}) sqrt(log N(eps_{j+1}))` plus the tail.
    pub upper: f64,
    /// Same with `N(eps_j)`.
    pub lower: f64,
    /// Integral of the step function over all its breakpoints.
    pub exact: f64,
    pub scales: Vec<f64>,
    pub numbers: Vec<usize>,
    pub method: CoverMethod,
}

fn root_log(count: usize) -> f64 {
    (count as f64).ln().sqrt()
}

/// The dyadic ladder stops at the first `eps_J` with `N(eps_J) = n` or with
/// `eps_J` below the smallest positive distance; below it `N` is constant
/// and the tail `eps_J sqrt(log N(eps_J))` is added to both sums.
pub fn entropy_integral(metric: &MetricOnT, method: CoverMethod) -> Result<EntropyIntegral> {
    let n = metric.len();
    let diam = metric.diameter();
    let Some(min_pos) = metric.min_positive().filter(|_| n > 1 && diam > 0.0) else {
        return Ok(EntropyIntegral { upper: 0.0, lower: 0.0, exact: 0.0, scales: vec![], numbers: vec![], method });
    };

    let mut scales = vec![diam];
    let mut numbers = vec![covering_number(metric, diam, method)?];
    loop {
        let eps = *scales.last().unwrap();
        let count = *numbers.last().unwrap();
        if count == n || eps < min_pos {
            break;
        }
        let next = eps / 2.0;
        scales.push(next);
        numbers.push(covering_number(metric, next, method)?);
    }
    let last = scales.len() - 1;
    let tail = scales[last] * root_log(numbers[last]);
    let mut upper = tail;
    let mut lower = tail;
    for j in 0..last {
        let width = scales[j] - scales[j + 1];
        upper += width * root_log(numbers[j + 1]);
        lower += width * root_log(numbers[j]);
    }

    // N is a right-continuous step function with jumps only at distances
    let mut breaks: Vec<f64> = metric.matrix().iter().copied().filter(|d| *d > 0.0).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut exact = breaks[0] * root_log(covering_number(metric, breaks[0] / 2.0, method)?);
    for w in breaks.windows(2) {
        exact += (w[1] - w[0]) * root_log(covering_number(metric, w[0], method)?);
    }
    Ok(EntropyIntegral { upper, lower, exact, scales, numbers, method })
}
