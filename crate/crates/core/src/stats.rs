//! Mean / standard-error bookkeeping for Monte Carlo estimates.

use serde::Serialize;

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

/// A Monte Carlo estimate with a 99% normal-theory confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_moments(m: &Moments) -> Self {
        let stderr = if m.count > 1 {
            (m.m2 / (m.count - 1) as f64 / m.count as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean: m.mean,
            stderr,
            ci_lo: m.mean - Z99 * stderr,
            ci_hi: m.mean + Z99 * stderr,
            samples: m.count,
        }
    }

    /// Exact value with zero uncertainty.
    pub fn exact(value: f64) -> Self {
        Estimate { mean: value, stderr: 0.0, ci_lo: value, ci_hi: value, samples: 0 }
    }
}

/// Running first and second central moments (Welford / Chan merge).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        }
    }
}
