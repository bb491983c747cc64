use super::process::mc_sup_tensorized;
use super::sequences::{class_size, enumerate_sequence_class, RationalMeasure};
use crate::error::{Error, Result};
use crate::model::{DiscreteLaw, GaussianSpec, MeasureOnT, ProcessSource};
use crate::numfmt::fmt_f64;
use crate::quadrature::{gaussian_grid, points_for_budget, DEFAULT_CLIP};
use crate::rng::derive_seed;
use crate::stats::Estimate;
use crate::transport::fernique_functional;
use serde::Serialize;

/// Grid budget for the Gaussian reference value.
const GRID_BUDGET: usize = 2_500;
const GRID_MAX_PER_AXIS: usize = 101;

/// Image of a quadrature grid under `mean + S g` with `S` the covariance square root.
fn gaussian_law_on_grid(spec: &GaussianSpec) -> Result<DiscreteLaw> {
    let n = spec.dim();
    let p = points_for_budget(n, GRID_BUDGET, GRID_MAX_PER_AXIS);
    if p < 3 {
        return Err(Error::InvalidInput(format!("dimension {n} too large for a Gaussian grid")));
    }
    let grid = gaussian_grid(spec.index().clone(), p, DEFAULT_CLIP)?;
    let s = spec.sqrt_factor();
    let atoms = grid
        .atoms()
        .iter()
        .map(|g| {
            let v = &s * nalgebra::DVector::from_column_slice(g);
            v.iter().zip(spec.mean()).map(|(a, m)| a + m).collect()
        })
        .collect();
    DiscreteLaw::new(spec.index().clone(), atoms, grid.weights().to_vec())
}

/// `F(P, mu)` for the source: exact LP for a discrete law, LP on the
/// transformed quadrature grid for a Gaussian. Returns the value and a
/// method tag.
pub fn reference_functional(source: &ProcessSource, mu: &MeasureOnT) -> Result<(f64, &'static str)> {
    match source {
        ProcessSource::Law(law) => Ok((fernique_functional(law, mu)?.value, "lp")),
        ProcessSource::Gaussian(spec) => {
            let law = gaussian_law_on_grid(spec)?;
            Ok((fernique_functional(&law, mu)?.value, "lp_on_grid"))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub n: usize,
    pub class_size: u128,
    pub estimate: Estimate,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyTable {
    pub reference_f: f64,
    pub reference_method: String,
    pub rows: Vec<StudyRow>,
    /// Whether the point estimates are nondecreasing in `N` up to their
    /// combined 99% interval half-widths.
    pub nondecreasing: bool,
}

impl StudyTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,class_size,estimate,stderr,ci_lo,ci_hi,exact_F,gap\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.n,
                r.class_size,
                fmt_f64(r.estimate.mean),
                fmt_f64(r.estimate.stderr),
                fmt_f64(r.estimate.ci_lo),
                fmt_f64(r.estimate.ci_hi),
                fmt_f64(self.reference_f),
                fmt_f64(r.gap)
            ));
        }
        out
    }
}

/// Estimates `E[sup_s X_s]` over the sequence classes of `mu` for each
/// `N` in `ns` and compares with `F(P, mu)`. Every `N` uses its own stream
/// of the seed.
pub fn convergence_study(
    source: &ProcessSource,
    mu: &MeasureOnT,
    k: u64,
    ns: &[usize],
    samples: usize,
    seed: u64,
    cap: u128,
) -> Result<StudyTable> {
    source.index().ensure_same(mu.index())?;
    if ns.is_empty() {
        return Err(Error::InvalidInput("no values of N given".into()));
    }
    let rational = RationalMeasure::from_measure(mu, k)?;
    let (reference_f, method) = reference_functional(source, mu)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let size = class_size(&rational, n);
        if size > cap {
            return Err(Error::ClassTooLarge { size, cap });
        }
        let class = enumerate_sequence_class(&rational, n, cap)?;
        let estimate = mc_sup_tensorized(source, &class, samples, derive_seed(seed, n as u64))?;
        rows.push(StudyRow { n, class_size: size, gap: reference_f - estimate.mean, estimate });
    }
    let nondecreasing = rows.windows(2).all(|w| {
        let slack = (w[0].estimate.ci_hi - w[0].estimate.mean) + (w[1].estimate.ci_hi - w[1].estimate.mean);
        w[1].estimate.mean >= w[0].estimate.mean - slack
    });
    Ok(StudyTable { reference_f, reference_method: method.to_string(), rows, nondecreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IndexSet;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_reference_is_close_to_closed_form() {
        // two iid N(0,1), uniform mu: the optimal coupling is antithetic, F = E|G| / sqrt(2)
        let g = GaussianSpec::standard(2).unwrap();
        let mu = MeasureOnT::uniform(IndexSet::numbered(2).unwrap());
        let (f, method) = reference_functional(&ProcessSource::Gaussian(g), &mu).unwrap();
        assert_eq!(method, "lp_on_grid");
        assert!((f - 1.0 / PI.sqrt()).abs() < 2e-3, "{f}");
    }

    #[test]
    fn study_rows_and_csv() {
        let g = GaussianSpec::standard(2).unwrap();
        let mu = MeasureOnT::uniform(IndexSet::numbered(2).unwrap());
        let t = convergence_study(&ProcessSource::Gaussian(g), &mu, 2, &[1, 2], 4000, 11, 1000).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0].class_size, 2);
        assert_eq!(t.rows[1].class_size, 6);
        let first = (1.0 / (2.0 * PI)).sqrt();
        assert!((t.rows[0].estimate.mean - first).abs() < 4.0 * t.rows[0].estimate.stderr);
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("N,class_size,"));
    }

    #[test]
    fn cap_is_enforced() {
        let g = GaussianSpec::standard(2).unwrap();
        let mu = MeasureOnT::uniform(IndexSet::numbered(2).unwrap());
        let r = convergence_study(&ProcessSource::Gaussian(g), &mu, 2, &[10], 200, 1, 100);
        assert!(matches!(r, Err(Error::ClassTooLarge { .. })));
    }
}
