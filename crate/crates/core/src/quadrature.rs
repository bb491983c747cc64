//! Symmetric discretizations of the standard Gaussian.
//!
//! Nodes are equally spaced on `[-clip, clip]` (odd count, so `0` is a
//! node) with weights proportional to the density, renormalized to sum to
//! one. The node set is exactly symmetric, so the discrete law is centered.

use crate::error::{Error, Result};
use crate::model::{DiscreteLaw, IndexSet};

pub const DEFAULT_CLIP: f64 = 6.0;

/// One-dimensional nodes and weights.
pub fn symmetric_nodes(points: usize, clip: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if points == 0 || points.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("grid size must be odd, got {points}")));
    }
    if !(clip > 0.0) {
        return Err(Error::InvalidInput("clip radius must be positive".into()));
    }
    if points == 1 {
        return Ok((vec![0.0], vec![1.0]));
    }
    let half = points / 2;
    let h = clip / half as f64;
    let mut nodes = vec![0.0; points];
    for k in 1..=half {
        let x = k as f64 * h;
        nodes[half + k] = x;
        nodes[half - k] = -x;
    }
    let raw: Vec<f64> = nodes.iter().map(|x| (-x * x / 2.0).exp()).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    Ok((nodes, weights))
}

/// Tensor-product grid for `N(0, I_n)` as a discrete law on `index`.
pub fn gaussian_grid(index: IndexSet, points_per_axis: usize, clip: f64) -> Result<DiscreteLaw> {
    let n = index.len();
    let (nodes, weights) = symmetric_nodes(points_per_axis, clip)?;
    let total = (points_per_axis as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > 2_000_000 {
        return Err(Error::InvalidInput(format!("grid with {total} points is too large")));
    }
    let total = total as usize;
    let mut atoms = Vec::with_capacity(total);
    let mut probs = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        atoms.push(digits.iter().map(|&d| nodes[d]).collect::<Vec<f64>>());
        probs.push(digits.iter().map(|&d| weights[d]).product::<f64>());
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < points_per_axis {
                break;
            }
            *d = 0;
        }
    }
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= s);
    DiscreteLaw::new(index, atoms, probs)
}

/// Largest odd `p <= max_per_axis` with `p^n <= budget` (at least 1).
pub fn points_for_budget(n: usize, budget: usize, max_per_axis: usize) -> usize {
    let mut p = max_per_axis | 1;
    while p > 1 && (p as f64).powi(n as i32) > budget as f64 {
        p -= 2;
    }
    p.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_centered_with_unit_variance() {
        let (x, w) = symmetric_nodes(41, DEFAULT_CLIP).unwrap();
        let mean: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
        let var: f64 = x.iter().zip(&w).map(|(a, b)| a * a * b).sum();
        assert!(mean.abs() < 1e-16);
        assert!((var - 1.0).abs() < 1e-6, "{var}");
        assert!(symmetric_nodes(4, 6.0).is_err());
    }

    #[test]
    fn fine_grid_integrates_abs() {
        let (x, w) = symmetric_nodes(4001, DEFAULT_CLIP).unwrap();
        let m: f64 = x.iter().zip(&w).map(|(a, b)| a.abs() * b).sum();
        assert!((m - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-6, "{m}");
    }

    #[test]
    fn tensor_grid_shape() {
        let g = gaussian_grid(IndexSet::numbered(2).unwrap(), 5, 3.0).unwrap();
        assert_eq!(g.num_atoms(), 25);
        assert!(g.mean().iter().all(|m| m.abs() < 1e-15));
        assert_eq!(points_for_budget(2, 2500, 101), 49);
        assert_eq!(points_for_budget(1, 2500, 101), 101);
    }
}
