//! Martingale-coupling feasibility: is there a coupling `pi` of the law of
//! `X` and a discretized standard Gaussian `G` with `X = c E[G | X]`?
//!
//! Constraints on `pi(x, g) >= 0`:
//! rows sum to `p(x)`, columns sum to `q(g)`, and
//! `sum_g pi(x, g) g_t = x_t p(x) / c` for every atom `x` and coordinate `t`.

use super::lp::min_violation;
use crate::error::{Error, Result};
use crate::model::DiscreteLaw;
use nalgebra::DMatrix;
use serde::Serialize;

pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityResult {
    pub feasible: bool,
    /// Total constraint violation (L1 over all equality residuals) of the
    /// best coupling found; zero for an exact coupling.
    pub gap: f64,
    pub c: f64,
    #[serde(skip)]
    pub tol: f64,
    /// The coupling, rows indexed by atoms of `X`, columns by grid points.
    #[serde(skip)]
    pub witness: Option<DMatrix<f64>>,
}

fn check_inputs(law_x: &DiscreteLaw, grid: &DiscreteLaw, c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::NonpositiveC(c));
    }
    law_x.index().ensure_same(grid.index())
}

/// Total (L1) violation of all equality constraints plus negative mass.
pub fn coupling_violation(law_x: &DiscreteLaw, grid: &DiscreteLaw, c: f64, pi: &DMatrix<f64>) -> f64 {
    let (kx, kg, n) = (law_x.num_atoms(), grid.num_atoms(), law_x.dim());
    let mut total = pi.iter().filter(|v| **v < 0.0).map(|v| -v).sum::<f64>();
    for x in 0..kx {
        total += (pi.row(x).sum() - law_x.weights()[x]).abs();
        for t in 0..n {
            let bary: f64 = (0..kg).map(|g| pi[(x, g)] * grid.atoms()[g][t]).sum();
            total += (bary - law_x.atoms()[x][t] * law_x.weights()[x] / c).abs();
        }
    }
    for g in 0..kg {
        total += (pi.column(g).sum() - grid.weights()[g]).abs();
    }
    total
}

/// Decides feasibility by minimizing the total constraint violation with a
/// phase-1 simplex. Feasible iff the minimum is at most `tol`.
pub fn strassen_feasibility(law_x: &DiscreteLaw, grid: &DiscreteLaw, c: f64, tol: f64) -> Result<FeasibilityResult> {
    check_inputs(law_x, grid, c)?;
    let (kx, kg, n) = (law_x.num_atoms(), grid.num_atoms(), law_x.dim());
    let nvars = kx * kg;
    let var = |x: usize, g: usize| x * kg + g;
    let mut rows = Vec::with_capacity(kx + kg + kx * n);
    let mut b = Vec::with_capacity(rows.capacity());
    for x in 0..kx {
        let mut r = vec![0.0; nvars];
        (0..kg).for_each(|g| r[var(x, g)] = 1.0);
        rows.push(r);
        b.push(law_x.weights()[x]);
    }
    for g in 0..kg {
        let mut r = vec![0.0; nvars];
        (0..kx).for_each(|x| r[var(x, g)] = 1.0);
        rows.push(r);
        b.push(grid.weights()[g]);
    }
    for x in 0..kx {
        for t in 0..n {
            let mut r = vec![0.0; nvars];
            (0..kg).for_each(|g| r[var(x, g)] = grid.atoms()[g][t]);
            rows.push(r);
            b.push(law_x.atoms()[x][t] * law_x.weights()[x] / c);
        }
    }
    let sol = min_violation(&rows, &b, nvars, tol * 1e-3)?;
    let pi = DMatrix::from_fn(kx, kg, |x, g| sol.x[var(x, g)]);
    // re-measured on the extracted coupling, which also counts rounding
    let gap = coupling_violation(law_x, grid, c, &pi).max(sol.violation);
    let feasible = gap <= tol;
    Ok(FeasibilityResult { feasible, gap, c, tol, witness: feasible.then_some(pi) })
}

/// Given a feasible coupling at `c`, builds the coupling at `c_new >= c`
/// that mixes it with the product coupling using weight `c / c_new`, and
/// measures its violation directly.
pub fn mix_with_product(
    law_x: &DiscreteLaw,
    grid: &DiscreteLaw,
    at_c: &FeasibilityResult,
    c_new: f64,
) -> Result<FeasibilityResult> {
    check_inputs(law_x, grid, c_new)?;
    let pi = at_c
        .witness
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("mixing needs a feasible witness".into()))?;
    if c_new < at_c.c {
        return Err(Error::InvalidInput(format!("c_new = {c_new} is below c = {}", at_c.c)));
    }
    let lambda = at_c.c / c_new;
    let mixed = DMatrix::from_fn(pi.nrows(), pi.ncols(), |x, g| {
        lambda * pi[(x, g)] + (1.0 - lambda) * law_x.weights()[x] * grid.weights()[g]
    });
    let gap = coupling_violation(law_x, grid, c_new, &mixed);
    let feasible = gap <= at_c.tol;
    Ok(FeasibilityResult { feasible, gap, c: c_new, tol: at_c.tol, witness: feasible.then_some(mixed) })
}

/// Bisection for the smallest feasible `c` in `[lo, hi]`; `hi` must be
/// feasible. Returns the feasible end of the final bracket.
pub fn minimal_feasible_c(
    law_x: &DiscreteLaw,
    grid: &DiscreteLaw,
    lo: f64,
    hi: f64,
    tol: f64,
    iterations: usize,
) -> Result<FeasibilityResult> {
    if !(lo > 0.0) || hi < lo {
        return Err(Error::InvalidInput(format!("bad bisection bracket [{lo}, {hi}]")));
    }
    let mut best = strassen_feasibility(law_x, grid, hi, tol)?;
    if !best.feasible {
        return Err(Error::PreconditionFailed(format!("not feasible at upper end c = {hi}")));
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..iterations {
        let mid = 0.5 * (a + b);
        let r = strassen_feasibility(law_x, grid, mid, tol)?;
        if r.feasible {
            b = mid;
            best = r;
        } else {
            a = mid;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IndexSet;
    use crate::quadrature::{gaussian_grid, DEFAULT_CLIP};

    fn grid1(points: usize) -> DiscreteLaw {
        gaussian_grid(IndexSet::numbered(1).unwrap(), points, DEFAULT_CLIP).unwrap()
    }

    #[test]
    fn origin_is_always_feasible() {
        let g = grid1(41);
        let zero = DiscreteLaw::point_mass(IndexSet::numbered(1).unwrap(), vec![0.0]).unwrap();
        for c in [0.1, 1.0, 7.5] {
            let r = strassen_feasibility(&zero, &g, c, DEFAULT_FEASIBILITY_TOL).unwrap();
            assert!(r.feasible && r.gap <= 1e-6, "{r:?}");
        }
    }

    #[test]
    fn barycenter_outside_hull_is_infeasible() {
        let g = grid1(41);
        let far = DiscreteLaw::uniform(IndexSet::numbered(1).unwrap(), vec![vec![10.0], vec![-10.0]]).unwrap();
        let r = strassen_feasibility(&far, &g, 1.0, DEFAULT_FEASIBILITY_TOL).unwrap();
        assert!(!r.feasible && r.gap > 0.0);
        assert!(r.witness.is_none());
    }

    #[test]
    fn nonpositive_c() {
        let g = grid1(5);
        let zero = DiscreteLaw::point_mass(IndexSet::numbered(1).unwrap(), vec![0.0]).unwrap();
        assert!(matches!(strassen_feasibility(&zero, &g, 0.0, 1e-6), Err(Error::NonpositiveC(_))));
    }

    #[test]
    fn rademacher_threshold_is_near_sqrt_half_pi() {
        let g = grid1(41);
        let rad = DiscreteLaw::uniform(IndexSet::numbered(1).unwrap(), vec![vec![1.0], vec![-1.0]]).unwrap();
        let best = minimal_feasible_c(&rad, &g, 0.5, 4.0, DEFAULT_FEASIBILITY_TOL, 30).unwrap();
        // on the grid the threshold is 1 / E[G; G > 0] / 2, which tends to
        // sqrt(pi / 2) as the spacing shrinks
        let pos: f64 = g.iter().filter(|(a, _)| a[0] > 0.0).map(|(a, w)| a[0] * w).sum();
        let grid_target = 0.5 / pos;
        assert!((best.c - grid_target).abs() < 1e-5, "{} vs {grid_target}", best.c);
        assert!((grid_target - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1.5e-2);
        let doubled = mix_with_product(&rad, &g, &best, 2.0 * best.c).unwrap();
        assert!(doubled.feasible, "{doubled:?}");
        assert!(strassen_feasibility(&rad, &g, 2.0 * best.c, DEFAULT_FEASIBILITY_TOL).unwrap().feasible);
    }
}
