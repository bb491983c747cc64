//! Exact transportation linear programs.
//!
//! [`solve_transport`] is the workhorse; Fernique's functional, `W1` and the
//! continuity bounds are thin layers over it. [`strassen_feasibility`]
//! decides whether a discrete law is a scaled conditional expectation of a
//! discretized Gaussian, using a dense phase-1 simplex.

mod functional;
mod lp;
mod simplex;
mod strassen;

pub use functional::{
    best_truncation_radius, continuity_gap_tv, continuity_gap_w1, fernique_functional, tail_moment,
    total_variation, wasserstein1, wasserstein1_plan, Norm,
};
pub use simplex::PivotRule;
pub use strassen::{
    coupling_violation, minimal_feasible_c, mix_with_product, strassen_feasibility, FeasibilityResult,
    DEFAULT_FEASIBILITY_TOL,
};

use crate::error::{Error, Result};
use crate::model::{matrix_rows, STRUCT_TOL};
use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

/// Tolerance on marginal constraints of a returned plan.
pub const MARGINAL_TOL: f64 = 1e-10;
/// Tolerance on dual feasibility, complementary slackness and the value.
pub const CERTIFICATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

/// An optimal coupling with its dual certificate.
///
/// For `Maximize`, `dual_row[i] + dual_col[j] >= cost[i][j]` everywhere with
/// equality on the support of `plan`; for `Minimize` the inequality is
/// reversed.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub plan: DMatrix<f64>,
    pub value: f64,
    pub dual_row: Vec<f64>,
    pub dual_col: Vec<f64>,
    pub sense: Sense,
    pub pivots: usize,
}

impl Serialize for TransportPlan {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TransportPlan", 5)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("plan", &matrix_rows(&self.plan))?;
        st.serialize_field("dual_row", &self.dual_row)?;
        st.serialize_field("dual_col", &self.dual_col)?;
        st.serialize_field("sense", &self.sense)?;
        st.end()
    }
}

impl TransportPlan {
    /// Re-checks marginals, dual feasibility, complementary slackness and
    /// strong duality against the problem data.
    pub fn certify(&self, cost: &DMatrix<f64>, row: &[f64], col: &[f64]) -> Result<()> {
        let (k, l) = (row.len(), col.len());
        if self.plan.shape() != (k, l) || cost.shape() != (k, l) {
            return Err(Error::Lp("plan has the wrong shape".into()));
        }
        let scale = cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        let tol = CERTIFICATE_TOL * scale;
        for i in 0..k {
            let s: f64 = self.plan.row(i).sum();
            if (s - row[i]).abs() > MARGINAL_TOL {
                return Err(Error::Lp(format!("row {i} sums to {s}, expected {}", row[i])));
            }
        }
        for j in 0..l {
            let s: f64 = self.plan.column(j).sum();
            if (s - col[j]).abs() > MARGINAL_TOL {
                return Err(Error::Lp(format!("column {j} sums to {s}, expected {}", col[j])));
            }
        }
        let sign = match self.sense {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        };
        for i in 0..k {
            for j in 0..l {
                let p = self.plan[(i, j)];
                if p < 0.0 {
                    return Err(Error::Lp(format!("negative mass at ({i},{j})")));
                }
                // sign * (u + v - c) >= 0, and = 0 where p > 0
                let excess = sign * (self.dual_row[i] + self.dual_col[j] - cost[(i, j)]);
                if excess < -tol {
                    return Err(Error::Lp(format!("dual infeasible at ({i},{j}) by {excess:e}")));
                }
                if p > 1e-12 && excess > tol {
                    return Err(Error::Lp(format!("complementary slackness fails at ({i},{j})")));
                }
            }
        }
        let primal: f64 = self.plan.iter().zip(cost.iter()).map(|(p, c)| p * c).sum();
        let dual: f64 = self.dual_row.iter().zip(row).map(|(u, a)| u * a).sum::<f64>()
            + self.dual_col.iter().zip(col).map(|(v, b)| v * b).sum::<f64>();
        if (primal - self.value).abs() > tol || (dual - self.value).abs() > tol {
            return Err(Error::Lp(format!("value {} vs primal {primal} / dual {dual}", self.value)));
        }
        Ok(())
    }
}

fn validate_marginal(m: &[f64], what: &str) -> Result<f64> {
    if m.is_empty() {
        return Err(Error::Degenerate(format!("{what} marginal is empty")));
    }
    if m.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidInput(format!("{what} marginal has a negative or non-finite entry")));
    }
    Ok(m.iter().sum())
}

/// Optimal coupling of two discrete marginals for `cost`.
///
/// Returns a basic optimal solution together with its dual certificate; the
/// certificate is verified before returning.
pub fn solve_transport(cost: &DMatrix<f64>, row: &[f64], col: &[f64], sense: Sense) -> Result<TransportPlan> {
    solve_transport_with(cost, row, col, sense, PivotRule::default())
}

pub fn solve_transport_with(
    cost: &DMatrix<f64>,
    row: &[f64],
    col: &[f64],
    sense: Sense,
    rule: PivotRule,
) -> Result<TransportPlan> {
    let ra = validate_marginal(row, "row")?;
    let cb = validate_marginal(col, "column")?;
    if cost.shape() != (row.len(), col.len()) {
        return Err(Error::InvalidInput(format!(
            "cost is {}x{} but marginals have lengths {} and {}",
            cost.nrows(),
            cost.ncols(),
            row.len(),
            col.len()
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("cost has non-finite entries".into()));
    }
    if (ra - cb).abs() > STRUCT_TOL {
        return Err(Error::MarginalMismatch { row: ra, col: cb });
    }
    // exact balance for the basis construction
    let demand: Vec<f64> = col.iter().map(|b| b * ra / cb).collect();
    let min_cost = match sense {
        Sense::Minimize => cost.clone(),
        Sense::Maximize => -cost,
    };
    let sol = simplex::solve_min(&min_cost, row, &demand, rule)?;
    let (dual_row, dual_col) = match sense {
        Sense::Minimize => (sol.u, sol.v),
        Sense::Maximize => (sol.u.iter().map(|x| -x).collect(), sol.v.iter().map(|x| -x).collect()),
    };
    let value = sol.flow.iter().zip(cost.iter()).map(|(p, c)| p * c).sum();
    let plan = TransportPlan { plan: sol.flow, value, dual_row, dual_col, sense, pivots: sol.pivots };
    plan.certify(cost, row, col)?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let p = solve_transport(&DMatrix::zeros(1, 1), &[1.0], &[1.0], Sense::Minimize).unwrap();
        assert_eq!(p.value, 0.0);
        assert_eq!(p.plan[(0, 0)], 1.0);
    }

    #[test]
    fn identity_favouring_two_by_two() {
        let c = DMatrix::identity(2, 2);
        let p = solve_transport(&c, &[0.5, 0.5], &[0.5, 0.5], Sense::Maximize).unwrap();
        assert!((p.value - 1.0).abs() < 1e-12);
        assert!((p.plan[(0, 0)] - 0.5).abs() < 1e-12 && (p.plan[(1, 1)] - 0.5).abs() < 1e-12);
        assert!(p.plan[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = DMatrix::zeros(2, 2);
        assert!(matches!(
            solve_transport(&c, &[0.5, 0.5], &[0.5, 0.6], Sense::Minimize),
            Err(Error::MarginalMismatch { .. })
        ));
        assert!(matches!(
            solve_transport(&DMatrix::zeros(0, 2), &[], &[0.5, 0.5], Sense::Minimize),
            Err(Error::Degenerate(_))
        ));
        let mut nan = DMatrix::zeros(1, 1);
        nan[(0, 0)] = f64::NAN;
        assert!(solve_transport(&nan, &[1.0], &[1.0], Sense::Minimize).is_err());
    }

    #[test]
    fn certificate_detects_tampering() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 0.0]);
        let mut p = solve_transport(&c, &[0.5, 0.5], &[0.5, 0.5], Sense::Minimize).unwrap();
        assert!((p.value - 0.5).abs() < 1e-12);
        p.dual_row[0] += 1.0;
        assert!(p.certify(&c, &[0.5, 0.5], &[0.5, 0.5]).is_err());
    }
}
