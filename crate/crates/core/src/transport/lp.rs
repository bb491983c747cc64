//! Dense phase-1 simplex: minimize `||b - A x||_1` over `x >= 0`.
//!
//! Each equality row gets a pair of artificial variables `p_r, q_r >= 0`
//! with `A_r x + p_r - q_r = b_r`; the objective is `sum (p + q)`. Entering
//! and leaving variables follow Bland's rule.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;

pub(crate) struct PhaseOne {
    pub x: Vec<f64>,
    /// Minimized total violation `sum_r |b_r - A_r x|`.
    pub violation: f64,
}

/// `rows[r]` is the dense row `A_r` of length `nvars`.
pub(crate) fn min_violation(rows: &[Vec<f64>], b: &[f64], nvars: usize, stop_below: f64) -> Result<PhaseOne> {
    let m = rows.len();
    let width = nvars + 2 * m + 1;
    let rhs_col = width - 1;
    let mut tab = vec![0.0; m * width];
    let mut basis: Vec<usize> = (0..m).map(|r| nvars + r).collect();
    for r in 0..m {
        let flip = if b[r] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut tab[r * width..(r + 1) * width];
        for (j, a) in rows[r].iter().enumerate() {
            row[j] = flip * a;
        }
        row[nvars + r] = 1.0;
        row[nvars + m + r] = -1.0;
        row[rhs_col] = flip * b[r];
    }
    // reduced costs for the basis {p_r}
    let mut z = vec![0.0; width];
    for j in 0..width {
        let col_sum: f64 = (0..m).map(|r| tab[r * width + j]).sum();
        let c = if j >= nvars && j < rhs_col { 1.0 } else { 0.0 };
        z[j] = c - col_sum;
    }
    // z[rhs_col] holds -objective
    let max_pivots = 50_000 + 20 * width;
    for _ in 0..max_pivots {
        let objective = -z[rhs_col];
        if objective <= stop_below {
            break;
        }
        let Some(enter) = (0..rhs_col).find(|&j| z[j] < -PIVOT_TOL) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let a = tab[r * width + enter];
            if a > PIVOT_TOL {
                let ratio = tab[r * width + rhs_col] / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-14 || (ratio <= lratio + 1e-14 && basis[r] < basis[lr]) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
        }
        let Some((pr, _)) = leave else {
            return Err(Error::Lp("phase-1 objective unbounded below".into()));
        };
        let piv = tab[pr * width + enter];
        for j in 0..width {
            tab[pr * width + j] /= piv;
        }
        let pivot_row: Vec<f64> = tab[pr * width..(pr + 1) * width].to_vec();
        for r in 0..m {
            if r == pr {
                continue;
            }
            let f = tab[r * width + enter];
            if f != 0.0 {
                let row = &mut tab[r * width..(r + 1) * width];
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
            }
        }
        let f = z[enter];
        for (x, p) in z.iter_mut().zip(&pivot_row) {
            *x -= f * p;
        }
        basis[pr] = enter;
    }
    let mut x = vec![0.0; nvars];
    for (r, &bv) in basis.iter().enumerate() {
        if bv < nvars {
            x[bv] = tab[r * width + rhs_col].max(0.0);
        }
    }
    let violation = rows
        .iter()
        .zip(b)
        .map(|(row, br)| (br - row.iter().zip(&x).map(|(a, xi)| a * xi).sum::<f64>()).abs())
        .sum();
    Ok(PhaseOne { x, violation })
}
