//! Independent oracles shared by integration tests.

#![allow(dead_code)]

use rand::Rng;

/// Maximum of `sum cost[i][j] x[i][j]` over the transportation polytope with
/// margins `row`, `col`, by enumerating every basic solution: each choice of
/// `k + l - 1` cells whose margin system is nonsingular and has a
/// nonnegative solution.
pub fn vertex_enumeration_max(cost: &[Vec<f64>], row: &[f64], col: &[f64]) -> f64 {
    let (k, l) = (row.len(), col.len());
    let cells: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..l).map(move |j| (i, j))).collect();
    let size = k + l - 1;
    let mut best = f64::NEG_INFINITY;
    let mut chosen = Vec::with_capacity(size);
    subsets(cells.len(), size, 0, &mut chosen, &mut |subset| {
        if let Some(x) = solve_margins(&cells, subset, row, col) {
            if x.iter().all(|v| *v >= -1e-12) {
                let value: f64 = subset.iter().zip(&x).map(|(&c, v)| cost[cells[c].0][cells[c].1] * v).sum();
                best = best.max(value);
            }
        }
    });
    best
}

fn subsets(n: usize, size: usize, start: usize, chosen: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if chosen.len() == size {
        visit(chosen);
        return;
    }
    for c in start..n {
        if n - c < size - chosen.len() {
            break;
        }
        chosen.push(c);
        subsets(n, size, c + 1, chosen, visit);
        chosen.pop();
    }
}

/// Solves row sums and all but the last column sum restricted to `subset`.
fn solve_margins(cells: &[(usize, usize)], subset: &[usize], row: &[f64], col: &[f64]) -> Option<Vec<f64>> {
    let (k, l) = (row.len(), col.len());
    let m = subset.len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for (v, &c) in subset.iter().enumerate() {
        let (i, j) = cells[c];
        a[i][v] = 1.0;
        if j + 1 < l {
            a[k + j][v] = 1.0;
        }
    }
    for i in 0..k {
        a[i][m] = row[i];
    }
    for j in 0..l - 1 {
        a[k + j][m] = col[j];
    }
    for p in 0..m {
        let piv = (p..m).max_by(|&r, &s| a[r][p].abs().total_cmp(&a[s][p].abs()))?;
        if a[piv][p].abs() < 1e-12 {
            return None;
        }
        a.swap(p, piv);
        for r in 0..m {
            if r != p {
                let f = a[r][p] / a[p][p];
                if f != 0.0 {
                    for c in p..=m {
                        a[r][c] -= f * a[p][c];
                    }
                }
            }
        }
    }
    Some((0..m).map(|v| a[v][m] / a[v][v]).collect())
}

/// Probability vector with `n` entries, some of them possibly zero.
pub fn random_probs<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < 0.15 { 0.0 } else { rng.random::<f64>() }).collect();
    if p.iter().all(|v| *v == 0.0) {
        p[rng.random_range(0..n)] = 1.0;
    }
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
    p
}

pub fn random_atoms<R: Rng>(rng: &mut R, k: usize, n: usize) -> Vec<Vec<f64>> {
    (0..k).map(|_| (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()).collect()
}
