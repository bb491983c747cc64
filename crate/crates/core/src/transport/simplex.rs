//! Transportation simplex on a `k x l` cost matrix (minimization).
//!
//! The start basis is the north-west corner rule applied to Orden's
//! perturbed marginals (`a_i + eps` for every row, `kε` added to the last
//! column). Under this perturbation every basis visited is nondegenerate,
//! so pivots strictly improve the perturbed objective and the method
//! terminates. Flows are carried as `value + coeff * eps` and compared
//! lexicographically; the real parts form the returned plan.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::cmp::Ordering;
use std::collections::VecDeque;

const LEX_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy)]
struct Lex {
    v: f64,
    e: i64,
}

impl Lex {
    fn cmp(&self, o: &Lex) -> Ordering {
        let d = self.v - o.v;
        if d > LEX_TOL {
            Ordering::Greater
        } else if d < -LEX_TOL {
            Ordering::Less
        } else {
            self.e.cmp(&o.e)
        }
    }

    fn add(self, o: Lex) -> Lex {
        Lex { v: self.v + o.v, e: self.e + o.e }
    }

    fn sub(self, o: Lex) -> Lex {
        Lex { v: self.v - o.v, e: self.e - o.e }
    }
}

/// Entering-variable rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// First improving cell in row-major order.
    Bland,
    /// Most negative reduced cost, lowest index on ties.
    #[default]
    Dantzig,
}

pub(crate) struct SimplexSolution {
    pub flow: DMatrix<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub pivots: usize,
}

struct Basis {
    k: usize,
    l: usize,
    cells: Vec<(usize, usize)>,
    flow: Vec<Lex>,
}

impl Basis {
    fn north_west(supply: &[f64], demand: &[f64]) -> Basis {
        let (k, l) = (supply.len(), demand.len());
        let s = |i: usize| Lex { v: supply[i], e: 1 };
        let d = |j: usize| Lex { v: demand[j], e: if j == l - 1 { k as i64 } else { 0 } };
        let mut cells = Vec::with_capacity(k + l - 1);
        let mut flow = Vec::with_capacity(k + l - 1);
        let (mut i, mut j) = (0, 0);
        let (mut rs, mut rd) = (s(0), d(0));
        loop {
            if i == k - 1 && j == l - 1 {
                cells.push((i, j));
                flow.push(rs);
                break;
            }
            let take_row = j == l - 1 || (i < k - 1 && rs.cmp(&rd) != Ordering::Greater);
            if take_row {
                cells.push((i, j));
                flow.push(rs);
                rd = rd.sub(rs);
                i += 1;
                rs = s(i);
            } else {
                cells.push((i, j));
                flow.push(rd);
                rs = rs.sub(rd);
                j += 1;
                rd = d(j);
            }
        }
        Basis { k, l, cells, flow }
    }

    /// Adjacency over nodes `0..k` (rows) and `k..k+l` (columns); each
    /// entry is `(neighbour, basis slot)`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.k + self.l];
        for (slot, &(i, j)) in self.cells.iter().enumerate() {
            adj[i].push((self.k + j, slot));
            adj[self.k + j].push((i, slot));
        }
        adj
    }

    fn duals(&self, cost: &DMatrix<f64>, adj: &[Vec<(usize, usize)>]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (k, l) = (self.k, self.l);
        let mut pot = vec![f64::NAN; k + l];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        let mut seen = 1;
        while let Some(a) = queue.pop_front() {
            for &(b, slot) in &adj[a] {
                if pot[b].is_nan() {
                    let (i, j) = self.cells[slot];
                    pot[b] = cost[(i, j)] - pot[a];
                    seen += 1;
                    queue.push_back(b);
                }
            }
        }
        if seen != k + l {
            return Err(Error::Lp("basis is not a spanning tree".into()));
        }
        Ok((pot[..k].to_vec(), pot[k..].to_vec()))
    }

    /// Basis slots on the tree path from row `i` to column `j`, in order.
    fn path(&self, adj: &[Vec<(usize, usize)>], i: usize, j: usize) -> Vec<usize> {
        let target = self.k + j;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.k + self.l];
        let mut visited = vec![false; self.k + self.l];
        visited[i] = true;
        let mut queue = VecDeque::from([i]);
        while let Some(a) = queue.pop_front() {
            if a == target {
                break;
            }
            for &(b, slot) in &adj[a] {
                if !visited[b] {
                    visited[b] = true;
                    parent[b] = Some((a, slot));
                    queue.push_back(b);
                }
            }
        }
        let mut slots = Vec::new();
        let mut node = target;
        while let Some((prev, slot)) = parent[node] {
            slots.push(slot);
            node = prev;
        }
        slots.reverse();
        slots
    }
}

pub(crate) fn solve_min(
    cost: &DMatrix<f64>,
    supply: &[f64],
    demand: &[f64],
    rule: PivotRule,
) -> Result<SimplexSolution> {
    let (k, l) = (supply.len(), demand.len());
    let mut basis = Basis::north_west(supply, demand);
    let scale = cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
    let rc_tol = 1e-12 * scale;
    let max_pivots = 200_000 + 50 * k * l;
    let mut in_basis = vec![false; k * l];
    for &(i, j) in &basis.cells {
        in_basis[i * l + j] = true;
    }

    let mut pivots = 0;
    loop {
        let adj = basis.adjacency();
        let (u, v) = basis.duals(cost, &adj)?;

        let mut entering: Option<(usize, usize)> = None;
        let mut best = -rc_tol;
        'scan: for i in 0..k {
            for j in 0..l {
                if in_basis[i * l + j] {
                    continue;
                }
                let rc = cost[(i, j)] - u[i] - v[j];
                if rc < best {
                    entering = Some((i, j));
                    match rule {
                        PivotRule::Bland => break 'scan,
                        PivotRule::Dantzig => best = rc,
                    }
                }
            }
        }
        let Some((ei, ej)) = entering else {
            let mut flow = DMatrix::zeros(k, l);
            for (&(i, j), f) in basis.cells.iter().zip(&basis.flow) {
                flow[(i, j)] = f.v.max(0.0);
            }
            return Ok(SimplexSolution { flow, u, v, pivots });
        };

        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Lp(format!("no convergence after {max_pivots} pivots")));
        }

        // Path cells alternate -, +, -, ... starting next to row `ei`.
        let path = basis.path(&adj, ei, ej);
        let mut leave: Option<usize> = None;
        for (pos, &slot) in path.iter().enumerate() {
            if pos % 2 != 0 {
                continue;
            }
            leave = match leave {
                None => Some(slot),
                Some(cur) => match basis.flow[slot].cmp(&basis.flow[cur]) {
                    Ordering::Less => Some(slot),
                    Ordering::Equal if basis.cells[slot] < basis.cells[cur] => Some(slot),
                    _ => Some(cur),
                },
            };
        }
        let leave = leave.ok_or_else(|| Error::Lp("empty pivot cycle".into()))?;
        let theta = basis.flow[leave];
        for (pos, &slot) in path.iter().enumerate() {
            basis.flow[slot] = if pos % 2 == 0 {
                basis.flow[slot].sub(theta)
            } else {
                basis.flow[slot].add(theta)
            };
        }
        let (li, lj) = basis.cells[leave];
        in_basis[li * l + lj] = false;
        in_basis[ei * l + ej] = true;
        basis.cells[leave] = (ei, ej);
        basis.flow[leave] = theta;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn north_west_basis_is_a_spanning_tree() {
        let b = Basis::north_west(&[0.5, 0.5], &[0.5, 0.5]);
        assert_eq!(b.cells.len(), 3);
        let adj = b.adjacency();
        let cost = DMatrix::zeros(2, 2);
        assert!(b.duals(&cost, &adj).is_ok());
        // perturbed flows are all strictly positive
        assert!(b.flow.iter().all(|f| f.cmp(&Lex { v: 0.0, e: 0 }) == Ordering::Greater));
    }

    #[test]
    fn degenerate_zero_marginals() {
        let cost = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 4.0, 0.0, 6.0, 7.0, 8.0, 0.5]);
        let s = solve_min(&cost, &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], PivotRule::Bland).unwrap();
        assert_eq!(s.flow[(1, 2)], 1.0);
        let s2 = solve_min(&cost, &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], PivotRule::Dantzig).unwrap();
        assert_eq!(s2.flow, s.flow);
    }
}
