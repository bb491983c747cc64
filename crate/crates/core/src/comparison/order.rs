use super::witness::{MaxAffine, WitnessFamily};
use crate::error::{Error, Result};
use crate::model::{centeredness_check, CheckReport, DiscreteLaw, IndexSet};
use crate::numfmt::fmt_f64;
use crate::quadrature::{gaussian_grid, DEFAULT_CLIP};
use crate::rng::stream_rng;
use crate::stats::{Estimate, Moments};
use crate::transport::{minimal_feasible_c, strassen_feasibility, DEFAULT_FEASIBILITY_TOL};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

const CENTER_TOL: f64 = 1e-9;
const QUADRATURE_TOL: f64 = 1e-9;
const PAIRS_PER_STREAM: usize = 4096;

/// How `E[f(cG)]` is evaluated, `G ~ N(0, I_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GaussMethod {
    /// Tensor grid with `points` nodes per axis.
    Quadrature { points: usize },
    /// Antithetic Monte Carlo with `samples` draws (`samples / 2` pairs `±g`).
    MonteCarlo { samples: usize },
}

impl GaussMethod {
    /// Quadrature for `n <= 3`, Monte Carlo otherwise.
    pub fn auto(n: usize, samples: usize) -> Self {
        match n {
            1 => GaussMethod::Quadrature { points: 4001 },
            2 => GaussMethod::Quadrature { points: 201 },
            3 => GaussMethod::Quadrature { points: 61 },
            _ => GaussMethod::MonteCarlo { samples },
        }
    }

    fn label(&self) -> String {
        match self {
            GaussMethod::Quadrature { points } => format!("quadrature({points})"),
            GaussMethod::MonteCarlo { samples } => format!("monte_carlo({samples})"),
        }
    }
}

/// `E[f(c G)]` for every `c` and witness, indexed `[c][witness]`. Monte
/// Carlo uses the same draws for every entry, averaged over `±g`, so each
/// row is nondecreasing in `c` sample by sample.
fn gaussian_expectations(
    n: usize,
    cs: &[f64],
    witnesses: &[MaxAffine],
    method: GaussMethod,
    seed: u64,
) -> Result<Vec<Vec<Estimate>>> {
    let nw = witnesses.len();
    match method {
        GaussMethod::Quadrature { points } => {
            let grid = gaussian_grid(IndexSet::numbered(n)?, points, DEFAULT_CLIP)?;
            Ok(cs
                .iter()
                .map(|&c| {
                    witnesses
                        .par_iter()
                        .map(|f| Estimate::exact(grid.iter().map(|(g, w)| w * f.eval_scaled(c, g)).sum()))
                        .collect()
                })
                .collect())
        }
        GaussMethod::MonteCarlo { samples } => {
            if samples < 200 {
                return Err(Error::InsufficientSamples { got: samples, min: 200 });
            }
            let pairs = samples / 2;
            let streams = pairs.div_ceil(PAIRS_PER_STREAM);
            let parts: Vec<Vec<Moments>> = (0..streams)
                .into_par_iter()
                .map(|stream| {
                    let mut rng = stream_rng(seed, stream as u64);
                    let count = PAIRS_PER_STREAM.min(pairs - stream * PAIRS_PER_STREAM);
                    let mut acc = vec![Moments::default(); cs.len() * nw];
                    let mut g = vec![0.0; n];
                    let mut neg = vec![0.0; n];
                    for _ in 0..count {
                        for (a, b) in g.iter_mut().zip(neg.iter_mut()) {
                            *a = rng.sample(StandardNormal);
                            *b = -*a;
                        }
                        for (ci, &c) in cs.iter().enumerate() {
                            for (wi, f) in witnesses.iter().enumerate() {
                                let v = 0.5 * (f.eval_scaled(c, &g) + f.eval_scaled(c, &neg));
                                acc[ci * nw + wi].push(v);
                            }
                        }
                    }
                    acc
                })
                .collect();
            let mut total = vec![Moments::default(); cs.len() * nw];
            for part in &parts {
                for (t, p) in total.iter_mut().zip(part) {
                    t.merge(p);
                }
            }
            Ok(total.chunks(nw).map(|row| row.iter().map(Estimate::from_moments).collect()).collect())
        }
    }
}

/// One witness at one scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessGap {
    pub id: usize,
    /// `E[f(X)]`, exact.
    pub e_fx: f64,
    pub e_fcg: Estimate,
    /// `E[f(X)] - E[f(cG)]`.
    pub gap: f64,
    /// Allowed excess: quadrature tolerance or three standard errors.
    pub slack: f64,
}

fn gap_row(law: &DiscreteLaw, witnesses: &[MaxAffine], e_fx: &[f64], row: &[Estimate], method: GaussMethod) -> Vec<WitnessGap> {
    let _ = law;
    witnesses
        .iter()
        .enumerate()
        .map(|(id, _)| {
            let e = row[id];
            let slack = match method {
                GaussMethod::Quadrature { .. } => QUADRATURE_TOL * (1.0 + e.mean.abs()),
                GaussMethod::MonteCarlo { .. } => 3.0 * e.stderr,
            };
            WitnessGap { id, e_fx: e_fx[id], e_fcg: e, gap: e_fx[id] - e.mean, slack }
        })
        .collect()
}

/// `E[f(X)] - E[f(cG)]` for every witness, without precondition checks.
pub fn convex_order_gaps(
    law: &DiscreteLaw,
    c: f64,
    witnesses: &[MaxAffine],
    method: GaussMethod,
    seed: u64,
) -> Result<Vec<WitnessGap>> {
    check_c(c)?;
    check_witnesses(law, witnesses)?;
    let e_fx: Vec<f64> = witnesses.iter().map(|f| f.expect(law)).collect();
    let table = gaussian_expectations(law.dim(), &[c], witnesses, method, seed)?;
    Ok(gap_row(law, witnesses, &e_fx, &table[0], method))
}

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::NonpositiveC(c));
    }
    Ok(())
}

fn check_witnesses(law: &DiscreteLaw, witnesses: &[MaxAffine]) -> Result<()> {
    if witnesses.is_empty() {
        return Err(Error::InvalidInput("no witnesses".into()));
    }
    if let Some(f) = witnesses.iter().find(|f| f.dim() != law.dim()) {
        return Err(Error::IndexMismatch(format!("witness of dimension {} for a law on {} points", f.dim(), law.dim())));
    }
    Ok(())
}

/// `P[|<a, X>| > x |a|] <= 2 exp(-x^2 / 2)` for every witness slope `a`.
fn projection_tail_check(law: &DiscreteLaw, witnesses: &[MaxAffine]) -> CheckReport {
    let x_grid: Vec<f64> = (1..=16).map(|i| 0.25 * i as f64).collect();
    let mut worst = 0.0f64;
    let mut directions = 0usize;
    for a in witnesses.iter().flat_map(|f| f.slopes()) {
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-12 {
            continue;
        }
        directions += 1;
        let proj: Vec<(f64, f64)> =
            law.iter().map(|(x, w)| ((a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() / norm).abs(), w)).collect();
        for &x in &x_grid {
            let tail: f64 = proj.iter().filter(|(y, _)| *y > x * (1.0 + 1e-12)).map(|(_, w)| w).sum();
            worst = worst.max(tail / (2.0 * (-x * x / 2.0).exp()));
        }
    }
    CheckReport::inequality("projection_tails", worst, 1.0, 1e-12).with_detail("directions", directions as f64)
}

fn preconditions(law: &DiscreteLaw, witnesses: &[MaxAffine]) -> Result<()> {
    let centered = centeredness_check(law, CENTER_TOL);
    if !centered.pass {
        return Err(Error::PreconditionFailed(format!("law is not centered (|mean| = {})", centered.statistic)));
    }
    let tails = projection_tail_check(law, witnesses);
    if !tails.pass {
        return Err(Error::PreconditionFailed(format!(
            "projections along witness slopes are not 1-subgaussian (worst tail ratio {})",
            tails.statistic
        )));
    }
    Ok(())
}

/// Result of testing `E[f(X)] <= E[f(cG)]` over a witness family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub c: f64,
    pub family: String,
    pub method: String,
    pub worst_gap: f64,
    pub worst_witness_id: usize,
    /// Present when some witness exceeds its slack: the one with the
    /// largest excess.
    pub violating_witness: Option<MaxAffine>,
    pub violating_witness_id: Option<usize>,
    pub pass: bool,
    /// `E[f(X)] >= f(0)` held for every witness.
    pub jensen_ok: bool,
    pub gaps: Vec<WitnessGap>,
}

fn summarize(c: f64, family: String, method: GaussMethod, witnesses: &[MaxAffine], gaps: Vec<WitnessGap>, jensen_ok: bool) -> OrderingReport {
    let worst = gaps.iter().max_by(|a, b| a.gap.total_cmp(&b.gap).then(b.id.cmp(&a.id))).expect("witnesses");
    let excess = gaps
        .iter()
        .filter(|g| g.gap > g.slack)
        .max_by(|a, b| (a.gap - a.slack).total_cmp(&(b.gap - b.slack)).then(b.id.cmp(&a.id)));
    OrderingReport {
        c,
        family,
        method: method.label(),
        worst_gap: worst.gap,
        worst_witness_id: worst.id,
        violating_witness: excess.map(|g| witnesses[g.id].clone()),
        violating_witness_id: excess.map(|g| g.id),
        pass: excess.is_none(),
        jensen_ok,
        gaps,
    }
}

fn jensen_holds(witnesses: &[MaxAffine], e_fx: &[f64], n: usize) -> bool {
    let zero = vec![0.0; n];
    witnesses.iter().zip(e_fx).all(|(f, e)| {
        let f0 = f.eval(&zero);
        *e >= f0 - 1e-12 * (1.0 + f0.abs())
    })
}

/// Tests `E[f(X)] <= E[f(cG)]` for each witness. Requires a centered law
/// whose projections on the witness slopes are 1-subgaussian.
pub fn convex_order_check(
    law: &DiscreteLaw,
    c: f64,
    witnesses: &[MaxAffine],
    method: GaussMethod,
    seed: u64,
) -> Result<OrderingReport> {
    check_c(c)?;
    check_witnesses(law, witnesses)?;
    preconditions(law, witnesses)?;
    let e_fx: Vec<f64> = witnesses.iter().map(|f| f.expect(law)).collect();
    let jensen_ok = jensen_holds(witnesses, &e_fx, law.dim());
    let gaps = convex_order_gaps(law, c, witnesses, method, seed)?;
    Ok(summarize(c, format!("{} witnesses", witnesses.len()), method, witnesses, gaps, jensen_ok))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantRow {
    pub c: f64,
    pub worst_gap: f64,
    pub worst_witness_id: usize,
    pub pass: bool,
    /// Standard error of the worst gap (zero under quadrature).
    pub worst_stderr: f64,
}

/// Convex-order tests along a grid of constants.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantReport {
    pub family: WitnessFamily,
    pub method: String,
    pub witnesses: usize,
    pub rows: Vec<ConstantRow>,
    pub smallest_passing_c: Option<f64>,
    /// Every witness's gap is nonincreasing along the grid.
    pub monotone: bool,
    pub jensen_ok: bool,
    /// Smallest `c` with an exact coupling `X = c E[G | X]` on a coarse
    /// Gaussian grid (dimension at most 2 only).
    pub coupling_c: Option<f64>,
}

impl ConstantReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("c,worst_gap,worst_witness_id,pass\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", fmt_f64(r.c), fmt_f64(r.worst_gap), r.worst_witness_id, r.pass));
        }
        out
    }
}

fn coupling_constant(law: &DiscreteLaw) -> Result<Option<f64>> {
    let points = match law.dim() {
        1 => 41,
        2 => 11,
        _ => return Ok(None),
    };
    let grid = gaussian_grid(law.index().clone(), points, DEFAULT_CLIP)?;
    if law.num_atoms() * grid.num_atoms() > 20_000 {
        return Ok(None);
    }
    let mut hi = 1.0;
    while !strassen_feasibility(law, &grid, hi, DEFAULT_FEASIBILITY_TOL)?.feasible {
        hi *= 2.0;
        if hi > 256.0 {
            return Ok(None);
        }
    }
    let r = minimal_feasible_c(law, &grid, 1e-3, hi, DEFAULT_FEASIBILITY_TOL, 40)?;
    Ok(Some(r.c))
}

/// Runs the convex-order test at each `c` of an increasing grid with one
/// shared set of Gaussian draws.
pub fn estimate_constant(
    law: &DiscreteLaw,
    family: &WitnessFamily,
    c_grid: &[f64],
    method: GaussMethod,
    seed: u64,
) -> Result<ConstantReport> {
    if c_grid.is_empty() || c_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("c grid must be nonempty and increasing".into()));
    }
    c_grid.iter().try_for_each(|&c| check_c(c))?;
    let witnesses = family.generate(law)?;
    preconditions(law, &witnesses)?;
    let e_fx: Vec<f64> = witnesses.iter().map(|f| f.expect(law)).collect();
    let jensen_ok = jensen_holds(&witnesses, &e_fx, law.dim());
    let table = gaussian_expectations(law.dim(), c_grid, &witnesses, method, seed)?;
    let reports: Vec<OrderingReport> = c_grid
        .iter()
        .zip(&table)
        .map(|(&c, row)| {
            let gaps = gap_row(law, &witnesses, &e_fx, row, method);
            summarize(c, family.describe(), method, &witnesses, gaps, jensen_ok)
        })
        .collect();
    let monotone = (0..witnesses.len()).all(|w| table.windows(2).all(|p| p[1][w].mean >= p[0][w].mean - 1e-12 * (1.0 + p[0][w].mean.abs())));
    let rows: Vec<ConstantRow> = reports
        .iter()
        .map(|r| ConstantRow {
            c: r.c,
            worst_gap: r.worst_gap,
            worst_witness_id: r.worst_witness_id,
            pass: r.pass,
            worst_stderr: r.gaps[r.worst_witness_id].e_fcg.stderr,
        })
        .collect();
    let smallest_passing_c = rows.iter().find(|r| r.pass).map(|r| r.c);
    Ok(ConstantReport {
        family: family.clone(),
        method: method.label(),
        witnesses: witnesses.len(),
        rows,
        smallest_passing_c,
        monotone,
        jensen_ok,
        coupling_c: coupling_constant(law)?,
    })
}
