use crate::error::{Error, Result};
use crate::model::MetricOnT;
use crate::numfmt::fmt_f64;
use serde::Serialize;

/// Largest `n` accepted by the exact set-cover search.
pub const EXACT_MAX_N: usize = 20;

/// Relative slack when testing `d(t, s) <= eps`.
const BALL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverMethod {
    #[default]
    Exact,
    Greedy,
}

fn ball_masks(metric: &MetricOnT, eps: f64) -> Vec<u32> {
    let n = metric.len();
    let level = eps * (1.0 + BALL_TOL);
    (0..n)
        .map(|t| (0..n).filter(|&s| metric.dist(t, s) <= level).fold(0u32, |m, s| m | (1 << s)))
        .collect()
}

fn ball_sets(metric: &MetricOnT, eps: f64) -> Vec<Vec<usize>> {
    let n = metric.len();
    let level = eps * (1.0 + BALL_TOL);
    (0..n).map(|t| (0..n).filter(|&s| metric.dist(t, s) <= level).collect()).collect()
}

fn greedy_cover(metric: &MetricOnT, eps: f64) -> Vec<usize> {
    let n = metric.len();
    let balls = ball_sets(metric, eps);
    let mut covered = vec![false; n];
    let mut left = n;
    let mut centers = Vec::new();
    while left > 0 {
        let (best, _) = balls
            .iter()
            .enumerate()
            .map(|(t, b)| (t, b.iter().filter(|&&s| !covered[s]).count()))
            .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        for &s in &balls[best] {
            if !covered[s] {
                covered[s] = true;
                left -= 1;
            }
        }
        centers.push(best);
    }
    centers
}

struct Search<'a> {
    balls: &'a [u32],
    /// candidate centers for each point, largest balls first
    covering: Vec<Vec<usize>>,
    max_ball: u32,
    best: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, uncovered: u32, chosen: &mut Vec<usize>) {
        if uncovered == 0 {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        let need = uncovered.count_ones().div_ceil(self.max_ball) as usize;
        if chosen.len() + need.max(1) >= self.best.len() {
            return;
        }
        let first = uncovered.trailing_zeros() as usize;
        for i in 0..self.covering[first].len() {
            let t = self.covering[first][i];
            chosen.push(t);
            self.run(uncovered & !self.balls[t], chosen);
            chosen.pop();
        }
    }
}

fn exact_cover(metric: &MetricOnT, eps: f64) -> Result<Vec<usize>> {
    let n = metric.len();
    if n > EXACT_MAX_N {
        return Err(Error::ExactTooLarge { n, max: EXACT_MAX_N });
    }
    let balls = ball_masks(metric, eps);
    let covering = (0..n)
        .map(|s| {
            let mut c: Vec<usize> = (0..n).filter(|&t| balls[t] & (1 << s) != 0).collect();
            c.sort_by_key(|&t| std::cmp::Reverse(balls[t].count_ones()));
            c
        })
        .collect();
    let max_ball = balls.iter().map(|b| b.count_ones()).max().unwrap_or(1);
    let mut search = Search { balls: &balls, covering, max_ball, best: greedy_cover(metric, eps) };
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    search.run(full, &mut Vec::new());
    let mut best = search.best;
    best.sort_unstable();
    Ok(best)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// Centers of a cover of `T` by closed `eps`-balls: a minimum one for
/// [`CoverMethod::Exact`], the greedy one (most newly covered points,
/// lowest index on ties) otherwise.
pub fn covering_centers(metric: &MetricOnT, eps: f64, method: CoverMethod) -> Result<Vec<usize>> {
    check_eps(eps)?;
    match method {
        CoverMethod::Exact => exact_cover(metric, eps),
        CoverMethod::Greedy => Ok(greedy_cover(metric, eps)),
    }
}

/// `N(T, d, eps)`.
pub fn covering_number(metric: &MetricOnT, eps: f64, method: CoverMethod) -> Result<usize> {
    Ok(covering_centers(metric, eps, method)?.len())
}

/// Covering numbers along a decreasing list of scales.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringProfile {
    pub scales: Vec<f64>,
    /// `None` when `n` exceeds [`EXACT_MAX_N`].
    pub exact: Option<Vec<usize>>,
    pub greedy: Vec<usize>,
}

pub fn covering_profile(metric: &MetricOnT, scales: &[f64]) -> Result<CoveringProfile> {
    if scales.is_empty() {
        return Err(Error::InvalidInput("no scales given".into()));
    }
    for &e in scales {
        check_eps(e)?;
    }
    if scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("scales must be strictly decreasing".into()));
    }
    let exact = if metric.len() <= EXACT_MAX_N {
        Some(scales.iter().map(|&e| covering_number(metric, e, CoverMethod::Exact)).collect::<Result<_>>()?)
    } else {
        None
    };
    let greedy = scales.iter().map(|&e| covering_number(metric, e, CoverMethod::Greedy)).collect::<Result<_>>()?;
    Ok(CoveringProfile { scales: scales.to_vec(), exact, greedy })
}

impl CoveringProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,N_exact,N_greedy\n");
        for (i, s) in self.scales.iter().enumerate() {
            let exact = self.exact.as_ref().map_or(String::new(), |e| e[i].to_string());
            out.push_str(&format!("{},{},{}\n", fmt_f64(*s), exact, self.greedy[i]));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IndexSet;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn path4() -> MetricOnT {
        MetricOnT::from_points_on_line(IndexSet::numbered(4).unwrap(), &[0.0, 1.0, 2.0, 3.0]).unwrap()
    }

    /// Minimum cover by trying every subset of centers.
    fn brute_force(metric: &MetricOnT, eps: f64) -> usize {
        let n = metric.len();
        (1u32..(1 << n))
            .filter(|mask| {
                (0..n).all(|s| (0..n).any(|t| mask & (1 << t) != 0 && metric.dist(t, s) <= eps * (1.0 + 1e-12)))
            })
            .map(|m| m.count_ones() as usize)
            .min()
            .unwrap()
    }

    #[test]
    fn path_metric_examples() {
        let d = path4();
        assert_eq!(covering_number(&d, 1.0, CoverMethod::Exact).unwrap(), 2);
        assert_eq!(covering_number(&d, 3.0, CoverMethod::Exact).unwrap(), 1);
        assert_eq!(covering_number(&d, 2.0, CoverMethod::Exact).unwrap(), 1);
        assert_eq!(covering_number(&d, 0.5, CoverMethod::Exact).unwrap(), 4);
        assert_eq!(covering_number(&d, 0.5, CoverMethod::Greedy).unwrap(), 4);
    }

    #[test]
    fn eps_must_be_positive() {
        assert!(covering_number(&path4(), 0.0, CoverMethod::Greedy).is_err());
    }

    #[test]
    fn exact_refuses_large_sets() {
        let xs: Vec<f64> = (0..21).map(f64::from).collect();
        let d = MetricOnT::from_points_on_line(IndexSet::numbered(21).unwrap(), &xs).unwrap();
        assert!(matches!(covering_number(&d, 1.0, CoverMethod::Exact), Err(Error::ExactTooLarge { n: 21, .. })));
        assert_eq!(covering_number(&d, 1.0, CoverMethod::Greedy).unwrap(), 7);
    }

    #[test]
    fn profile_csv() {
        let p = covering_profile(&path4(), &[3.0, 1.0, 0.5]).unwrap();
        assert_eq!(p.to_csv(), "scale,N_exact,N_greedy\n3,1,1\n1,2,2\n0.5,4,4\n");
        assert!(covering_profile(&path4(), &[1.0, 2.0]).is_err());
    }

    fn random_metric(points: Vec<(f64, f64)>) -> MetricOnT {
        let n = points.len();
        let dist = DMatrix::from_fn(n, n, |i, j| {
            ((points[i].0 - points[j].0).powi(2) + (points[i].1 - points[j].1).powi(2)).sqrt()
        });
        MetricOnT::new(IndexSet::numbered(n).unwrap(), dist).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exact_matches_brute_force_and_greedy_dominates(
            points in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..=10),
            eps in 0.1f64..8.0,
        ) {
            let d = random_metric(points);
            let exact = covering_number(&d, eps, CoverMethod::Exact).unwrap();
            prop_assert_eq!(exact, brute_force(&d, eps));
            prop_assert!(covering_number(&d, eps, CoverMethod::Greedy).unwrap() >= exact);
        }

        #[test]
        fn nonincreasing_in_eps(
            points in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..=12),
            mut scales in prop::collection::vec(0.05f64..15.0, 2..8),
        ) {
            let d = random_metric(points);
            scales.sort_by(|a, b| b.total_cmp(a));
            scales.dedup();
            let p = covering_profile(&d, &scales).unwrap();
            let exact = p.exact.unwrap();
            for w in exact.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            for (e, g) in exact.iter().zip(&p.greedy) {
                prop_assert!(1 <= *e && *e <= d.len() && g >= e);
            }
        }
    }
}
