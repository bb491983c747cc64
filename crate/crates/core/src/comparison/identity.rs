use crate::error::{Error, Result};
use crate::model::{CheckReport, DiscreteLaw, MeasureOnT};
use crate::transport::fernique_functional;

/// Step used when probing `mu*` along `e_t - e_s`.
pub const PERTURBATION: f64 = 1e-3;

const IDENTITY_TOL: f64 = 1e-9;

fn check_shift(law: &DiscreteLaw, m: &[f64]) -> Result<()> {
    if m.len() != law.dim() {
        return Err(Error::IndexMismatch(format!("shift has {} entries, law lives on {} points", m.len(), law.dim())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite shift".into()));
    }
    Ok(())
}

fn argmax(x: &[f64], m: &[f64]) -> usize {
    let mut best = 0;
    for t in 1..x.len() {
        if x[t] + m[t] > x[best] + m[best] {
            best = t;
        }
    }
    best
}

/// `E[max_t (X_t + m_t)]`, exact over atoms.
pub fn expected_sup_shifted(law: &DiscreteLaw, m: &[f64]) -> Result<f64> {
    check_shift(law, m)?;
    Ok(law
        .iter()
        .map(|(x, w)| {
            let t = argmax(x, m);
            w * (x[t] + m[t])
        })
        .sum())
}

/// Law of the maximizing index of `X_t + m_t`, ties to the lowest index.
pub fn argmax_measure(law: &DiscreteLaw, m: &[f64]) -> Result<MeasureOnT> {
    check_shift(law, m)?;
    let mut probs = vec![0.0; law.dim()];
    for (x, w) in law.iter() {
        probs[argmax(x, m)] += w;
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    MeasureOnT::new(law.index().clone(), probs)
}

fn objective(law: &DiscreteLaw, mu: &MeasureOnT, m: &[f64]) -> Result<f64> {
    Ok(fernique_functional(law, mu)?.value + mu.integrate(m))
}

/// Checks `E[max_t (X_t + m_t)] = F(X, mu*) + <mu*, m>` at the argmax law
/// `mu*`, and that no step of size [`PERTURBATION`] along `e_t - e_s`
/// increases the right-hand side.
pub fn sup_decomposition_check(law: &DiscreteLaw, m: &[f64]) -> Result<CheckReport> {
    let lhs = expected_sup_shifted(law, m)?;
    let mu = argmax_measure(law, m)?;
    let rhs = objective(law, &mu, m)?;
    let n = law.dim();
    let scale = 1.0 + lhs.abs();
    let mut worst_increase = f64::NEG_INFINITY;
    let mut probes = 0usize;
    for t in 0..n {
        for s in 0..n {
            let step = PERTURBATION.min(mu.probs()[s]);
            if t == s || step <= 0.0 {
                continue;
            }
            let mut p = mu.probs().to_vec();
            p[t] += step;
            p[s] -= step;
            let moved = MeasureOnT::new(law.index().clone(), p)?;
            worst_increase = worst_increase.max(objective(law, &moved, m)? - rhs);
            probes += 1;
        }
    }
    let gap = (lhs - rhs).abs();
    let mut report = CheckReport::inequality("sup_decomposition", gap, IDENTITY_TOL * scale, 0.0)
        .with_detail("lhs", lhs)
        .with_detail("rhs", rhs)
        .with_detail("probes", probes as f64);
    if probes > 0 {
        report = report.with_detail("worst_increase", worst_increase);
        if worst_increase > IDENTITY_TOL * scale {
            report.pass = false;
            report = report.with_note("a perturbation of the argmax law increases the objective");
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IndexSet;

    fn swap_law() -> DiscreteLaw {
        DiscreteLaw::uniform(IndexSet::numbered(2).unwrap(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    #[test]
    fn shifted_sup_examples() {
        let zero = DiscreteLaw::point_mass(IndexSet::numbered(3).unwrap(), vec![0.0; 3]).unwrap();
        assert_eq!(expected_sup_shifted(&zero, &[0.0; 3]).unwrap(), 0.0);
        assert_eq!(expected_sup_shifted(&swap_law(), &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(expected_sup_shifted(&swap_law(), &[10.0, 0.0]).unwrap(), 10.0);
        assert!(matches!(expected_sup_shifted(&swap_law(), &[0.0]), Err(Error::IndexMismatch(_))));
    }

    #[test]
    fn identity_on_the_swap_law() {
        let r = sup_decomposition_check(&swap_law(), &[0.0, 0.0]).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(argmax_measure(&swap_law(), &[0.0, 0.0]).unwrap().probs(), &[0.5, 0.5]);
        assert!((r.details["rhs"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dominant_shift_gives_a_dirac() {
        let law = swap_law();
        let mu = argmax_measure(&law, &[10.0, 0.0]).unwrap();
        assert_eq!(mu.probs(), &[1.0, 0.0]);
        let r = sup_decomposition_check(&law, &[10.0, 0.0]).unwrap();
        assert!(r.pass && (r.details["rhs"] - 10.0).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn ties_go_to_the_lowest_index() {
        let law = DiscreteLaw::point_mass(IndexSet::numbered(3).unwrap(), vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(argmax_measure(&law, &[0.0, 0.0, 1.0]).unwrap().probs(), &[1.0, 0.0, 0.0]);
    }
}
