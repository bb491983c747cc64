//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p subgauss-cli --test acceptance`.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};
use subgauss_core::chaining::{fernique_sandwich_check, GroupAction};
use subgauss_core::comparison::{estimate_constant, sup_decomposition_check, GaussMethod, MaxAffine, WitnessFamily};
use subgauss_core::model::{empirical_law, sample_source};
use subgauss_core::quadrature::{gaussian_grid, DEFAULT_CLIP};
use subgauss_core::rng::derive_seed;
use subgauss_core::tensorization::{
    enumerate_sequence_class, mc_sup_tensorized, reference_functional, stationarity_check, tensor_gaussian_cov,
    RationalMeasure, DEFAULT_CAP,
};
use subgauss_core::transport::{
    continuity_gap_tv, continuity_gap_w1, fernique_functional, mix_with_product, strassen_feasibility, wasserstein1,
    DEFAULT_FEASIBILITY_TOL,
};
use subgauss_core::{DiscreteLaw, GaussianSpec, IndexSet, MeasureOnT, Norm, ProcessSource};
use support::{random_atoms, random_probs, vertex_enumeration_max};

const SEED: u64 = 0x5eed_2024;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn read_fixture<T: serde::de::DeserializeOwned>(name: &str) -> T {
    let text = std::fs::read_to_string(fixtures().join(name)).expect("fixture exists");
    serde_json::from_str(&text).expect("fixture parses")
}

fn random_law(rng: &mut ChaCha8Rng, k: usize, n: usize) -> DiscreteLaw {
    let atoms = random_atoms(rng, k, n);
    let w = random_probs(rng, k);
    DiscreteLaw::new(IndexSet::numbered(n).unwrap(), atoms, w).unwrap()
}

fn fernique_vs_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 1));
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (k, n) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let law = random_law(&mut rng, k, n);
        let mu = MeasureOnT::new(law.index().clone(), random_probs(&mut rng, n)).unwrap();
        let value = fernique_functional(&law, &mu).unwrap().value;
        let oracle = vertex_enumeration_max(law.atoms(), law.weights(), mu.probs());
        worst = worst.max((value - oracle).abs());
    }
    verdict(worst <= 1e-9, format!("200 instances, max |simplex - vertex enumeration| = {worst:.3e}"))
}

fn sup_decomposition() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 2));
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..50 {
        let (k, n) = (rng.random_range(1..=6), rng.random_range(1..=5));
        let law = random_law(&mut rng, k, n);
        let m: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let r = sup_decomposition_check(&law, &m).unwrap();
        worst = worst.max(r.statistic);
        failures += usize::from(!r.pass);
    }
    verdict(failures == 0 && worst <= 1e-9, format!("50 instances, max |lhs - rhs| = {worst:.3e}, failures {failures}"))
}

fn tensorization_convergence() -> Verdict {
    let source: ProcessSource = read_fixture("bivariate_gaussian.json");
    let mu: MeasureOnT = read_fixture("half_half.json");
    let rational = RationalMeasure::from_measure(&mu, 2).unwrap();
    let replicates = 1_000_000;
    let c1 = enumerate_sequence_class(&rational, 1, DEFAULT_CAP).unwrap();
    let c4 = enumerate_sequence_class(&rational, 4, DEFAULT_CAP).unwrap();
    let e1 = mc_sup_tensorized(&source, &c1, replicates, derive_seed(SEED, 31)).unwrap();
    let e4 = mc_sup_tensorized(&source, &c4, replicates, derive_seed(SEED, 34)).unwrap();
    let (lp, _) = reference_functional(&source, &mu).unwrap();
    let first = 1.0 / (2.0 * PI).sqrt();
    let limit = 1.0 / PI.sqrt();
    let near_first = (e1.mean - first).abs() <= 3.0 * e1.stderr;
    let closer = (e4.mean - limit).abs() < (e1.mean - limit).abs();
    let lp_ok = (lp - limit).abs() < 5e-3;
    verdict(
        near_first && closer && lp_ok,
        format!(
            "N=1: {:.5} (target {first:.5}, SE {:.1e}); N=4: {:.5}; limit {limit:.5}, LP reference {lp:.5}",
            e1.mean, e1.stderr, e4.mean
        ),
    )
}

fn continuity_bounds() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 4));
    let (mut min_w1, mut min_tv) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..500 {
        let n = rng.random_range(1..=4);
        let (ka, kb) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let a = random_law(&mut rng, ka, n);
        let b = random_law(&mut rng, kb, n);
        let mu = MeasureOnT::new(a.index().clone(), random_probs(&mut rng, n)).unwrap();
        min_w1 = min_w1.min(continuity_gap_w1(&a, &b, &mu, Norm::Euclidean).unwrap().slack);
    }
    for _ in 0..500 {
        let n = rng.random_range(1..=4);
        let k = rng.random_range(1..=4);
        let a = random_law(&mut rng, k, n);
        let mu = MeasureOnT::new(a.index().clone(), random_probs(&mut rng, n)).unwrap();
        let nu = MeasureOnT::new(a.index().clone(), random_probs(&mut rng, n)).unwrap();
        let r = rng.random_range(0.0..6.0);
        min_tv = min_tv.min(continuity_gap_tv(&a, &mu, &nu, r, Norm::Euclidean).unwrap().slack);
    }
    // slack below zero only by LP rounding counts as nonnegative
    verdict(
        min_w1 >= -1e-9 && min_tv >= -1e-9,
        format!("min slack: W1 bound {min_w1:.3e}, TV bound {min_tv:.3e} (500 instances each)"),
    )
}

fn empirical_convergence() -> Verdict {
    let law = DiscreteLaw::new(
        IndexSet::numbered(2).unwrap(),
        vec![vec![1.0, 0.0], vec![-1.0, 1.0], vec![0.0, -2.0]],
        vec![0.5, 0.3, 0.2],
    )
    .unwrap();
    let source = ProcessSource::Law(law.clone());
    let mean_w1 = |n: usize, stream: u64| -> f64 {
        (0..50u64)
            .map(|rep| {
                let batch = sample_source(&source, n, derive_seed(derive_seed(SEED, stream), rep)).unwrap();
                wasserstein1(&empirical_law(&batch).unwrap(), &law).unwrap()
            })
            .sum::<f64>()
            / 50.0
    };
    let (small, large) = (mean_w1(100, 51), mean_w1(10_000, 52));
    verdict(small >= 2.0 * large, format!("E W1 at N=100: {small:.4}, at N=10^4: {large:.4}, ratio {:.1}", small / large))
}

fn tensor_stationarity() -> Verdict {
    let cov = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
    let spec = GaussianSpec::centered(IndexSet::numbered(2).unwrap(), cov).unwrap();
    let mu = RationalMeasure::new(IndexSet::numbered(2).unwrap(), vec![1, 1]).unwrap();
    let class = enumerate_sequence_class(&mu, 3, DEFAULT_CAP).unwrap();
    let tensor = tensor_gaussian_cov(&spec, &class).unwrap();
    let r = stationarity_check(&tensor, 100, derive_seed(SEED, 6)).unwrap();
    verdict(
        r.pass,
        format!("class size {}, 100 permutations, max entry change {:.1e}", class.size(), r.statistic),
    )
}

/// `X_t = sum_f sqrt(w_f) (e_f cos(2 pi f t / n) + e'_f sin(2 pi f t / n))`
/// with independent signs: same covariance as the circulant Gaussian.
fn rademacher_series(n: usize, spectrum: &[f64]) -> DiscreteLaw {
    let mut terms: Vec<Vec<f64>> = Vec::new();
    for (f, &w) in spectrum.iter().enumerate() {
        let theta = |t: usize| 2.0 * PI * (f * t) as f64 / n as f64;
        terms.push((0..n).map(|t| w.sqrt() * theta(t).cos()).collect());
        if f > 0 && 2 * f != n {
            terms.push((0..n).map(|t| w.sqrt() * theta(t).sin()).collect());
        }
    }
    let m = terms.len();
    let atoms: Vec<Vec<f64>> = (0..1usize << m)
        .map(|signs| {
            (0..n)
                .map(|t| (0..m).map(|j| if signs >> j & 1 == 1 { terms[j][t] } else { -terms[j][t] }).sum())
                .collect()
        })
        .collect();
    DiscreteLaw::uniform(IndexSet::numbered(n).unwrap(), atoms).unwrap()
}

fn sandwich() -> Verdict {
    let spectrum = [1.0, 0.5, 0.25];
    let mut lines = Vec::new();
    let mut pass = true;
    for n in [8usize, 12, 16] {
        let spec = GaussianSpec::circulant(IndexSet::numbered(n).unwrap(), &spectrum).unwrap();
        let law = ProcessSource::Law(rademacher_series(n, &spectrum));
        let r = fernique_sandwich_check(&law, &spec, &GroupAction::cyclic(n).unwrap(), 200_000, derive_seed(SEED, n as u64))
            .unwrap();
        pass &= r.pass;
        lines.push(format!(
            "n={n}: entropy/E sup X = {:.3}, entropy/E sup G = {:.3}",
            r.ratio_x.unwrap_or(f64::NAN),
            r.ratio_g.unwrap_or(f64::NAN)
        ));
    }
    verdict(pass, lines.join("; "))
}

fn convex_order_crossing() -> Verdict {
    let law: DiscreteLaw = read_fixture("rademacher_1d.json");
    let step = 0.01;
    let grid: Vec<f64> = (0..=60).map(|i| 1.0 + step * i as f64).collect();
    let family = WitnessFamily {
        random: 16,
        seed: 5,
        extra: vec![MaxAffine::abs_along(vec![1.0]).unwrap()],
        ..Default::default()
    };
    let r = estimate_constant(&law, &family, &grid, GaussMethod::auto(1, 0), derive_seed(SEED, 8)).unwrap();
    let target = (PI / 2.0).sqrt();
    match r.smallest_passing_c {
        Some(c) => verdict((c - target).abs() <= step + 1e-12, format!("crossing at c = {c} (sqrt(pi/2) = {target:.5}, step {step})")),
        None => verdict(false, "no grid constant passed"),
    }
}

fn strassen() -> Verdict {
    let index = IndexSet::numbered(1).unwrap();
    let grid = gaussian_grid(index.clone(), 41, DEFAULT_CLIP).unwrap();
    let cs = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    let zero = DiscreteLaw::point_mass(index.clone(), vec![0.0]).unwrap();
    let zero_ok = cs.iter().all(|&c| strassen_feasibility(&zero, &grid, c, DEFAULT_FEASIBILITY_TOL).unwrap().gap <= 1e-6);

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 9));
    let (mut checked, mut upward) = (0usize, true);
    let mut instances_with_feasible = 0;
    for _ in 0..20 {
        let k = rng.random_range(2..=4);
        let atoms: Vec<Vec<f64>> = (0..k).map(|_| vec![rng.random_range(-2.0..2.0)]).collect();
        let law = DiscreteLaw::new(index.clone(), atoms, random_probs(&mut rng, k)).unwrap().centered();
        let mut any = false;
        for &c in &cs {
            let r = strassen_feasibility(&law, &grid, c, DEFAULT_FEASIBILITY_TOL).unwrap();
            if r.feasible {
                any = true;
                checked += 1;
                upward &= mix_with_product(&law, &grid, &r, 2.0 * c).unwrap().feasible;
            }
        }
        instances_with_feasible += usize::from(any);
    }
    verdict(
        zero_ok && upward && instances_with_feasible == 20,
        format!("point mass feasible at all c: {zero_ok}; {checked} feasible (law, c) pairs mixed to 2c, all feasible: {upward}"),
    )
}

fn reproducibility() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_subgauss");
    let tmp = tempfile::tempdir().unwrap();
    let commands = ["fernique", "identity", "tensorize", "chaining", "compare", "strassen", "sample"];
    let mut mismatches = Vec::new();
    let mut files = 0;
    for cmd in commands {
        let out = tmp.path().join(cmd);
        let run = || {
            let status = Command::new(bin)
                .arg(cmd)
                .arg("--config")
                .arg(fixtures().join(format!("{cmd}.json")))
                .arg("--set")
                .arg(format!("output={}", out.display()))
                .output()
                .expect("binary runs");
            assert!(status.status.success(), "{cmd}: {}", String::from_utf8_lossy(&status.stderr));
            let mut names: Vec<PathBuf> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
            names.sort();
            names.into_iter().map(|p| (p.clone(), std::fs::read(p).unwrap())).collect::<Vec<_>>()
        };
        let first = run();
        let second = run();
        files += first.len();
        if first != second {
            mismatches.push(cmd);
        }
    }
    verdict(mismatches.is_empty(), format!("{} configs, {files} files compared, mismatches: {mismatches:?}", commands.len()))
}

fn main() {
    type Criterion = (&'static str, Duration, fn() -> Verdict);
    let criteria: [Criterion; 10] = [
        ("transport value vs vertex enumeration", Duration::from_secs(10), fernique_vs_oracle),
        ("sup-decomposition identity", Duration::from_secs(5), sup_decomposition),
        ("tensorization convergence", Duration::from_secs(120), tensorization_convergence),
        ("continuity bounds (W1 and TV)", Duration::from_secs(60), continuity_bounds),
        ("empirical law convergence in W1", Duration::from_secs(60), empirical_convergence),
        ("stationarity of the averaged Gaussian", Duration::from_secs(5), tensor_stationarity),
        ("entropy sandwich on circulant processes", Duration::from_secs(120), sandwich),
        ("convex-order crossing constant", Duration::from_secs(30), convex_order_crossing),
        ("coupling feasibility and upward closure", Duration::from_secs(60), strassen),
        ("byte-identical reruns of bundled configs", Duration::from_secs(300), reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let pass = v.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} {} | {name} | {} | {:.2}s (limit {}s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
