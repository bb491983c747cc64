use crate::config::{Command, ExperimentConfig};
use crate::output::{OutputDir, PlotRow};
use crate::Result;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::path::PathBuf;
use subgauss_core::chaining::{covering_profile, fernique_sandwich_check, CoverMethod, GroupAction};
use subgauss_core::comparison::{argmax_measure, estimate_constant, sup_decomposition_check, GaussMethod, WitnessFamily};
use subgauss_core::model::{empirical_law, sample_source, subgaussian_increment_check, IncrementSource};
use subgauss_core::numfmt::fmt_f64;
use subgauss_core::quadrature::{gaussian_grid, DEFAULT_CLIP};
use subgauss_core::rng::derive_seed;
use subgauss_core::tensorization::{
    class_size, convergence_study, enumerate_sequence_class, stationarity_check, tensor_gaussian_cov,
    RationalMeasure, COV_CAP, DEFAULT_CAP,
};
use subgauss_core::transport::{
    best_truncation_radius, continuity_gap_tv, continuity_gap_w1, fernique_functional, minimal_feasible_c,
    mix_with_product, strassen_feasibility, DEFAULT_FEASIBILITY_TOL,
};
use subgauss_core::{DiscreteLaw, Error, GaussianSpec, MeasureOnT, Norm, ProcessSource};

/// What a run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    /// First failing check, by name.
    pub failed_check: Option<String>,
    pub files: Vec<PathBuf>,
}

#[derive(Default)]
struct Checks(Vec<(String, bool)>);

impl Checks {
    fn add(&mut self, name: &str, pass: bool) {
        self.0.push((name.to_string(), pass));
    }

    fn failed(&self) -> Option<String> {
        self.0.iter().find(|c| !c.1).map(|c| c.0.clone())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Runs the configured command and writes its artifacts.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let command = cfg.command.expect("set on load");
    let mut out = OutputDir::create(cfg.output_dir())?;
    let mut checks = Checks::default();
    let mut result = Map::new();
    let echo = match command {
        Command::Fernique => fernique(cfg, &mut out, &mut checks, &mut result)?,
        Command::Identity => identity(cfg, &mut checks, &mut result)?,
        Command::Tensorize => tensorize(cfg, &mut out, &mut checks, &mut result)?,
        Command::Chaining => chaining(cfg, &mut out, &mut checks, &mut result)?,
        Command::Compare => compare(cfg, &mut out, &mut checks, &mut result)?,
        Command::Strassen => strassen(cfg, &mut out, &mut checks, &mut result)?,
        Command::Sample => sample(cfg, &mut out, &mut checks, &mut result)?,
    };

    let failed_check = checks.failed();
    let mut summary = result;
    summary.insert("command".into(), json!(command.name()));
    summary.insert(
        "config".into(),
        json!({
            "command": command.name(),
            "seed": cfg.seed(),
            "output": cfg.output_dir(),
            "inputs": cfg.inputs,
            "parameters": echo,
        }),
    );
    summary.insert(
        "versions".into(),
        json!({ "subgauss-core": subgauss_core::VERSION, "subgauss-cli": env!("CARGO_PKG_VERSION") }),
    );
    summary.insert("checks".into(), to_value(&checks.0.iter().cloned().collect::<BTreeMap<_, _>>()));
    summary.insert("pass".into(), json!(failed_check.is_none()));
    summary.insert("failed_check".into(), json!(failed_check));
    out.json("summary.json", &Value::Object(summary))?;
    Ok(Outcome { pass: failed_check.is_none(), failed_check, files: out.into_files() })
}

#[derive(Debug, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct FerniqueParams {
    norm: Norm,
    /// Candidate truncation radii for the TV bound; defaults to the atom norms.
    radii: Option<Vec<f64>>,
}

fn fernique(cfg: &ExperimentConfig, out: &mut OutputDir, checks: &mut Checks, result: &mut Map<String, Value>) -> Result<Value> {
    let p: FerniqueParams = cfg.parameters()?;
    let law: DiscreteLaw = cfg.read_input("law")?;
    let mu: MeasureOnT = cfg.read_input("measure")?;
    let plan = fernique_functional(&law, &mu)?;
    checks.add("dual_certificate", true);
    result.insert("value".into(), json!(plan.value));
    result.insert("plan".into(), to_value(&plan));

    if let Some(other) = cfg.read_optional::<DiscreteLaw>("law_b")? {
        let r = continuity_gap_w1(&law, &other, &mu, p.norm)?;
        checks.add("continuity_w1", r.pass);
        result.insert("continuity_w1".into(), to_value(&r));
    }
    if let Some(nu) = cfg.read_optional::<MeasureOnT>("measure_b")? {
        let radii = p.radii.clone().unwrap_or_else(|| {
            let mut r: Vec<f64> = law.atoms().iter().map(|a| p.norm.of(a)).collect();
            r.push(0.0);
            r.sort_by(f64::total_cmp);
            r.dedup();
            r
        });
        let (radius, _) = best_truncation_radius(&law, &mu, &nu, &radii, p.norm)?;
        let r = continuity_gap_tv(&law, &mu, &nu, radius, p.norm)?;
        checks.add("continuity_tv", r.pass);
        result.insert("continuity_tv".into(), to_value(&r));
    }

    let labels = mu.index().labels();
    let mut rows = Vec::new();
    for k in 0..law.num_atoms() {
        for (t, label) in labels.iter().enumerate() {
            let mass = plan.plan[(k, t)];
            if mass > 0.0 {
                rows.push(vec![k.to_string(), label.clone(), fmt_f64(mass)]);
            }
        }
    }
    out.table("plan.csv", &["atom", "t", "mass"], &rows)?;
    Ok(to_value(&p))
}

#[derive(Debug, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct IdentityParams {
    /// Shift vector; zeros when absent.
    m: Option<Vec<f64>>,
}

fn identity(cfg: &ExperimentConfig, checks: &mut Checks, result: &mut Map<String, Value>) -> Result<Value> {
    let mut p: IdentityParams = cfg.parameters()?;
    let law: DiscreteLaw = cfg.read_input("law")?;
    let m = p.m.get_or_insert_with(|| vec![0.0; law.dim()]).clone();
    let report = sup_decomposition_check(&law, &m)?;
    checks.add("sup_decomposition", report.pass);
    result.insert("argmax_measure".into(), to_value(&argmax_measure(&law, &m)?));
    result.insert("report".into(), to_value(&report));
    Ok(to_value(&p))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct TensorizeParams {
    /// Common denominator of the measure; inferred when absent.
    k: Option<u64>,
    ns: Vec<usize>,
    samples: usize,
    cap: u128,
    stationarity_trials: usize,
}

impl Default for TensorizeParams {
    fn default() -> Self {
        TensorizeParams { k: None, ns: vec![1, 2, 4], samples: 100_000, cap: DEFAULT_CAP, stationarity_trials: 100 }
    }
}

fn infer_denominator(mu: &MeasureOnT) -> Result<u64> {
    (1..=1000u64)
        .find(|&k| mu.probs().iter().all(|p| (p * k as f64 - (p * k as f64).round()).abs() <= 1e-9))
        .ok_or_else(|| Error::InvalidInput("measure has no denominator up to 1000; set `k`".into()).into())
}

fn tensorize(cfg: &ExperimentConfig, out: &mut OutputDir, checks: &mut Checks, result: &mut Map<String, Value>) -> Result<Value> {
    let mut p: TensorizeParams = cfg.parameters()?;
    let source: ProcessSource = cfg.read_input("source")?;
    let mu: MeasureOnT = cfg.read_input("measure")?;
    let k = match p.k {
        Some(k) => k,
        None => infer_denominator(&mu)?,
    };
    p.k = Some(k);
    let table = convergence_study(&source, &mu, k, &p.ns, p.samples, cfg.seed(), p.cap)?;
    checks.add("nondecreasing_estimates", table.nondecreasing);

    if let ProcessSource::Gaussian(spec) = &source {
        let rational = RationalMeasure::from_measure(&mu, k)?;
        let largest = p
            .ns
            .iter()
            .copied()
            .filter(|&n| class_size(&rational, n) <= COV_CAP as u128 && class_size(&rational, n) >= 2)
            .max();
        if let (Some(n), true) = (largest, spec.is_centered()) {
            let class = enumerate_sequence_class(&rational, n, p.cap)?;
            let tensor = tensor_gaussian_cov(spec, &class)?;
            let r = stationarity_check(&tensor, p.stationarity_trials, derive_seed(cfg.seed(), u64::MAX))?;
            checks.add("tensor_stationarity", r.pass);
            result.insert("stationarity".into(), to_value(&r));
        }
    }

    out.text("convergence.csv", &table.to_csv())?;
    let plot: Vec<PlotRow> = table
        .rows
        .iter()
        .map(|r| PlotRow { x: r.n as f64, y: r.estimate.mean, y_lo: r.estimate.ci_lo, y_hi: r.estimate.ci_hi })
        .collect();
    out.plot("plot.csv", &plot)?;
    result.insert("study".into(), to_value(&table));
    Ok(to_value(&p))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ChainingParams {
    /// `cyclic` or `symmetric`; ignored when `generators` is set.
    action: String,
    generators: Option<Vec<Vec<usize>>>,
    samples: usize,
    /// Scales for the covering table; the dyadic ladder when absent.
    scales: Option<Vec<f64>>,
}

impl Default for ChainingParams {
    fn default() -> Self {
        ChainingParams { action: "cyclic".into(), generators: None, samples: 100_000, scales: None }
    }
}

fn chaining(cfg: &ExperimentConfig, out: &mut OutputDir, checks: &mut Checks, result: &mut Map<String, Value>) -> Result<Value> {
    let p: ChainingParams = cfg.parameters()?;
    let spec: GaussianSpec = cfg.read_input("spec")?;
    let law_x = match cfg.read_optional::<DiscreteLaw>("law")? {
        Some(l) => ProcessSource::Law(l),
        None => ProcessSource::Gaussian(spec.clone()),
    };
    let n = spec.dim();
    let action = match (&p.generators, p.action.as_str()) {
        (Some(g), _) => GroupAction::new(n, g.clone())?,
        (None, "cyclic") => GroupAction::cyclic(n)?,
        (None, "symmetric") => GroupAction::symmetric(n)?,
        (None, other) => return Err(Error::InvalidInput(format!("unknown action `{other}`")).into()),
    };
    let report = match fernique_sandwich_check(&law_x, &spec, &action, p.samples, cfg.seed()) {
        Ok(r) => r,
        Err(e @ (Error::NotTransitive { .. } | Error::NotInvariant { .. })) => {
            checks.add("stationarity", false);
            result.insert("error".into(), json!(e.to_string()));
            return Ok(to_value(&p));
        }
        Err(e @ Error::PreconditionFailed(_)) => {
            checks.add("domination", false);
            result.insert("error".into(), json!(e.to_string()));
            return Ok(to_value(&p));
        }
        Err(e) => return Err(e.into()),
    };
    checks.add("stationarity", report.stationarity.pass);
    checks.add("domination", report.domination.pass);
    checks.add("sandwich", report.pass);

    let scales = p.scales.clone().unwrap_or_else(|| report.entropy.scales.clone());
    if !scales.is_empty() {
        let profile = covering_profile(&spec.natural_metric()?, &scales)?;
        out.text("covering.csv", &profile.to_csv())?;
    }
    let mut entropy = to_value(&report.entropy);
    if report.entropy.method == CoverMethod::Greedy {
        entropy["note"] = json!("greedy covers: values are upper bounds");
    }
    result.insert("sandwich".into(), to_value(&report));
    result.insert("entropy".into(), entropy);
    Ok(to_value(&p))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CompareParams {
    c_grid: Vec<f64>,
    family: WitnessFamily,
    /// `auto`, `quadrature` or `monte_carlo`.
    method: String,
    samples: usize,
    /// Nodes per axis for `quadrature`.
    points: Option<usize>,
}

impl Default for CompareParams {
    fn default() -> Self {
        CompareParams {
            c_grid: (0..=50).map(|i| 0.5 + 0.05 * i as f64).collect(),
            family: WitnessFamily::default(),
            method: "auto".into(),
            samples: 200_000,
            points: None,
        }
    }
}

fn compare(cfg: &ExperimentConfig, out: &mut OutputDir, checks: &mut Checks, result: &mut Map<String, Value>) -> Result<Value> {
    let p: CompareParams = cfg.parameters()?;
    let law: DiscreteLaw = cfg.read_input("law")?;
    let n = law.dim();
    let method = match p.method.as_str() {
        "auto" => GaussMethod::auto(n, p.samples),
        "quadrature" => match (p.points, GaussMethod::auto(n, p.samples)) {
            (Some(points), _) => GaussMethod::Quadrature { points },
            (None, m @ GaussMethod::Quadrature { .. }) => m,
            (None, _) => return Err(Error::InvalidInput("quadrature above dimension 3 needs `points`".into()).into()),
        },
        "monte_carlo" => GaussMethod::MonteCarlo { samples: p.samples },
        other => return Err(Error::InvalidInput(format!("unknown method `{other}`")).into()),
    };
    let report = match estimate_constant(&law, &p.family, &p.c_grid, method, cfg.seed()) {
        Ok(r) => r,
        Err(e @ Error::PreconditionFailed(_)) => {
            checks.add("preconditions", false);
            result.insert("error".into(), json!(e.to_string()));
            return Ok(to_value(&p));
        }
        Err(e) => return Err(e.into()),
    };
    checks.add("monotone_in_c", report.monotone);
    checks.add("jensen_lower_bound", report.jensen_ok);
    checks.add("dominated_on_grid", report.smallest_passing_c.is_some());

    out.text("constant.csv", &report.to_csv())?;
    let plot: Vec<PlotRow> = report
        .rows
        .iter()
        .map(|r| PlotRow {
            x: r.c,
            y: r.worst_gap,
            y_lo: r.worst_gap - 3.0 * r.worst_stderr,
            y_hi: r.worst_gap + 3.0 * r.worst_stderr,
        })
        .collect();
    out.plot("plot.csv", &plot)?;
    out.json("witnesses.json", &json!({ "family": p.family, "witnesses": p.family.generate(&law)? }))?;
    result.insert("constant".into(), to_value(&report));
    Ok(to_value(&p))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct StrassenParams {
    c: Vec<f64>,
    /// Gaussian grid nodes per axis; 41 in one dimension, 11 otherwise.
    grid_points: Option<usize>,
    tol: f64,
    bisect: bool,
    lo: f64,
    iterations: usize,
}

impl Default for StrassenParams {
    fn default() -> Self {
        StrassenParams {
            c: vec![0.5, 1.0, 2.0, 4.0],
            grid_points: None,
            tol: DEFAULT_FEASIBILITY_TOL,
            bisect: true,
            lo: 1e-3,
            iterations: 40,
        }
    }
}

fn strassen(cfg: &ExperimentConfig, out: &mut OutputDir, checks: &mut Checks, result: &mut Map<String, Value>) -> Result<Value> {
    let mut p: StrassenParams = cfg.parameters()?;
    let law: DiscreteLaw = cfg.read_input("law")?;
    let points = *p.grid_points.get_or_insert(if law.dim() == 1 { 41 } else { 11 });
    let grid = gaussian_grid(law.index().clone(), points, DEFAULT_CLIP)?;
    if law.num_atoms() * grid.num_atoms() > 50_000 {
        return Err(Error::InvalidInput(format!(
            "coupling LP with {} x {} cells is too large",
            law.num_atoms(),
            grid.num_atoms()
        ))
        .into());
    }
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut upward = true;
    for &c in &p.c {
        let r = strassen_feasibility(&law, &grid, c, p.tol)?;
        let doubled = if r.feasible { Some(mix_with_product(&law, &grid, &r, 2.0 * c)?) } else { None };
        upward &= doubled.as_ref().is_none_or(|d| d.feasible);
        rows.push(vec![
            fmt_f64(c),
            fmt_f64(r.gap),
            r.feasible.to_string(),
            doubled.as_ref().map_or(String::new(), |d| fmt_f64(d.gap)),
            doubled.as_ref().map_or(String::new(), |d| d.feasible.to_string()),
        ]);
        entries.push(json!({ "c": c, "gap": r.gap, "feasible": r.feasible, "mixed_at_2c": doubled }));
    }
    checks.add("upward_closed", upward);
    if p.bisect {
        let hi = p.c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_c = match minimal_feasible_c(&law, &grid, p.lo, hi, p.tol, p.iterations) {
            Ok(r) => Some(r.c),
            Err(Error::PreconditionFailed(_)) => None,
            Err(e) => return Err(e.into()),
        };
        result.insert("minimal_c".into(), json!(min_c));
    }
    out.table("strassen.csv", &["c", "gap", "feasible", "gap_at_2c", "feasible_at_2c"], &rows)?;
    result.insert("results".into(), json!(entries));
    Ok(to_value(&p))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SampleParams {
    m: usize,
}

impl Default for SampleParams {
    fn default() -> Self {
        SampleParams { m: 1000 }
    }
}

fn sample(cfg: &ExperimentConfig, out: &mut OutputDir, checks: &mut Checks, result: &mut Map<String, Value>) -> Result<Value> {
    let p: SampleParams = cfg.parameters()?;
    let source: ProcessSource = cfg.read_input("source")?;
    let batch = sample_source(&source, p.m, cfg.seed())?;
    if let ProcessSource::Gaussian(spec) = &source {
        let x_grid: Vec<f64> = (1..=12).map(|i| 0.25 * i as f64).collect();
        let r = subgaussian_increment_check(IncrementSource::Batch(&batch), &spec.natural_metric()?, &x_grid)?;
        checks.add("subgaussian_increments", r.pass);
        result.insert("increments".into(), to_value(&r));
    }
    let header: Vec<&str> = source.index().labels().iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = batch.rows().map(|r| r.iter().map(|v| fmt_f64(*v)).collect()).collect();
    out.table("samples.csv", &header, &rows)?;
    out.json("empirical_law.json", &empirical_law(&batch)?)?;
    result.insert("mean".into(), json!(batch.mean()));
    Ok(to_value(&p))
}
