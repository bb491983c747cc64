//! Finite-index processes: the index set `T`, discrete laws on `R^T`,
//! centered Gaussian specifications, metrics and probability vectors on `T`.
//!
//! All vectors and matrices are indexed in the order of the owning
//! [`IndexSet`]. Values are immutable after construction.

mod checks;
mod sampling;

pub use checks::{centeredness_check, subgaussian_increment_check, CheckReport, IncrementSource};
pub use sampling::{empirical_law, sample_gaussian, sample_source, ProcessSampler};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Tolerance for structural equalities (weight sums, symmetry).
pub const STRUCT_TOL: f64 = 1e-12;
/// Relative tolerance on negative eigenvalues when checking PSD.
pub const PSD_TOL: f64 = 1e-10;
/// Tolerance for the triangle inequality.
pub const TRIANGLE_TOL: f64 = 1e-9;

/// The finite index set `T`, as an ordered list of distinct labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct IndexSet {
    labels: Vec<String>,
}

impl IndexSet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidInput("index set must be nonempty".into()));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate index label {l:?}")));
            }
        }
        Ok(IndexSet { labels })
    }

    /// Labels `"0"`, `"1"`, ..., `"n-1"`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Errors unless `other` is the same index set.
    pub fn ensure_same(&self, other: &IndexSet) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::IndexMismatch(format!(
                "{:?} vs {:?}",
                abbreviate(&self.labels),
                abbreviate(&other.labels)
            )))
        }
    }
}

fn abbreviate(labels: &[String]) -> String {
    if labels.len() <= 6 {
        labels.join(",")
    } else {
        format!("{},... ({} labels)", labels[..6].join(","), labels.len())
    }
}

impl TryFrom<Vec<String>> for IndexSet {
    type Error = Error;
    fn try_from(v: Vec<String>) -> Result<Self> {
        IndexSet::new(v)
    }
}

impl From<IndexSet> for Vec<String> {
    fn from(i: IndexSet) -> Self {
        i.labels
    }
}

fn check_probability_vector(p: &[f64], what: &str) -> Result<()> {
    if let Some(w) = p.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidInput(format!("{what}: entry {w} is negative or not finite")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > STRUCT_TOL {
        return Err(Error::InvalidInput(format!("{what}: entries sum to {s}, not 1")));
    }
    Ok(())
}

/// A finitely supported probability law on `R^T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawRepr", into = "LawRepr")]
pub struct DiscreteLaw {
    index: IndexSet,
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LawRepr {
    index: IndexSet,
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<LawRepr> for DiscreteLaw {
    type Error = Error;
    fn try_from(r: LawRepr) -> Result<Self> {
        DiscreteLaw::new(r.index, r.atoms, r.weights)
    }
}

impl From<DiscreteLaw> for LawRepr {
    fn from(l: DiscreteLaw) -> Self {
        LawRepr { index: l.index, atoms: l.atoms, weights: l.weights }
    }
}

impl DiscreteLaw {
    pub fn new(index: IndexSet, atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("law needs at least one atom".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let n = index.len();
        for (k, a) in atoms.iter().enumerate() {
            if a.len() != n {
                return Err(Error::InvalidInput(format!("atom {k} has length {}, expected {n}", a.len())));
            }
            if a.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("atom {k} has a non-finite coordinate")));
            }
        }
        check_probability_vector(&weights, "law weights")?;
        Ok(DiscreteLaw { index, atoms, weights })
    }

    /// Equal weights on the given atoms (repeats allowed).
    pub fn uniform(index: IndexSet, atoms: Vec<Vec<f64>>) -> Result<Self> {
        let w = 1.0 / atoms.len().max(1) as f64;
        let weights = vec![w; atoms.len()];
        Self::new(index, atoms, weights)
    }

    pub fn point_mass(index: IndexSet, x: Vec<f64>) -> Result<Self> {
        Self::new(index, vec![x], vec![1.0])
    }

    pub fn index(&self) -> &IndexSet {
        &self.index
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.atoms.iter().map(Vec::as_slice).zip(self.weights.iter().copied())
    }

    /// `E[X]`.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for (a, w) in self.iter() {
            for (mi, ai) in m.iter_mut().zip(a) {
                *mi += w * ai;
            }
        }
        m
    }

    /// Law of `X + v`.
    pub fn shifted(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.dim() {
            return Err(Error::InvalidInput("shift has wrong length".into()));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| a.iter().zip(v).map(|(x, y)| x + y).collect())
            .collect();
        Ok(DiscreteLaw { index: self.index.clone(), atoms, weights: self.weights.clone() })
    }

    /// Law of `X - E[X]`.
    pub fn centered(&self) -> Self {
        let m: Vec<f64> = self.mean().into_iter().map(|x| -x).collect();
        self.shifted(&m).expect("mean has the law's dimension")
    }

    /// Law of `s * X`.
    pub fn scaled(&self, s: f64) -> Self {
        let atoms = self.atoms.iter().map(|a| a.iter().map(|x| s * x).collect()).collect();
        DiscreteLaw { index: self.index.clone(), atoms, weights: self.weights.clone() }
    }

    /// Product law of independent coordinates, each uniform on `{-1, +1}`.
    pub fn rademacher(index: IndexSet) -> Result<Self> {
        let n = index.len();
        if n > 20 {
            return Err(Error::InvalidInput("Rademacher law limited to n <= 20".into()));
        }
        let atoms = (0..1usize << n)
            .map(|mask| (0..n).map(|t| if mask >> t & 1 == 1 { 1.0 } else { -1.0 }).collect())
            .collect();
        Self::uniform(index, atoms)
    }
}

/// A Gaussian law `N(mean, cov)` on `R^T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct GaussianSpec {
    index: IndexSet,
    mean: Vec<f64>,
    cov: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    index: Option<IndexSet>,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

impl TryFrom<SpecRepr> for GaussianSpec {
    type Error = Error;
    fn try_from(r: SpecRepr) -> Result<Self> {
        let n = r.mean.len();
        let index = match r.index {
            Some(i) => i,
            None => IndexSet::numbered(n)?,
        };
        let cov = matrix_from_rows(&r.cov, n, "cov")?;
        GaussianSpec::new(index, r.mean, cov)
    }
}

impl From<GaussianSpec> for SpecRepr {
    fn from(s: GaussianSpec) -> Self {
        SpecRepr { index: Some(s.index), mean: s.mean, cov: matrix_rows(&s.cov) }
    }
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], n: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!("{what} must be {n}x{n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Scale used for relative PSD / symmetry tolerances.
fn matrix_scale(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

impl GaussianSpec {
    pub fn new(index: IndexSet, mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = index.len();
        if mean.len() != n || cov.nrows() != n || cov.ncols() != n {
            return Err(Error::InvalidInput(format!("Gaussian spec dimensions must match n = {n}")));
        }
        if mean.iter().chain(cov.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("Gaussian spec has non-finite entries".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > STRUCT_TOL {
                    return Err(Error::InvalidInput(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        let sym = (&cov + cov.transpose()) * 0.5;
        let min_eig = SymmetricEigen::new(sym.clone())
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &x| a.min(x));
        let norm = matrix_scale(&sym) * n as f64;
        if min_eig < -PSD_TOL * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::NonPsdCovariance { value: min_eig });
        }
        Ok(GaussianSpec { index, mean, cov: sym })
    }

    pub fn centered(index: IndexSet, cov: DMatrix<f64>) -> Result<Self> {
        let n = index.len();
        Self::new(index, vec![0.0; n], cov)
    }

    /// `N(0, I_n)` with numbered labels.
    pub fn standard(n: usize) -> Result<Self> {
        Self::centered(IndexSet::numbered(n)?, DMatrix::identity(n, n))
    }

    /// Stationary covariance on the cycle `Z_n`:
    /// `cov(t, s) = sum_f spectrum[f] cos(2 pi f (t - s) / n)`.
    /// Nonnegative spectra give PSD circulant matrices.
    pub fn circulant(index: IndexSet, spectrum: &[f64]) -> Result<Self> {
        if spectrum.iter().any(|x| *x < 0.0 || !x.is_finite()) {
            return Err(Error::InvalidInput("circulant spectrum must be nonnegative".into()));
        }
        let n = index.len();
        let row: Vec<f64> = (0..n)
            .map(|h| {
                spectrum
                    .iter()
                    .enumerate()
                    .map(|(f, w)| w * (2.0 * std::f64::consts::PI * (f * h) as f64 / n as f64).cos())
                    .sum()
            })
            .collect();
        let cov = DMatrix::from_fn(n, n, |i, j| row[(j + n - i) % n]);
        Self::centered(index, cov)
    }

    pub fn index(&self) -> &IndexSet {
        &self.index
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn is_centered(&self) -> bool {
        self.mean.iter().all(|m| *m == 0.0)
    }

    /// Symmetric square root `S` with `S S = cov`; negative round-off
    /// eigenvalues are clipped to zero, so rank-deficient covariances work.
    pub fn sqrt_factor(&self) -> DMatrix<f64> {
        let eig = SymmetricEigen::new(self.cov.clone());
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let v = &eig.eigenvectors;
        v * DMatrix::from_diagonal(&roots) * v.transpose()
    }

    /// The natural metric `d(t, s) = ||G_t - G_s||_2`.
    pub fn natural_metric(&self) -> Result<MetricOnT> {
        natural_metric(self)
    }
}

/// `d(t, s) = sqrt(cov_tt + cov_ss - 2 cov_ts)`.
pub fn natural_metric(spec: &GaussianSpec) -> Result<MetricOnT> {
    let dist = metric_from_covariance(spec.cov())?;
    Ok(MetricOnT { index: spec.index.clone(), dist })
}

pub(crate) fn metric_from_covariance(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = cov.nrows();
    let mut dist = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = cov[(i, i)] + cov[(j, j)] - 2.0 * cov[(i, j)];
            if r < -PSD_TOL {
                return Err(Error::NonPsdCovariance { value: r });
            }
            let d = r.max(0.0).sqrt();
            dist[(i, j)] = d;
            dist[(j, i)] = d;
        }
    }
    Ok(dist)
}

/// A (pseudo)metric on `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MetricRepr", into = "MetricRepr")]
pub struct MetricOnT {
    index: IndexSet,
    dist: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct MetricRepr {
    index: IndexSet,
    dist: Vec<Vec<f64>>,
}

impl TryFrom<MetricRepr> for MetricOnT {
    type Error = Error;
    fn try_from(r: MetricRepr) -> Result<Self> {
        let n = r.index.len();
        let dist = matrix_from_rows(&r.dist, n, "dist")?;
        MetricOnT::new(r.index, dist)
    }
}

impl From<MetricOnT> for MetricRepr {
    fn from(m: MetricOnT) -> Self {
        MetricRepr { index: m.index, dist: matrix_rows(&m.dist) }
    }
}

impl MetricOnT {
    /// Validates symmetry, zero diagonal, nonnegativity and the triangle
    /// inequality (within [`TRIANGLE_TOL`]).
    pub fn new(index: IndexSet, dist: DMatrix<f64>) -> Result<Self> {
        let n = index.len();
        if dist.nrows() != n || dist.ncols() != n {
            return Err(Error::InvalidInput(format!("distance matrix must be {n}x{n}")));
        }
        for i in 0..n {
            if dist[(i, i)] != 0.0 {
                return Err(Error::InvalidInput(format!("d({i},{i}) must be 0")));
            }
            for j in 0..n {
                let d = dist[(i, j)];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidInput(format!("d({i},{j}) = {d} is invalid")));
                }
                if (d - dist[(j, i)]).abs() > STRUCT_TOL {
                    return Err(Error::InvalidInput(format!("distance not symmetric at ({i},{j})")));
                }
            }
        }
        let m = MetricOnT { index, dist };
        if let Some((a, b, c)) = m.triangle_violation(TRIANGLE_TOL) {
            return Err(Error::InvalidInput(format!("triangle inequality fails on ({a},{b},{c})")));
        }
        Ok(m)
    }

    /// Absolute-value metric `|x_i - x_j|` on points of the line.
    pub fn from_points_on_line(index: IndexSet, xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        Self::new(index, DMatrix::from_fn(n, n, |i, j| (xs[i] - xs[j]).abs()))
    }

    pub(crate) fn from_parts_unchecked(index: IndexSet, dist: DMatrix<f64>) -> Self {
        MetricOnT { index, dist }
    }

    /// First triple `(t, s, u)` with `d(t,u) > d(t,s) + d(s,u) + tol`.
    pub fn triangle_violation(&self, tol: f64) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.dist[(a, c)] > self.dist[(a, b)] + self.dist[(b, c)] + tol {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    pub fn index(&self) -> &IndexSet {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn dist(&self, t: usize, s: usize) -> f64 {
        self.dist[(t, s)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.dist
    }

    pub fn diameter(&self) -> f64 {
        matrix_scale(&self.dist)
    }

    /// Smallest strictly positive distance, if any.
    pub fn min_positive(&self) -> Option<f64> {
        self.dist.iter().copied().filter(|d| *d > 0.0).fold(None, |a, d| Some(a.map_or(d, |x: f64| x.min(d))))
    }
}

/// A probability vector on `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct MeasureOnT {
    index: IndexSet,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    index: Option<IndexSet>,
    probs: Vec<f64>,
}

impl TryFrom<MeasureRepr> for MeasureOnT {
    type Error = Error;
    fn try_from(r: MeasureRepr) -> Result<Self> {
        let index = match r.index {
            Some(i) => i,
            None => IndexSet::numbered(r.probs.len())?,
        };
        MeasureOnT::new(index, r.probs)
    }
}

impl From<MeasureOnT> for MeasureRepr {
    fn from(m: MeasureOnT) -> Self {
        MeasureRepr { index: Some(m.index), probs: m.probs }
    }
}

impl MeasureOnT {
    pub fn new(index: IndexSet, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != index.len() {
            return Err(Error::InvalidInput(format!(
                "measure has {} entries for {} indices",
                probs.len(),
                index.len()
            )));
        }
        check_probability_vector(&probs, "measure")?;
        Ok(MeasureOnT { index, probs })
    }

    pub fn uniform(index: IndexSet) -> Self {
        let n = index.len();
        MeasureOnT { index, probs: vec![1.0 / n as f64; n] }
    }

    pub fn dirac(index: IndexSet, t: usize) -> Result<Self> {
        let n = index.len();
        if t >= n {
            return Err(Error::InvalidInput(format!("index {t} out of range")));
        }
        let mut probs = vec![0.0; n];
        probs[t] = 1.0;
        Ok(MeasureOnT { index, probs })
    }

    pub fn index(&self) -> &IndexSet {
        &self.index
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `sum_t mu_t v_t`.
    pub fn integrate(&self, v: &[f64]) -> f64 {
        self.probs.iter().zip(v).map(|(p, x)| p * x).sum()
    }
}

/// `m` realizations of a process on `T`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    index: IndexSet,
    data: Vec<f64>,
    seed: Option<u64>,
}

impl SampleBatch {
    /// Ingest externally produced rows.
    pub fn from_rows(index: IndexSet, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("sample batch needs at least one row".into()));
        }
        let n = index.len();
        if let Some(k) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!("row {k} does not have length {n}")));
        }
        Ok(SampleBatch { index, data: rows.concat(), seed: None })
    }

    pub(crate) fn from_flat(index: IndexSet, data: Vec<f64>, seed: Option<u64>) -> Self {
        debug_assert!(!data.is_empty() && data.len().is_multiple_of(index.len()));
        SampleBatch { index, data, seed }
    }

    pub fn index(&self) -> &IndexSet {
        &self.index
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.index.len();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.index.len())
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.index.len();
        let mut m = vec![0.0; n];
        for r in self.rows() {
            for (mi, x) in m.iter_mut().zip(r) {
                *mi += x;
            }
        }
        let len = self.len() as f64;
        m.iter_mut().for_each(|x| *x /= len);
        m
    }

    /// Unbiased sample covariance.
    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.index.len();
        let mean = self.mean();
        let mut c = DMatrix::zeros(n, n);
        for r in self.rows() {
            for i in 0..n {
                let di = r[i] - mean[i];
                for j in 0..n {
                    c[(i, j)] += di * (r[j] - mean[j]);
                }
            }
        }
        c / (self.len().saturating_sub(1).max(1) as f64)
    }
}

/// A base process that can be sampled: either a finitely supported law or
/// a Gaussian specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessSource {
    Law(DiscreteLaw),
    Gaussian(GaussianSpec),
}

impl ProcessSource {
    pub fn index(&self) -> &IndexSet {
        match self {
            ProcessSource::Law(l) => l.index(),
            ProcessSource::Gaussian(g) => g.index(),
        }
    }

    pub fn dim(&self) -> usize {
        self.index().len()
    }
}

impl From<DiscreteLaw> for ProcessSource {
    fn from(l: DiscreteLaw) -> Self {
        ProcessSource::Law(l)
    }
}

impl From<GaussianSpec> for ProcessSource {
    fn from(g: GaussianSpec) -> Self {
        ProcessSource::Gaussian(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ix(n: usize) -> IndexSet {
        IndexSet::numbered(n).unwrap()
    }

    #[test]
    fn index_set_rejects_duplicates_and_empty() {
        assert!(IndexSet::new(["a", "b", "a"]).is_err());
        assert!(IndexSet::new(Vec::<String>::new()).is_err());
        assert_eq!(IndexSet::new(["a", "b"]).unwrap().position("b"), Some(1));
    }

    #[test]
    fn law_validation() {
        assert!(DiscreteLaw::new(ix(2), vec![vec![1.0, 0.0]], vec![0.9]).is_err());
        assert!(DiscreteLaw::new(ix(2), vec![vec![1.0]], vec![1.0]).is_err());
        assert!(DiscreteLaw::new(ix(1), vec![vec![1.0], vec![2.0]], vec![1.5, -0.5]).is_err());
        let l = DiscreteLaw::new(ix(2), vec![vec![1.0, -1.0], vec![-1.0, 1.0]], vec![0.5, 0.5]).unwrap();
        assert_eq!(l.mean(), vec![0.0, 0.0]);
    }

    #[test]
    fn natural_metric_examples() {
        let d = GaussianSpec::standard(2).unwrap().natural_metric().unwrap();
        assert_eq!(d.dist(0, 1), 2f64.sqrt());
        assert_eq!(d.dist(0, 0), 0.0);

        let ones = GaussianSpec::centered(ix(2), DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert_eq!(ones.natural_metric().unwrap().matrix(), &DMatrix::zeros(2, 2));

        let half = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let d = GaussianSpec::centered(ix(2), half).unwrap().natural_metric().unwrap();
        assert!((d.dist(0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_psd_covariance_is_rejected() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            GaussianSpec::centered(ix(2), bad.clone()),
            Err(Error::NonPsdCovariance { .. })
        ));
        assert!(matches!(metric_from_covariance(&bad), Err(Error::NonPsdCovariance { .. })));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(GaussianSpec::centered(ix(2), asym).is_err());
    }

    #[test]
    fn circulant_is_shift_invariant() {
        let g = GaussianSpec::circulant(ix(6), &[1.0, 0.5, 0.25]).unwrap();
        let c = g.cov();
        for i in 0..6 {
            for j in 0..6 {
                assert!((c[(i, j)] - c[((i + 1) % 6, (j + 1) % 6)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sqrt_factor_of_rank_deficient_matrix() {
        let ones = GaussianSpec::centered(ix(3), DMatrix::from_element(3, 3, 2.0)).unwrap();
        let s = ones.sqrt_factor();
        let back = &s * &s;
        assert!((back - ones.cov()).abs().max() < 1e-12);
    }

    #[test]
    fn json_schemas() {
        let l: DiscreteLaw =
            serde_json::from_str(r#"{"index":["a","b"],"atoms":[[1,-1],[-1,1]],"weights":[0.5,0.5]}"#).unwrap();
        assert_eq!(l.num_atoms(), 2);
        let g: GaussianSpec = serde_json::from_str(r#"{"mean":[0,0],"cov":[[1,0.5],[0.5,1]]}"#).unwrap();
        assert_eq!(g.index().labels(), ["0", "1"]);
        let m: MeasureOnT = serde_json::from_str(r#"{"probs":[0.25,0.75]}"#).unwrap();
        assert_eq!(m.probs(), [0.25, 0.75]);
        assert!(serde_json::from_str::<MeasureOnT>(r#"{"probs":[0.25,0.7]}"#).is_err());
        let back: DiscreteLaw = serde_json::from_str(&serde_json::to_string(&l).unwrap()).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn metric_rejects_triangle_violation() {
        let d = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0]);
        assert!(MetricOnT::new(ix(3), d).is_err());
    }
}
