use crate::error::{Error, Result};
use crate::model::DiscreteLaw;
use crate::rng::stream_rng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Largest law for which the canonical family includes the atom witness.
pub const ATOM_WITNESS_MAX: usize = 256;

/// `f(x) = max_i (<slopes[i], x> + offsets[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MaxAffineRepr")]
pub struct MaxAffine {
    slopes: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

#[derive(Deserialize)]
struct MaxAffineRepr {
    slopes: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

impl TryFrom<MaxAffineRepr> for MaxAffine {
    type Error = Error;
    fn try_from(r: MaxAffineRepr) -> Result<Self> {
        MaxAffine::new(r.slopes, r.offsets)
    }
}

impl MaxAffine {
    pub fn new(slopes: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        if slopes.is_empty() || slopes.len() != offsets.len() {
            return Err(Error::InvalidInput(format!(
                "need a matching nonempty list of pieces, got {} slopes and {} offsets",
                slopes.len(),
                offsets.len()
            )));
        }
        let n = slopes[0].len();
        if n == 0 || slopes.iter().any(|s| s.len() != n) {
            return Err(Error::InvalidInput("slopes must share one positive dimension".into()));
        }
        if slopes.iter().flatten().chain(&offsets).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite witness coefficient".into()));
        }
        Ok(MaxAffine { slopes, offsets })
    }

    pub fn affine(slope: Vec<f64>, offset: f64) -> Result<Self> {
        Self::new(vec![slope], vec![offset])
    }

    /// `|<v, x>|`.
    pub fn abs_along(v: Vec<f64>) -> Result<Self> {
        let neg = v.iter().map(|a| -a).collect();
        Self::new(vec![v, neg], vec![0.0, 0.0])
    }

    pub fn dim(&self) -> usize {
        self.slopes[0].len()
    }

    pub fn pieces(&self) -> usize {
        self.slopes.len()
    }

    pub fn slopes(&self) -> &[Vec<f64>] {
        &self.slopes
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.slopes
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `f(c x)`.
    pub fn eval_scaled(&self, c: f64, x: &[f64]) -> f64 {
        self.slopes
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| c * a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn expect(&self, law: &DiscreteLaw) -> f64 {
        law.iter().map(|(x, w)| w * self.eval(x)).sum()
    }
}

/// Replayable description of a witness family.
///
/// The canonical part holds `x_t`, `-x_t`, `|x_t|`, `max_t x_t`,
/// `max_k <a_k, x>` over the atoms `a_k` of the law (when there are at most
/// [`ATOM_WITNESS_MAX`] of them), and `|<v, x>|` for
/// `n` random unit vectors `v`. Each random witness has `pieces` slopes
/// uniform on the unit sphere and offsets uniform on the range of atom
/// values. Witness `i` draws from its own stream of `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WitnessFamily {
    pub canonical: bool,
    pub random: usize,
    pub pieces: usize,
    pub seed: u64,
    pub extra: Vec<MaxAffine>,
}

impl Default for WitnessFamily {
    fn default() -> Self {
        WitnessFamily { canonical: true, random: 32, pieces: 3, seed: 0, extra: Vec::new() }
    }
}

fn unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

impl WitnessFamily {
    /// Only the given witnesses.
    pub fn explicit(witnesses: Vec<MaxAffine>) -> Self {
        WitnessFamily { canonical: false, random: 0, pieces: 1, seed: 0, extra: witnesses }
    }

    pub fn describe(&self) -> String {
        format!(
            "canonical={} random={}x{} seed={} extra={}",
            self.canonical,
            self.random,
            self.pieces,
            self.seed,
            self.extra.len()
        )
    }

    pub fn generate(&self, law: &DiscreteLaw) -> Result<Vec<MaxAffine>> {
        let n = law.dim();
        if self.random > 0 && self.pieces == 0 {
            return Err(Error::InvalidInput("random witnesses need at least one piece".into()));
        }
        if let Some(w) = self.extra.iter().find(|w| w.dim() != n) {
            return Err(Error::IndexMismatch(format!("witness of dimension {} for a law on {n} points", w.dim())));
        }
        let mut out = Vec::new();
        if self.canonical {
            for t in 0..n {
                let mut e = vec![0.0; n];
                e[t] = 1.0;
                out.push(MaxAffine::affine(e.clone(), 0.0)?);
                out.push(MaxAffine::affine(e.iter().map(|a| -a).collect(), 0.0)?);
                out.push(MaxAffine::abs_along(e)?);
            }
            let coords = (0..n).map(|t| (0..n).map(|s| if s == t { 1.0 } else { 0.0 }).collect()).collect();
            out.push(MaxAffine::new(coords, vec![0.0; n])?);
            if law.num_atoms() <= ATOM_WITNESS_MAX {
                out.push(MaxAffine::new(law.atoms().to_vec(), vec![0.0; law.num_atoms()])?);
            }
            let mut rng = stream_rng(self.seed, u64::MAX);
            for _ in 0..n {
                out.push(MaxAffine::abs_along(unit_vector(&mut rng, n))?);
            }
        }
        let (lo, hi) = law
            .atoms()
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        for i in 0..self.random {
            let mut rng = stream_rng(self.seed, i as u64);
            let slopes = (0..self.pieces).map(|_| unit_vector(&mut rng, n)).collect();
            let offsets = (0..self.pieces)
                .map(|_| if hi > lo { rng.random_range(lo..=hi) } else { lo })
                .collect();
            out.push(MaxAffine::new(slopes, offsets)?);
        }
        out.extend(self.extra.iter().cloned());
        if out.is_empty() {
            return Err(Error::InvalidInput("witness family is empty".into()));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IndexSet;

    #[test]
    fn evaluation() {
        let f = MaxAffine::abs_along(vec![1.0, -2.0]).unwrap();
        assert_eq!(f.eval(&[1.0, 1.0]), 1.0);
        assert_eq!(f.eval_scaled(3.0, &[1.0, 1.0]), 3.0);
        assert!(MaxAffine::new(vec![], vec![]).is_err());
        assert!(MaxAffine::new(vec![vec![1.0], vec![1.0, 2.0]], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn family_is_reproducible_and_round_trips() {
        let law = DiscreteLaw::rademacher(IndexSet::numbered(2).unwrap()).unwrap();
        let fam = WitnessFamily { random: 5, seed: 9, ..Default::default() };
        let a = fam.generate(&law).unwrap();
        assert_eq!(a, fam.generate(&law).unwrap());
        assert_eq!(a.len(), 3 * 2 + 2 + 2 + 5);
        let json = serde_json::to_string(&fam).unwrap();
        let back: WitnessFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(back, fam);
        let bad = r#"{"slopes": [[1.0]], "offsets": []}"#;
        assert!(serde_json::from_str::<MaxAffine>(bad).is_err());
    }
}
