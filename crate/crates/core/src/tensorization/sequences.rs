use crate::error::{Error, Result};
use crate::model::{IndexSet, MeasureOnT};
use serde::Serialize;
use std::collections::HashMap;

/// Default bound on the number of sequences materialized.
pub const DEFAULT_CAP: u128 = 100_000;

/// A probability measure on `T` whose masses are multiples of `1/K`,
/// stored as integer counts summing to `K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RationalMeasure {
    index: IndexSet,
    counts: Vec<u64>,
    k: u64,
}

impl RationalMeasure {
    pub fn new(index: IndexSet, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != index.len() {
            return Err(Error::InvalidInput(format!(
                "{} counts for {} indices",
                counts.len(),
                index.len()
            )));
        }
        let k: u64 = counts.iter().sum();
        if k == 0 {
            return Err(Error::InvalidInput("counts must not all be zero".into()));
        }
        Ok(RationalMeasure { index, counts, k })
    }

    /// Writes `mu` with denominator `k`; every `k mu_t` must be an integer
    /// up to 1e-9.
    pub fn from_measure(mu: &MeasureOnT, k: u64) -> Result<Self> {
        let counts = mu
            .probs()
            .iter()
            .map(|p| {
                let c = p * k as f64;
                let r = c.round();
                if (c - r).abs() > 1e-9 {
                    Err(Error::InvalidInput(format!("mass {p} is not a multiple of 1/{k}")))
                } else {
                    Ok(r as u64)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(mu.index().clone(), counts)
    }

    pub fn index(&self) -> &IndexSet {
        &self.index
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn to_measure(&self) -> MeasureOnT {
        let probs = self.counts.iter().map(|&c| c as f64 / self.k as f64).collect();
        MeasureOnT::new(self.index.clone(), probs).expect("counts sum to k")
    }
}

/// Multinomial coefficient `(sum c)! / prod c!`, or `None` on overflow.
pub fn multinomial(counts: &[u64]) -> Option<u128> {
    let mut total: u128 = 0;
    let mut acc: u128 = 1;
    for &c in counts {
        // acc *= C(total + c, c), built one factor at a time so each
        // intermediate is itself a binomial coefficient
        for j in 1..=c as u128 {
            total += 1;
            acc = acc.checked_mul(total)? / j;
        }
    }
    Some(acc)
}

/// `|T_N(mu)|`, saturating at `u128::MAX`.
pub fn class_size(mu: &RationalMeasure, n: usize) -> u128 {
    let reps: Vec<u64> = mu.counts.iter().map(|&c| c * n as u64).collect();
    multinomial(&reps).unwrap_or(u128::MAX)
}

/// The class `T_N(mu)` with its sequences in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceClass {
    base: RationalMeasure,
    n: usize,
    sequences: Vec<Vec<usize>>,
}

impl SequenceClass {
    pub fn base(&self) -> &RationalMeasure {
        &self.base
    }

    /// The replication factor `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Sequence length `M = N K`.
    pub fn len_per_sequence(&self) -> usize {
        self.n * self.base.k as usize
    }

    pub fn size(&self) -> usize {
        self.sequences.len()
    }

    pub fn sequences(&self) -> &[Vec<usize>] {
        &self.sequences
    }

    pub fn label(&self, s: usize) -> String {
        let labels = self.base.index.labels();
        let parts: Vec<&str> = self.sequences[s].iter().map(|&t| labels[t].as_str()).collect();
        format!("({})", parts.join(","))
    }

    /// Index set whose labels name the sequences.
    pub fn index_set(&self) -> IndexSet {
        IndexSet::new((0..self.size()).map(|s| self.label(s))).expect("sequences are distinct")
    }

    pub fn positions(&self) -> HashMap<&[usize], usize> {
        self.sequences.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect()
    }
}

/// Rearranges `a` into the next larger permutation; false at the last one.
fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// All distinct arrangements of the multiset with `N counts_t` copies of
/// each `t`, in lexicographic order. Fails with `ClassTooLarge` when the
/// multinomial count exceeds `cap`.
pub fn enumerate_sequence_class(mu: &RationalMeasure, n: usize, cap: u128) -> Result<SequenceClass> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    let size = class_size(mu, n);
    if size > cap {
        return Err(Error::ClassTooLarge { size, cap });
    }
    let mut current: Vec<usize> = mu
        .counts
        .iter()
        .enumerate()
        .flat_map(|(t, &c)| std::iter::repeat_n(t, c as usize * n))
        .collect();
    let mut sequences = Vec::with_capacity(size as usize);
    loop {
        sequences.push(current.clone());
        if !next_permutation(&mut current) {
            break;
        }
    }
    debug_assert_eq!(sequences.len() as u128, size);
    Ok(SequenceClass { base: mu.clone(), n, sequences })
}
