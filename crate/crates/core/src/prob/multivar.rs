use std::collections::BTreeMap;

use super::{neg_p_log2_p, PMF_TOL};
use crate::error::{Error, Result};

/// A sparse joint pmf over named discrete variables.
///
/// Outcomes are tuples of symbol indices, one per variable. Marginals are
/// accumulated in ordered maps so every summation happens in the same order
/// on every run.
#[derive(Clone, Debug, Default)]
pub struct MultiPmf {
    names: Vec<String>,
    outcomes: BTreeMap<Vec<u32>, f64>,
}

impl MultiPmf {
    pub fn new(names: &[&str]) -> Result<Self> {
        let mut sorted: Vec<&str> = names.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::usage("variable names must be distinct"));
        }
        Ok(MultiPmf {
            names: names.iter().map(|s| s.to_string()).collect(),
            outcomes: BTreeMap::new(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Add probability mass to an outcome (accumulates on repeats).
    pub fn add(&mut self, outcome: &[u32], p: f64) -> Result<()> {
        if outcome.len() != self.names.len() {
            return Err(Error::usage(format!(
                "outcome has {} coordinates, pmf has {} variables",
                outcome.len(),
                self.names.len()
            )));
        }
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::usage(format!("invalid probability {p}")));
        }
        if p > 0.0 {
            *self.outcomes.entry(outcome.to_vec()).or_insert(0.0) += p;
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.outcomes.values().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.total();
        if (t - 1.0).abs() > PMF_TOL {
            return Err(Error::usage(format!("joint sums to {t}, not 1")));
        }
        Ok(())
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.outcomes.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::usage(format!("variable {name:?} is not part of this joint")))
    }

    fn indices(&self, vars: &[&str]) -> Result<Vec<usize>> {
        let mut idx = vars.iter().map(|v| self.index_of(v)).collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        Ok(idx)
    }

    fn joint_entropy_idx(&self, idx: &[usize]) -> f64 {
        if idx.is_empty() {
            return 0.0;
        }
        let mut marg: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (k, &p) in &self.outcomes {
            let key: Vec<u32> = idx.iter().map(|&i| k[i]).collect();
            *marg.entry(key).or_insert(0.0) += p;
        }
        marg.values().copied().map(neg_p_log2_p).sum()
    }

    /// Marginal pmf over `vars` (in the order given).
    pub fn marginal(&self, vars: &[&str]) -> Result<BTreeMap<Vec<u32>, f64>> {
        let idx = vars.iter().map(|v| self.index_of(v)).collect::<Result<Vec<_>>>()?;
        let mut marg = BTreeMap::new();
        for (k, &p) in &self.outcomes {
            let key: Vec<u32> = idx.iter().map(|&i| k[i]).collect();
            *marg.entry(key).or_insert(0.0) += p;
        }
        Ok(marg)
    }

    /// `H(vars | given)` in bits.
    pub fn entropy(&self, vars: &[&str], given: &[&str]) -> Result<f64> {
        let g = self.indices(given)?;
        let mut all = self.indices(vars)?;
        all.extend(&g);
        all.sort_unstable();
        all.dedup();
        Ok(self.joint_entropy_idx(&all) - self.joint_entropy_idx(&g))
    }

    /// `I(a; b | given)` in bits.
    pub fn mutual_information(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        let c = self.indices(given)?;
        let union = |parts: &[&[usize]]| {
            let mut v: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let ia = self.indices(a)?;
        let ib = self.indices(b)?;
        let hac = self.joint_entropy_idx(&union(&[&ia, &c]));
        let hbc = self.joint_entropy_idx(&union(&[&ib, &c]));
        let habc = self.joint_entropy_idx(&union(&[&ia, &ib, &c]));
        let hc = self.joint_entropy_idx(&c);
        Ok(hac + hbc - habc - hc)
    }

    /// Expectation of `f(outcome)`.
    pub fn expect<F: FnMut(&[u32]) -> f64>(&self, mut f: F) -> f64 {
        self.outcomes.iter().map(|(k, &p)| p * f(k)).sum()
    }
}
