use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{uniform_cell, Function1D};

/// A finite hypothesis class of piecewise-constant functions.
///
/// Every member takes one value per cell of a uniform partition of `domain`
/// and its values are drawn from `levels`. Members are stored as level
/// indices; their order is the ERM tie-break order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisGrid {
    pub domain: [f64; 2],
    pub cells: usize,
    pub levels: Vec<f64>,
    pub members: Vec<Vec<u32>>,
    /// Radius this grid certifies as a net of a larger class, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Lipschitz constant of the class the jump constraint was derived from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_bound: Option<f64>,
}

impl HypothesisGrid {
    /// All step functions with values in `{0, 1/q, ..., 1}` whose adjacent
    /// cells differ by at most `max_jump` levels, in lexicographic order.
    pub fn steps(domain: [f64; 2], cells: usize, q: u32, max_jump: Option<u32>, cap: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::usage("level count q must be >= 1"));
        }
        let levels: Vec<f64> = (0..=q).map(|j| j as f64 / q as f64).collect();
        let members = enumerate_sequences(cells, levels.len(), max_jump, cap)?;
        let width = (domain[1] - domain[0]) / cells.max(1) as f64;
        let g = HypothesisGrid {
            domain,
            cells,
            levels,
            members,
            epsilon: None,
            lipschitz_bound: max_jump.map(|k| k as f64 / (q as f64 * width)),
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid from explicit per-cell values. The level set is the sorted set of
    /// distinct values; member order is kept.
    pub fn from_values(domain: [f64; 2], functions: &[Vec<f64>]) -> Result<Self> {
        let cells = functions.first().map_or(0, Vec::len);
        let mut levels: Vec<f64> = functions.iter().flatten().copied().collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let members = functions
            .iter()
            .map(|f| {
                f.iter()
                    .map(|v| levels.binary_search_by(|l| l.total_cmp(v)).map(|i| i as u32))
                    .collect::<std::result::Result<Vec<u32>, usize>>()
                    .map_err(|_| Error::validation("non-finite value in explicit grid"))
            })
            .collect::<Result<Vec<_>>>()?;
        let g = HypothesisGrid {
            domain,
            cells,
            levels,
            members,
            epsilon: None,
            lipschitz_bound: None,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.domain[1] > self.domain[0]) {
            return Err(Error::validation("grid domain must satisfy a < b"));
        }
        if self.cells == 0 || self.members.is_empty() {
            return Err(Error::validation("grid needs >= 1 cell and >= 1 member"));
        }
        if self.levels.iter().any(|&l| !(0.0..=1.0).contains(&l)) {
            return Err(Error::validation("grid levels must lie in [0, 1]"));
        }
        for (i, m) in self.members.iter().enumerate() {
            if m.len() != self.cells {
                return Err(Error::validation(format!(
                    "member {i} has {} cells, grid has {}",
                    m.len(),
                    self.cells
                )));
            }
            if m.iter().any(|&l| l as usize >= self.levels.len()) {
                return Err(Error::validation(format!("member {i} uses an unknown level")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn cell_of(&self, x: f64) -> usize {
        uniform_cell(x, self.domain[0], self.domain[1], self.cells)
    }

    #[inline]
    pub fn eval(&self, member: usize, x: f64) -> f64 {
        self.levels[self.members[member][self.cell_of(x)] as usize]
    }

    pub fn values(&self, member: usize) -> Vec<f64> {
        self.members[member].iter().map(|&l| self.levels[l as usize]).collect()
    }

    pub fn function(&self, member: usize) -> Function1D {
        Function1D::PiecewiseConstant {
            domain: self.domain,
            values: self.values(member),
        }
    }

    /// Index of the member with exactly these per-cell values.
    pub fn position(&self, values: &[f64]) -> Option<usize> {
        (0..self.len()).find(|&i| self.values(i) == values)
    }
}

/// Sequences of length `len` over `0..alphabet` with adjacent differences at
/// most `max_jump`, in lexicographic order. Refuses when the count exceeds `cap`.
pub(crate) fn enumerate_sequences(
    len: usize,
    alphabet: usize,
    max_jump: Option<u32>,
    cap: usize,
) -> Result<Vec<Vec<u32>>> {
    let log2 = log2_sequence_count(len, alphabet, max_jump);
    if log2 > (cap as f64).log2() + 1e-9 {
        return Err(Error::CapExceeded {
            what: "hypothesis grid members",
            needed: log2.exp2().round(),
            cap: cap as f64,
        });
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(len: usize, alphabet: u32, k: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        let (lo, hi) = match cur.last() {
            Some(&p) => (p.saturating_sub(k), (p + k).min(alphabet - 1)),
            None => (0, alphabet - 1),
        };
        for v in lo..=hi {
            cur.push(v);
            rec(len, alphabet, k, cur, out);
            cur.pop();
        }
    }
    if len > 0 && alphabet > 0 {
        let k = max_jump.unwrap_or(u32::MAX).min(alphabet as u32);
        rec(len, alphabet as u32, k, &mut cur, &mut out);
    }
    Ok(out)
}

/// `log2` of the number of sequences [`enumerate_sequences`] would produce,
/// computed by a rescaled transfer-matrix recursion so it stays finite for
/// very long sequences.
pub(crate) fn log2_sequence_count(len: usize, alphabet: usize, max_jump: Option<u32>) -> f64 {
    if len == 0 || alphabet == 0 {
        return f64::NEG_INFINITY;
    }
    let k = max_jump.map_or(alphabet, |k| k as usize);
    let mut ways = vec![1.0f64; alphabet];
    let mut log2 = 0.0;
    for _ in 1..len {
        // prefix sums give each window sum in O(1)
        let mut prefix = vec![0.0; alphabet + 1];
        for (j, w) in ways.iter().enumerate() {
            prefix[j + 1] = prefix[j] + w;
        }
        let next: Vec<f64> = (0..alphabet)
            .map(|j| prefix[(j + k + 1).min(alphabet)] - prefix[j.saturating_sub(k)])
            .collect();
        let scale = next.iter().copied().fold(0.0, f64::max);
        log2 += scale.log2();
        ways = next.into_iter().map(|w| w / scale).collect();
    }
    log2 + ways.iter().sum::<f64>().log2()
}
