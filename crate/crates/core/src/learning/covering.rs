use serde::{Deserialize, Serialize};

use super::grid::{enumerate_sequences, log2_sequence_count};
use super::HypothesisGrid;
use crate::error::{Error, Result};

/// Functions from `domain` into `[0, 1]` with Lipschitz constant `lipschitz`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzClass {
    pub domain: [f64; 2],
    pub lipschitz: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    Sup,
    /// `L2` under the uniform law. Sup-norm nets are used for it as well,
    /// since the `L2` distance never exceeds the sup distance.
    L2,
}

/// Parameters of the constructive net and the size it would have.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverCount {
    pub epsilon: f64,
    /// Resolution the net was built for; never above `epsilon`.
    pub net_epsilon: f64,
    pub cells: usize,
    /// Levels sit at the midpoints `(2j + 1) / (2q)`, `j < q`.
    pub q: u32,
    /// Largest level-index change allowed between adjacent cells.
    pub max_jump: u32,
    pub log2_count: f64,
}

impl CoverCount {
    /// The count itself when it fits an `f64` exactly enough to round.
    pub fn count(&self) -> f64 {
        self.log2_count.exp2().round()
    }
}

/// Resolutions tried for Lipschitz classes: `2^(-k / LADDER)`.
const LADDER: f64 = 16.0;

/// On a cell of width `w` a member moves by at most `L w / 2` from its value
/// at the cell center, and rounding that value to the nearest of `q`
/// midpoint levels costs at most `1 / (2q)`. Taking `w <= epsilon / L` and
/// `q = ceil(1 / epsilon)` keeps the sum within `epsilon`; with `L = 0` one
/// cell and `q = ceil(1 / (2 epsilon))` suffice. Adjacent center values
/// differ by at most `L w`, so their level indices differ by at most
/// `ceil(L w q)`, and only such sequences are counted.
fn construction(class: &LipschitzClass, epsilon: f64) -> CoverCount {
    let [a, b] = class.domain;
    let ceil = |v: f64| (v - 1e-12).ceil().max(1.0);
    let (cells, q) = if class.lipschitz == 0.0 {
        (1usize, ceil(0.5 / epsilon) as u32)
    } else {
        (ceil((b - a) * class.lipschitz / epsilon) as usize, ceil(1.0 / epsilon) as u32)
    };
    let w = (b - a) / cells as f64;
    let max_jump = ((class.lipschitz * w * q as f64 - 1e-12).ceil().max(0.0) as u32).min(q - 1);
    CoverCount {
        epsilon,
        net_epsilon: epsilon,
        cells,
        q,
        max_jump,
        log2_count: log2_sequence_count(cells, q as usize, Some(max_jump)),
    }
}

/// Size of the constructive `epsilon`-net of a Lipschitz class.
///
/// For `L > 0` the cell count and the jump bound change at different
/// thresholds, so the construction alone is not monotone in `epsilon`. The
/// net is therefore the smallest construction over the resolutions
/// `2^(-k/16) <= epsilon`; any of them is also an `epsilon`-net, and the
/// minimum over a set that grows with `epsilon` cannot increase. The scan
/// stops once `log2 q + cells - 1`, a lower bound for the current and every
/// finer construction (each cell after the first has at least two
/// admissible levels), reaches the best count so far.
pub fn covering_count(class: &LipschitzClass, epsilon: f64) -> Result<CoverCount> {
    let [a, b] = class.domain;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::usage(format!("epsilon must be > 0, got {epsilon}")));
    }
    if !(class.lipschitz >= 0.0 && class.lipschitz.is_finite()) {
        return Err(Error::usage("Lipschitz constant must be finite and >= 0"));
    }
    if !(b > a) {
        return Err(Error::usage("domain must satisfy a < b"));
    }
    if class.lipschitz == 0.0 {
        return Ok(construction(class, epsilon));
    }
    let mut k = (-LADDER * epsilon.log2() - 1e-9).ceil() as i64;
    while (-(k as f64) / LADDER).exp2() > epsilon {
        k += 1;
    }
    let mut best: Option<CoverCount> = None;
    loop {
        let c = construction(class, (-(k as f64) / LADDER).exp2());
        if let Some(b) = &best {
            let floor = (c.q as f64).log2() + (c.cells - 1) as f64;
            if c.q < 2 || floor >= b.log2_count {
                break;
            }
        }
        if best.is_none_or(|b| c.log2_count < b.log2_count) {
            best = Some(c);
        }
        if c.q < 2 {
            break;
        }
        k += 1;
    }
    let mut best = best.expect("the scan visits at least one resolution");
    best.epsilon = epsilon;
    Ok(best)
}

/// Constructive `epsilon`-net: the count and the net itself as a grid.
/// Refuses when the net would have more than `cap` members.
pub fn covering_number(
    class: &LipschitzClass,
    epsilon: f64,
    _norm: Norm,
    cap: usize,
) -> Result<(CoverCount, HypothesisGrid)> {
    let cc = covering_count(class, epsilon)?;
    if cc.log2_count > (cap as f64).log2() + 1e-9 {
        return Err(Error::CapExceeded {
            what: "covering net members",
            needed: cc.count(),
            cap: cap as f64,
        });
    }
    let q = cc.q as f64;
    let grid = HypothesisGrid {
        domain: class.domain,
        cells: cc.cells,
        levels: (0..cc.q).map(|j| (2 * j + 1) as f64 / (2.0 * q)).collect(),
        members: enumerate_sequences(cc.cells, cc.q as usize, Some(cc.max_jump), cap)?,
        epsilon: Some(epsilon),
        lipschitz_bound: Some(class.lipschitz),
    };
    grid.validate()?;
    Ok((cc, grid))
}
