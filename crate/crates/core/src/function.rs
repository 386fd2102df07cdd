//! Real functions on a bounded interval, used both as regression functions
//! and as hypotheses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of the uniform cell containing `x` when `[lo, hi]` is split into
/// `cells` equal pieces. Points on an interior boundary belong to the upper
/// cell; points outside the interval are clamped to the end cells.
pub(crate) fn uniform_cell(x: f64, lo: f64, hi: f64, cells: usize) -> usize {
    let t = (x - lo) / (hi - lo) * cells as f64;
    if t.is_nan() || t <= 0.0 {
        0
    } else {
        (t.floor() as usize).min(cells - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Function1D {
    /// Continuous interpolation through `(knots[k], values[k])`; `knots`
    /// strictly increasing, first and last knot are the domain ends.
    PiecewiseLinear { knots: Vec<f64>, values: Vec<f64> },
    /// One value per uniform cell of `domain`.
    PiecewiseConstant { domain: [f64; 2], values: Vec<f64> },
}

impl Function1D {
    pub fn constant(value: f64, domain: [f64; 2]) -> Self {
        Function1D::PiecewiseConstant {
            domain,
            values: vec![value],
        }
    }

    pub fn linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let f = Function1D::PiecewiseLinear { knots, values };
        f.validate()?;
        Ok(f)
    }

    pub fn steps(domain: [f64; 2], values: Vec<f64>) -> Result<Self> {
        let f = Function1D::PiecewiseConstant { domain, values };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Function1D::PiecewiseLinear { knots, values } => {
                if knots.len() < 2 || knots.len() != values.len() {
                    return Err(Error::validation(
                        "piecewise-linear function needs >= 2 knots and one value per knot",
                    ));
                }
                if knots.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::validation("knots must be strictly increasing"));
                }
                if knots.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(Error::validation("non-finite knot or value"));
                }
            }
            Function1D::PiecewiseConstant { domain, values } => {
                if values.is_empty() {
                    return Err(Error::validation("piecewise-constant function needs >= 1 cell"));
                }
                if !(domain[1] > domain[0]) || !domain[0].is_finite() || !domain[1].is_finite() {
                    return Err(Error::validation("domain must be a finite interval [a, b] with a < b"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::validation("non-finite cell value"));
                }
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> [f64; 2] {
        match self {
            Function1D::PiecewiseLinear { knots, .. } => [knots[0], knots[knots.len() - 1]],
            Function1D::PiecewiseConstant { domain, .. } => *domain,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Function1D::PiecewiseLinear { knots, values } => {
                let last = knots.len() - 1;
                if x <= knots[0] {
                    return values[0];
                }
                if x >= knots[last] {
                    return values[last];
                }
                // first knot strictly greater than x
                let k = knots.partition_point(|&t| t <= x);
                let (x0, x1) = (knots[k - 1], knots[k]);
                let (v0, v1) = (values[k - 1], values[k]);
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
            Function1D::PiecewiseConstant { domain, values } => {
                values[uniform_cell(x, domain[0], domain[1], values.len())]
            }
        }
    }

    /// Points where the function may change its formula, including both
    /// domain ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Function1D::PiecewiseLinear { knots, .. } => knots.clone(),
            Function1D::PiecewiseConstant { domain, values } => {
                let m = values.len();
                (0..=m)
                    .map(|i| {
                        if i == m {
                            domain[1]
                        } else {
                            domain[0] + (domain[1] - domain[0]) * i as f64 / m as f64
                        }
                    })
                    .collect()
            }
        }
    }

    /// Values at the two ends of `[lo, hi]`, assuming the function is affine
    /// there (i.e. no breakpoint strictly inside).
    fn affine_ends(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self {
            Function1D::PiecewiseLinear { .. } => (self.eval(lo), self.eval(hi)),
            Function1D::PiecewiseConstant { .. } => {
                let v = self.eval(0.5 * (lo + hi));
                (v, v)
            }
        }
    }

    /// Smallest and largest value taken on the domain.
    pub fn range(&self) -> (f64, f64) {
        let vals = match self {
            Function1D::PiecewiseLinear { values, .. } => values,
            Function1D::PiecewiseConstant { values, .. } => values,
        };
        vals.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Exact `||f - g||^2` under the uniform law on the common domain, by
/// integrating the squared difference on every piece of the common
/// refinement (where both functions are affine).
pub fn l2_distance_sq(f: &Function1D, g: &Function1D) -> Result<f64> {
    let (df, dg) = (f.domain(), g.domain());
    if (df[0] - dg[0]).abs() > 1e-12 || (df[1] - dg[1]).abs() > 1e-12 {
        return Err(Error::validation(format!(
            "functions live on different domains {df:?} and {dg:?}"
        )));
    }
    let mut cuts: Vec<f64> = f.breakpoints();
    cuts.extend(g.breakpoints());
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    let volume = df[1] - df[0];
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let (f0, f1) = f.affine_ends(lo, hi);
        let (g0, g1) = g.affine_ends(lo, hi);
        let (a, b) = (f0 - g0, f1 - g1);
        total += (hi - lo) * (a * a + a * b + b * b) / 3.0;
    }
    Ok(total / volume)
}
