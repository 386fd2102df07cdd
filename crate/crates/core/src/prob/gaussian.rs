//! The Gaussian regression model `Y = f0(X) + Z` with `X` uniform on a
//! bounded interval, and its discretization onto finite grids.

use libm::erfc;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{FiniteJoint, XSymbol};
use crate::error::{Error, Result};
use crate::function::Function1D;

/// Largest tail mass a discretization may drop before renormalizing.
pub const MAX_TRUNCATED_MASS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub f0: Function1D,
    /// Noise standard deviation.
    pub sigma: f64,
}

impl RegressionModel {
    pub fn new(f0: Function1D, sigma: f64) -> Result<Self> {
        let m = RegressionModel { f0, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.f0.validate()?;
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::validation(format!("sigma must be > 0, got {}", self.sigma)));
        }
        let (lo, hi) = self.f0.range();
        if lo < 0.0 || hi > 1.0 {
            return Err(Error::validation(format!(
                "regression function leaves [0, 1]: range [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    pub fn domain(&self) -> [f64; 2] {
        self.f0.domain()
    }

    pub fn volume(&self) -> f64 {
        let d = self.domain();
        d[1] - d[0]
    }

    /// Draw `n` pairs: `X` uniform on the domain, then `Y = f0(X) + Z`.
    /// All inputs are drawn before any noise, so the `X` sequence for a
    /// given stream does not depend on `sigma`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let [a, b] = self.domain();
        let xs: Vec<f64> = (0..n).map(|_| a + (b - a) * rng.random::<f64>()).collect();
        let noise = Normal::new(0.0, self.sigma).expect("sigma validated");
        let ys = xs.iter().map(|&x| self.f0.eval(x) + noise.sample(rng)).collect();
        (xs, ys)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSpec {
    pub x_bins: usize,
    pub y_grid: usize,
    /// Half-width of the output grid beyond the range of `f0`, in units of sigma.
    #[serde(default = "default_span")]
    pub y_span: f64,
}

fn default_span() -> f64 {
    6.0
}

impl DiscretizationSpec {
    pub fn new(x_bins: usize, y_grid: usize) -> Self {
        DiscretizationSpec {
            x_bins,
            y_grid,
            y_span: default_span(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_bins < 1 || self.y_grid < 2 || !(self.y_span > 0.0) {
            return Err(Error::validation(format!(
                "need x_bins >= 1, y_grid >= 2, y_span > 0; got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Upper tail `P(N(0,1) > z)`, accurate far into both tails.
fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// `P(lo < N(mu, sigma^2) <= hi)` computed without cancellation in the tails.
pub fn normal_interval_mass(lo: f64, hi: f64, mu: f64, sigma: f64) -> f64 {
    let (a, b) = ((lo - mu) / sigma, (hi - mu) / sigma);
    if a >= 0.0 {
        upper_tail(a) - upper_tail(b)
    } else if b <= 0.0 {
        upper_tail(-b) - upper_tail(-a)
    } else {
        1.0 - upper_tail(-a) - upper_tail(b)
    }
}

/// Uniform output grid: `count` cells of width `step` starting at `lo`,
/// each represented by its midpoint.
struct YGrid {
    lo: f64,
    step: f64,
    count: usize,
}

impl YGrid {
    fn covering(lo: f64, hi: f64, sigma: f64, spec: &DiscretizationSpec) -> Self {
        let (lo, hi) = (lo - spec.y_span * sigma, hi + spec.y_span * sigma);
        YGrid {
            lo,
            step: (hi - lo) / spec.y_grid as f64,
            count: spec.y_grid,
        }
    }

    fn edge(&self, j: usize) -> f64 {
        self.lo + self.step * j as f64
    }

    fn centers(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.lo + self.step * (j as f64 + 0.5)).collect()
    }
}

fn discretize_on(model: &RegressionModel, x_bins: usize, grid: &YGrid) -> Result<FiniteJoint> {
    let [a, b] = model.domain();
    let row_mass = 1.0 / x_bins as f64;
    let mut xs = Vec::with_capacity(x_bins);
    let mut pmf = Vec::with_capacity(x_bins * grid.count);
    for i in 0..x_bins {
        let xc = a + (b - a) * (i as f64 + 0.5) / x_bins as f64;
        xs.push(XSymbol::numeric(xc));
        let mu = model.f0.eval(xc);
        let masses: Vec<f64> = (0..grid.count)
            .map(|j| normal_interval_mass(grid.edge(j), grid.edge(j + 1), mu, model.sigma))
            .collect();
        let kept: f64 = masses.iter().sum();
        let dropped = 1.0 - kept;
        if dropped >= MAX_TRUNCATED_MASS {
            return Err(Error::validation(format!(
                "output grid too narrow: row {i} drops tail mass {dropped:.3e} (limit {MAX_TRUNCATED_MASS:e}); increase y_span"
            )));
        }
        pmf.extend(masses.iter().map(|m| m / kept * row_mass));
    }
    FiniteJoint::new(xs, grid.centers(), pmf)
}

/// Discretize the model: `x_bins` uniform input bins (represented by their
/// centers, each with mass `1/x_bins`) and `y_grid` output cells spanning the
/// range of `f0` widened by `y_span * sigma` on both sides. Each row is
/// renormalized after truncating the Gaussian tails.
pub fn discretize_regression(model: &RegressionModel, spec: &DiscretizationSpec) -> Result<FiniteJoint> {
    model.validate()?;
    spec.validate()?;
    let (lo, hi) = model.f0.range();
    discretize_on(model, spec.x_bins, &YGrid::covering(lo, hi, model.sigma, spec))
}

/// Discretize several models onto one shared output grid, so the resulting
/// joints live on identical alphabets and can be compared directly.
pub fn discretize_family(models: &[RegressionModel], spec: &DiscretizationSpec) -> Result<Vec<FiniteJoint>> {
    spec.validate()?;
    let first = models
        .first()
        .ok_or_else(|| Error::usage("empty model family"))?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut sigma: f64 = 0.0;
    for m in models {
        m.validate()?;
        if m.domain() != first.domain() {
            return Err(Error::validation("models in a family must share their domain"));
        }
        let (l, h) = m.f0.range();
        lo = lo.min(l);
        hi = hi.max(h);
        sigma = sigma.max(m.sigma);
    }
    let grid = YGrid::covering(lo, hi, sigma, spec);
    models.iter().map(|m| discretize_on(m, spec.x_bins, &grid)).collect()
}
