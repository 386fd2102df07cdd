use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{empirical_risk, true_risk_regression, HypothesisGrid};
use crate::error::{Error, Result};
use crate::function::l2_distance_sq;
use crate::loss::LossFunction;
use crate::prob::{discretize_family, kl_and_variational_joint, DiscretizationSpec, RegressionModel};

/// Largest observed `|l(f(x), u) - l(f(x), u')| - eta(l(u, u'))` over random
/// triples with `f` from the grid and `u, u'` in `[0, 1]`. Nonpositive (up to
/// rounding) when the modulus is sound.
///
/// Half of the targets are drawn from the grid levels so that exact ties,
/// which matter for the Hamming loss, are exercised.
pub fn modulus_soundness_check(loss: &LossFunction, grid: &HypothesisGrid, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::usage("trials must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [a, b] = grid.domain;
    let target = |rng: &mut ChaCha8Rng| {
        if rng.random::<bool>() {
            grid.levels[rng.random_range(0..grid.levels.len())]
        } else {
            rng.random::<f64>()
        }
    };
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let f = rng.random_range(0..grid.len());
        let x = a + (b - a) * rng.random::<f64>();
        let (u, v) = (target(&mut rng), target(&mut rng));
        let pred = grid.eval(f, x);
        let lhs = (loss.eval(pred, u) - loss.eval(pred, v)).abs();
        worst = worst.max(lhs - loss.eval_eta(loss.eval(u, v))?);
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub f: usize,
    pub g: usize,
    pub l2: f64,
    /// Variational distance of the discretized joints.
    pub dv: f64,
    /// `l2 / sigma - dv`.
    pub slack: f64,
}

/// Net certificate for the induced family `{P_f}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyNet {
    pub function_radius: f64,
    pub sigma: f64,
    /// `function_radius / sigma`.
    pub dv_radius: f64,
    pub checks: Vec<PairCheck>,
    pub worst_slack: f64,
}

/// Turn a function net of radius `eps'` into a variational-distance net of
/// radius `eps' / sigma` for the Gaussian regression family, and spot-check
/// `d_V(P_f, P_g) <= ||f - g|| / sigma` on `pairs` random member pairs.
pub fn family_net_from_function_net(
    grid: &HypothesisGrid,
    sigma: f64,
    pairs: usize,
    spec: &DiscretizationSpec,
    seed: u64,
) -> Result<FamilyNet> {
    let radius = grid
        .epsilon
        .ok_or_else(|| Error::usage("grid does not certify a net radius"))?;
    if !(sigma > 0.0) {
        return Err(Error::usage("sigma must be > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let (f, g) = (rng.random_range(0..grid.len()), rng.random_range(0..grid.len()));
        let (ff, gf) = (grid.function(f), grid.function(g));
        let l2 = l2_distance_sq(&ff, &gf)?.sqrt();
        let joints = discretize_family(
            &[RegressionModel::new(ff, sigma)?, RegressionModel::new(gf, sigma)?],
            spec,
        )?;
        let dv = kl_and_variational_joint(&joints[0], &joints[1])?.dv;
        checks.push(PairCheck {
            f,
            g,
            l2,
            dv,
            slack: l2 / sigma - dv,
        });
    }
    Ok(FamilyNet {
        function_radius: radius,
        sigma,
        dv_radius: radius / sigma,
        worst_slack: checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min),
        checks,
    })
}

/// `max_g |L_hat(g) - L(g)|` over the grid for one sample of size `n`.
pub fn max_risk_deviation(
    grid: &HypothesisGrid,
    model: &RegressionModel,
    loss: &LossFunction,
    n: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    let (xs, ys) = model.sample(n, rng);
    let mut worst: f64 = 0.0;
    for g in 0..grid.len() {
        let d = empirical_risk(grid, g, &xs, &ys, loss)? - true_risk_regression(grid, g, model, loss)?;
        worst = worst.max(d.abs());
    }
    Ok(worst)
}

/// Per-`n` samples of the maximal risk deviation, one per trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UllnRow {
    pub n: usize,
    pub deviations: Vec<f64>,
}

impl UllnRow {
    pub fn mean(&self) -> f64 {
        self.deviations.iter().sum::<f64>() / self.deviations.len() as f64
    }

    /// Fraction of trials with deviation below `threshold`.
    pub fn fraction_below(&self, threshold: f64) -> f64 {
        self.deviations.iter().filter(|&&d| d < threshold).count() as f64 / self.deviations.len() as f64
    }
}

/// Seeded sweep of [`max_risk_deviation`] over sample sizes.
pub fn ulln_sweep(
    grid: &HypothesisGrid,
    model: &RegressionModel,
    loss: &LossFunction,
    ns: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<UllnRow>> {
    if trials == 0 || ns.is_empty() {
        return Err(Error::usage("need >= 1 trial and >= 1 sample size"));
    }
    ns.iter()
        .map(|&n| {
            let deviations = (0..trials)
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(((n as u64) << 20) ^ t as u64);
                    max_risk_deviation(grid, model, loss, n, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(UllnRow { n, deviations })
        })
        .collect()
}

/// Largest sample mean of `l(Y, y0)^(1 + delta)` when each grid member in
/// turn plays the regression function.
pub fn moment_check(
    grid: &HypothesisGrid,
    sigma: f64,
    loss: &LossFunction,
    y0: f64,
    n: usize,
    seed: u64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for g in 0..grid.len() {
        let model = RegressionModel::new(grid.function(g), sigma)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(g as u64);
        let (_, ys) = model.sample(n, &mut rng);
        let m = ys
            .iter()
            .map(|&y| loss.eval(y, y0).powf(1.0 + loss.moment_delta))
            .sum::<f64>()
            / n as f64;
        worst = worst.max(m);
    }
    Ok(worst)
}
