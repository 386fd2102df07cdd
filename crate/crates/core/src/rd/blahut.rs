//! Blahut–Arimoto at a fixed slope, one conditional source per side symbol.
//!
//! With the side information known at both ends, the conditional problem
//! splits into independent unconditional problems for each `p(y | x)`. Solving
//! every one of them at the same slope `lambda` and averaging with weights
//! `p(x)` yields a point on the conditional curve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossFunction;
use crate::prob::FiniteJoint;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaConfig {
    pub max_iterations: usize,
    /// Stop when the relative change of the Lagrangian objective drops below this.
    pub rel_tol: f64,
    /// Reproduction alphabet; defaults to the source output alphabet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reproduction: Option<Vec<f64>>,
}

impl Default for BaConfig {
    fn default() -> Self {
        BaConfig {
            max_iterations: 10_000,
            rel_tol: 1e-9,
            reproduction: None,
        }
    }
}

/// Result of Blahut–Arimoto on one unconditional source.
#[derive(Clone, Debug)]
pub struct SourceSolution {
    pub distortion: f64,
    /// Mutual information of the returned channel, in bits.
    pub rate: f64,
    /// `b` in the dual bound `R(D) >= b - lambda * D`, valid for every `D`.
    pub lower_intercept: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest per-iteration increase of the objective (0 when it never rose).
    pub max_increase: f64,
    /// Channel `q(k | y)`, row-major over the full output alphabet.
    pub channel: Vec<f64>,
    /// Output distribution over the reproduction alphabet.
    pub reproduction_pmf: Vec<f64>,
}

impl SourceSolution {
    pub fn descent_ok(&self) -> bool {
        self.max_increase <= 0.0
    }
}

/// Run Blahut–Arimoto for source `p` (length `ny`) against the distortion
/// matrix `d` (`ny x nk`, row-major) at slope `lambda` (rate in bits plus
/// `lambda` times distortion).
pub fn solve_source(p: &[f64], d: &[f64], nk: usize, lambda: f64, cfg: &BaConfig) -> SourceSolution {
    let ny = p.len();
    let support: Vec<usize> = (0..ny).filter(|&y| p[y] > 0.0).collect();
    let ns = support.len();
    let ps: Vec<f64> = support.iter().map(|&y| p[y]).collect();

    // Row-shifted kernel: a[y][k] = 2^(-lambda (d - min_k d)), so each row
    // has a maximal entry of exactly 1 and never underflows as a whole.
    let mut a = vec![0.0; ns * nk];
    let mut dmin = vec![0.0; ns];
    for (s, &y) in support.iter().enumerate() {
        let row = &d[y * nk..(y + 1) * nk];
        let m = row.iter().copied().fold(f64::INFINITY, f64::min);
        dmin[s] = m;
        for k in 0..nk {
            a[s * nk + k] = (-lambda * (row[k] - m)).exp2();
        }
    }
    let shift: f64 = ps.iter().zip(&dmin).map(|(p, m)| p * lambda * m).sum();
    if let Some(sol) = zero_rate_certificate(p, &support, &ps, d, nk, lambda) {
        return sol;
    }

    let mut r = vec![1.0 / nk as f64; nk];
    let mut z = vec![0.0; ns];
    let mut c = vec![0.0; nk];
    let mut prev = f64::INFINITY;
    let mut max_increase: f64 = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut objective;

    loop {
        iterations += 1;
        for s in 0..ns {
            let row = &a[s * nk..(s + 1) * nk];
            z[s] = row.iter().zip(&r).map(|(a, r)| a * r).sum();
        }
        objective = shift - ps.iter().zip(&z).map(|(p, z)| p * z.log2()).sum::<f64>();
        c.iter_mut().for_each(|v| *v = 0.0);
        for s in 0..ns {
            let w = ps[s] / z[s];
            let row = &a[s * nk..(s + 1) * nk];
            for (cv, av) in c.iter_mut().zip(row) {
                *cv += w * av;
            }
        }
        if prev.is_finite() {
            let rise = objective - prev;
            if rise > 1e-13 * (1.0 + objective.abs()) {
                max_increase = max_increase.max(rise);
            }
            if (prev - objective).abs() <= cfg.rel_tol * objective.abs().max(1e-12) {
                converged = true;
                break;
            }
        }
        if iterations >= cfg.max_iterations {
            break;
        }
        prev = objective;
        for (rv, cv) in r.iter_mut().zip(&c) {
            *rv *= cv;
        }
    }

    // Channel, distortion and rate from the final reproduction pmf `r`.
    let cmax = c.iter().copied().fold(0.0, f64::max);
    let lower_intercept = objective - cmax.log2();
    let mut channel = vec![0.0; ny * nk];
    let mut distortion = 0.0;
    let mut rate = 0.0;
    for (s, &y) in support.iter().enumerate() {
        let row_a = &a[s * nk..(s + 1) * nk];
        let row_d = &d[y * nk..(y + 1) * nk];
        for k in 0..nk {
            let q = r[k] * row_a[k] / z[s];
            channel[y * nk + k] = q;
            if q > 0.0 {
                distortion += ps[s] * q * row_d[k];
                rate += ps[s] * q * (row_a[k] / (z[s] * c[k])).log2();
            }
        }
    }
    let reproduction_pmf: Vec<f64> = r.iter().zip(&c).map(|(r, c)| r * c).collect();

    SourceSolution {
        distortion,
        rate: rate.max(0.0),
        lower_intercept,
        iterations,
        converged,
        max_increase,
        channel,
        reproduction_pmf,
    }
}

/// Closed-form optimum when the whole reproduction mass sits on one letter.
///
/// With `k0` minimizing the expected distortion, the point mass on `k0` is
/// optimal at slope `lambda` exactly when
/// `sum_y p(y) 2^(-lambda (d(y, k) - d(y, k0))) <= 1` for every `k`. Below
/// the critical slope the iteration converges only sublinearly towards this
/// point, so it is detected up front.
fn zero_rate_certificate(
    p: &[f64],
    support: &[usize],
    ps: &[f64],
    d: &[f64],
    nk: usize,
    lambda: f64,
) -> Option<SourceSolution> {
    let expected = |k: usize| support.iter().zip(ps).map(|(&y, &w)| w * d[y * nk + k]).sum::<f64>();
    let mut k0 = 0;
    let mut best = expected(0);
    for k in 1..nk {
        let e = expected(k);
        if e < best {
            best = e;
            k0 = k;
        }
    }
    for k in (0..nk).filter(|&k| k != k0) {
        let c: f64 = support
            .iter()
            .zip(ps)
            .map(|(&y, &w)| w * (-lambda * (d[y * nk + k] - d[y * nk + k0])).exp2())
            .sum();
        if c > 1.0 {
            return None;
        }
    }
    let ny = p.len();
    let mut channel = vec![0.0; ny * nk];
    for &y in support {
        channel[y * nk + k0] = 1.0;
    }
    let mut reproduction_pmf = vec![0.0; nk];
    reproduction_pmf[k0] = 1.0;
    Some(SourceSolution {
        distortion: best,
        rate: 0.0,
        lower_intercept: lambda * best,
        iterations: 0,
        converged: true,
        max_increase: 0.0,
        channel,
        reproduction_pmf,
    })
}

/// One point of the conditional curve at slope `lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdPoint {
    pub slope: f64,
    pub distortion: f64,
    pub rate: f64,
    /// Dual bound: `R_{Y|X}(D) >= lower_intercept - slope * D` for all `D`.
    pub lower_intercept: f64,
    pub converged: bool,
    pub descent_ok: bool,
    pub iterations: usize,
}

/// A point together with the achieving conditional channels.
#[derive(Clone, Debug)]
pub struct RdSolution {
    pub point: RdPoint,
    /// Per side symbol (None where `p(x) = 0`).
    pub per_x: Vec<Option<SourceSolution>>,
    pub reproduction: Vec<f64>,
}

impl RdSolution {
    /// `q(k | y, x)`.
    pub fn channel(&self, x: usize, y: usize) -> Option<&[f64]> {
        let nk = self.reproduction.len();
        self.per_x[x]
            .as_ref()
            .map(|s| &s.channel[y * nk..(y + 1) * nk])
    }
}

pub(crate) fn reproduction_alphabet(joint: &FiniteJoint, cfg: &BaConfig) -> Result<Vec<f64>> {
    let rep = cfg
        .reproduction
        .clone()
        .unwrap_or_else(|| joint.y_alphabet().to_vec());
    if rep.is_empty() {
        return Err(Error::usage("reproduction alphabet is empty"));
    }
    Ok(rep)
}

pub(crate) fn distortion_matrix(ys: &[f64], rep: &[f64], loss: &LossFunction) -> Result<Vec<f64>> {
    let mut d = Vec::with_capacity(ys.len() * rep.len());
    for &y in ys {
        for &u in rep {
            let v = loss.eval(y, u);
            if !v.is_finite() {
                return Err(Error::usage(format!("loss is not finite at ({y}, {u})")));
            }
            d.push(v);
        }
    }
    Ok(d)
}

/// Zero-rate distortion `sum_x p(x) min_u E[l(Y, u) | X = x]`.
pub fn zero_rate_distortion(joint: &FiniteJoint, loss: &LossFunction, cfg: &BaConfig) -> Result<f64> {
    let rep = reproduction_alphabet(joint, cfg)?;
    let d = distortion_matrix(joint.y_alphabet(), &rep, loss)?;
    let nk = rep.len();
    let mut total = 0.0;
    for x in 0..joint.nx() {
        let row = joint.row(x);
        let best = (0..nk)
            .map(|k| row.iter().enumerate().map(|(y, p)| p * d[y * nk + k]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        total += best;
    }
    Ok(total)
}

pub fn ba_rd_point(
    joint: &FiniteJoint,
    loss: &LossFunction,
    slope: f64,
    cfg: &BaConfig,
) -> Result<RdSolution> {
    if !(slope > 0.0 && slope.is_finite()) {
        return Err(Error::usage(format!("slope must be positive and finite, got {slope}")));
    }
    let rep = reproduction_alphabet(joint, cfg)?;
    let d = distortion_matrix(joint.y_alphabet(), &rep, loss)?;
    let nk = rep.len();
    let px = joint.p_x();
    let per_x: Vec<Option<SourceSolution>> = (0..joint.nx())
        .into_par_iter()
        .map(|x| {
            joint
                .conditional(x)
                .map(|cond| solve_source(&cond, &d, nk, slope, cfg))
        })
        .collect();

    let mut point = RdPoint {
        slope,
        distortion: 0.0,
        rate: 0.0,
        lower_intercept: 0.0,
        converged: true,
        descent_ok: true,
        iterations: 0,
    };
    for (w, s) in px.iter().zip(&per_x) {
        if let Some(s) = s {
            point.distortion += w * s.distortion;
            point.rate += w * s.rate;
            point.lower_intercept += w * s.lower_intercept;
            point.converged &= s.converged;
            point.descent_ok &= s.descent_ok();
            point.iterations = point.iterations.max(s.iterations);
        }
    }
    Ok(RdSolution {
        point,
        per_x,
        reproduction: rep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_entropy(p: f64) -> f64 {
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
        }
    }

    #[test]
    fn large_slope_reaches_lossless_endpoint() {
        let j = FiniteJoint::from_rows(
            vec![0.0, 1.0, 2.0],
            &[vec![0.2, 0.1, 0.1], vec![0.05, 0.25, 0.3]],
        )
        .unwrap();
        let sol = ba_rd_point(&j, &LossFunction::hamming(), 200.0, &BaConfig::default()).unwrap();
        let h = crate::prob::entropy_bits(&j, crate::prob::Selector::YGivenX);
        assert!(sol.point.distortion < 1e-12);
        assert!((sol.point.rate - h).abs() < 1e-9);
        assert!(sol.point.descent_ok);
    }

    #[test]
    fn bernoulli_point_lies_on_closed_form() {
        let j = FiniteJoint::single_source(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let sol = ba_rd_point(&j, &LossFunction::hamming(), 3.0, &BaConfig::default()).unwrap();
        let p = sol.point;
        assert!((p.rate - (1.0 - binary_entropy(p.distortion))).abs() < 1e-9);
        // on the curve the slope is log2((1-D)/D)
        assert!((((1.0 - p.distortion) / p.distortion).log2() - 3.0).abs() < 1e-6);
        assert!(p.lower_intercept - 3.0 * p.distortion <= p.rate + 1e-9);
    }

    #[test]
    fn channel_rows_are_distributions() {
        let j = FiniteJoint::from_rows(vec![0.0, 1.0], &[vec![0.3, 0.2], vec![0.1, 0.4]]).unwrap();
        let sol = ba_rd_point(&j, &LossFunction::hamming(), 1.5, &BaConfig::default()).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                let s: f64 = sol.channel(x, y).unwrap().iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn iteration_cap_flags_nonconvergence() {
        let j = FiniteJoint::single_source(vec![0.0, 1.0, 2.0], vec![0.2, 0.5, 0.3]).unwrap();
        let cfg = BaConfig {
            max_iterations: 2,
            rel_tol: 0.0,
            ..BaConfig::default()
        };
        let sol = ba_rd_point(&j, &LossFunction::squared(), 4.0, &cfg).unwrap();
        assert!(!sol.point.converged);
        assert_eq!(sol.point.iterations, 2);
    }

    #[test]
    fn shallow_slope_is_certified_at_zero_rate() {
        // Y has mean 1.1 and variance 0.49 on {0, 1, 2}; reproducing 1 is
        // optimal at rate 0 for slopes up to about 1/(2 ln 2 * 0.49)
        let j = FiniteJoint::single_source(vec![0.0, 1.0, 2.0], vec![0.2, 0.5, 0.3]).unwrap();
        let loss = LossFunction::squared();
        let sol = ba_rd_point(&j, &loss, 0.5, &BaConfig::default()).unwrap().point;
        assert_eq!((sol.rate, sol.iterations), (0.0, 0));
        assert!((sol.distortion - 0.5).abs() < 1e-15);
        assert_eq!(sol.distortion, zero_rate_distortion(&j, &loss, &BaConfig::default()).unwrap());
        let steep = ba_rd_point(&j, &loss, 3.0, &BaConfig::default()).unwrap().point;
        assert!(steep.rate > 0.0 && steep.iterations > 0);
    }

    #[test]
    fn rejects_bad_slope() {
        let j = FiniteJoint::single_source(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert!(ba_rd_point(&j, &LossFunction::hamming(), 0.0, &BaConfig::default()).is_err());
    }
}
