//! Conditional rate-distortion and distortion-rate functions for finite
//! joints, plus the closed-form Gaussian case.

mod blahut;
mod curve;

pub use blahut::{
    ba_rd_point, solve_source, zero_rate_distortion, BaConfig, RdPoint, RdSolution, SourceSolution,
};
pub use curve::{default_slopes, geometric_slopes, rd_curve, rd_points, Lookup, RdCurve};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{LossFunction, LossKind};
use crate::prob::FiniteJoint;

/// Distortion-rate function of a memoryless Gaussian source under squared
/// error: `sigma^2 2^(-2R)`. In the regression family it is also the
/// conditional distortion-rate function for every regression function.
pub fn gaussian_drf(sigma: f64, rate: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::usage(format!("sigma must be > 0, got {sigma}")));
    }
    if !(rate >= 0.0) {
        return Err(Error::usage(format!("rate must be >= 0, got {rate}")));
    }
    Ok(sigma * sigma * (-2.0 * rate).exp2())
}

/// Inverse of [`gaussian_drf`].
pub fn gaussian_rdf(sigma: f64, distortion: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(distortion > 0.0) {
        return Err(Error::usage("sigma and distortion must be > 0"));
    }
    Ok((0.5 * (sigma * sigma / distortion).log2()).max(0.0))
}

/// Find the curve point whose rate is `target` by bisection on the slope.
///
/// The two bracketing solver points are both achievable, so the returned
/// distortion is their chord value at `target` (time sharing).
pub fn solve_at_rate(joint: &FiniteJoint, loss: &LossFunction, target: f64, cfg: &BaConfig) -> Result<RdPoint> {
    bisect_slope(joint, loss, cfg, Target::Rate(target))
}

/// Find the curve point whose distortion is `target` by bisection on the slope.
pub fn solve_at_distortion(
    joint: &FiniteJoint,
    loss: &LossFunction,
    target: f64,
    cfg: &BaConfig,
) -> Result<RdPoint> {
    bisect_slope(joint, loss, cfg, Target::Distortion(target))
}

#[derive(Clone, Copy)]
enum Target {
    Rate(f64),
    Distortion(f64),
}

impl Target {
    /// True when the point has not yet reached the target (slope must grow).
    fn below(&self, p: &RdPoint) -> bool {
        match *self {
            Target::Rate(r) => p.rate < r,
            Target::Distortion(d) => p.distortion > d,
        }
    }

    fn gap(&self, p: &RdPoint) -> f64 {
        match *self {
            Target::Rate(r) => (p.rate - r).abs(),
            Target::Distortion(d) => (p.distortion - d).abs(),
        }
    }
}

fn bisect_slope(joint: &FiniteJoint, loss: &LossFunction, cfg: &BaConfig, target: Target) -> Result<RdPoint> {
    let dmax = zero_rate_distortion(joint, loss, cfg)?;
    match target {
        Target::Rate(r) if !(r >= 0.0) => return Err(Error::usage("target rate must be >= 0")),
        Target::Distortion(d) if !(d >= 0.0) => {
            return Err(Error::usage("target distortion must be >= 0"))
        }
        Target::Rate(0.0) => return Ok(endpoint(dmax)),
        Target::Distortion(d) if d >= dmax => return Ok(endpoint(dmax)),
        _ => {}
    }
    let scale = if dmax > 0.0 { 1.0 / dmax } else { 1.0 };
    let solve = |s: f64| ba_rd_point(joint, loss, s, cfg).map(|sol| sol.point);

    // Search from steep slopes downwards so that no solve lands far below
    // the target slope, where the iteration is slowest.
    let mut hi = solve(scale * 10.0)?;
    let mut tries = 0;
    while target.below(&hi) && tries < 60 {
        hi = solve(hi.slope * 4.0)?;
        tries += 1;
    }
    if target.below(&hi) {
        return Err(Error::validation("target lies beyond the reachable end of the curve"));
    }
    let mut lo = solve(hi.slope / 2.0)?;
    tries = 0;
    while !target.below(&lo) && tries < 60 {
        hi = lo;
        lo = solve(lo.slope / 2.0)?;
        tries += 1;
    }
    if !target.below(&lo) {
        lo = endpoint(dmax);
        lo.slope = hi.slope / 2.0;
    }
    for _ in 0..80 {
        if target.gap(&hi) < 1e-10 || hi.slope / lo.slope < 1.0 + 1e-12 {
            break;
        }
        let mid = solve((lo.slope * hi.slope).sqrt())?;
        if target.below(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // chord between the bracketing points, evaluated at the target
    let t = match target {
        Target::Rate(r) if hi.rate > lo.rate => (r - lo.rate) / (hi.rate - lo.rate),
        Target::Distortion(d) if lo.distortion > hi.distortion => {
            (lo.distortion - d) / (lo.distortion - hi.distortion)
        }
        _ => 1.0,
    }
    .clamp(0.0, 1.0);
    Ok(RdPoint {
        slope: hi.slope,
        distortion: lo.distortion + t * (hi.distortion - lo.distortion),
        rate: lo.rate + t * (hi.rate - lo.rate),
        lower_intercept: hi.lower_intercept,
        converged: lo.converged && hi.converged,
        descent_ok: lo.descent_ok && hi.descent_ok,
        iterations: lo.iterations.max(hi.iterations),
    })
}

fn endpoint(dmax: f64) -> RdPoint {
    RdPoint {
        slope: 0.0,
        distortion: dmax,
        rate: 0.0,
        lower_intercept: 0.0,
        converged: true,
        descent_ok: true,
        iterations: 0,
    }
}

/// The distribution family over which the worst-case distortion is taken.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    /// Finite family (e.g. an epsilon-net of a larger one).
    Members { members: Vec<FiniteJoint> },
    /// The Gaussian regression family with noise level `sigma`.
    GaussianRegression { sigma: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupDrfSpec {
    pub family: Family,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupDrf {
    pub value: f64,
    /// Index of the maximizing member (None for analytic families).
    pub argmax: Option<usize>,
    pub per_member: Vec<f64>,
    /// Some member's curve had non-converged solver points or was clamped.
    pub flagged: bool,
}

/// Worst-case distortion-rate value over a family.
pub fn sup_drf(spec: &SupDrfSpec, loss: &LossFunction, cfg: &BaConfig) -> Result<SupDrf> {
    if !(spec.rate >= 0.0) {
        return Err(Error::usage("rate must be >= 0"));
    }
    match &spec.family {
        Family::GaussianRegression { sigma } => {
            if loss.kind != LossKind::Squared {
                return Err(Error::usage("the Gaussian regression family is defined for squared loss"));
            }
            let v = gaussian_drf(*sigma, spec.rate)?;
            Ok(SupDrf {
                value: v,
                argmax: None,
                per_member: vec![v],
                flagged: false,
            })
        }
        Family::Members { members } => {
            if members.is_empty() {
                return Err(Error::usage("family is empty"));
            }
            let mut per_member = Vec::with_capacity(members.len());
            let mut flagged = false;
            for m in members {
                let slopes = default_slopes(m, loss, cfg)?;
                let curve = rd_curve(m, loss, &slopes, cfg)?;
                let look = curve.invert(spec.rate)?;
                flagged |= curve.nonconverged > 0 || look.clamped;
                per_member.push(look.value);
            }
            let (argmax, value) = per_member
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            Ok(SupDrf {
                value,
                argmax: Some(argmax),
                per_member,
                flagged,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_values() {
        assert_eq!(gaussian_drf(1.0, 1.0).unwrap(), 0.25);
        assert_eq!(gaussian_drf(0.7, 0.0).unwrap(), 0.7 * 0.7);
        assert_eq!(gaussian_drf(0.5, 3.0).unwrap(), 0.00390625);
        assert!(gaussian_drf(0.0, 1.0).is_err());
        assert!(gaussian_drf(1.0, -0.1).is_err());
        assert!((gaussian_rdf(1.0, 0.25).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_family_sup_is_closed_form() {
        let spec = SupDrfSpec {
            family: Family::GaussianRegression { sigma: 0.5 },
            rate: 2.0,
        };
        let s = sup_drf(&spec, &LossFunction::squared(), &BaConfig::default()).unwrap();
        assert_eq!(s.value, 0.015625);
        assert!(sup_drf(&spec, &LossFunction::absolute(), &BaConfig::default()).is_err());
    }

    #[test]
    fn singleton_sup_equals_member() {
        let j = FiniteJoint::single_source(vec![0.0, 1.0], vec![0.3, 0.7]).unwrap();
        let loss = LossFunction::hamming();
        let cfg = BaConfig::default();
        let c = rd_curve(&j, &loss, &default_slopes(&j, &loss, &cfg).unwrap(), &cfg).unwrap();
        let spec = SupDrfSpec {
            family: Family::Members { members: vec![j] },
            rate: 0.3,
        };
        let s = sup_drf(&spec, &loss, &cfg).unwrap();
        assert_eq!(s.value, c.invert(0.3).unwrap().value);
        assert_eq!(s.argmax, Some(0));
    }

    #[test]
    fn bisection_hits_target_rate() {
        let j = FiniteJoint::single_source(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let p = solve_at_rate(&j, &LossFunction::hamming(), 0.5, &BaConfig::default()).unwrap();
        assert!((p.rate - 0.5).abs() < 1e-9);
        let z = solve_at_rate(&j, &LossFunction::hamming(), 0.0, &BaConfig::default()).unwrap();
        assert_eq!(z.distortion, 0.5);
        let q = solve_at_distortion(&j, &LossFunction::hamming(), 0.2, &BaConfig::default()).unwrap();
        assert!((q.distortion - 0.2).abs() < 1e-9);
    }
}
