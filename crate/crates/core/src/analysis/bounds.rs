use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::UllnRow;
use crate::loss::LossFunction;

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::usage(format!("{name} must be finite and >= 0, got {v}")))
    }
}

/// `L* + 2 eta(D)`: the excess risk achievable at distortion level `D`.
pub fn theorem1_bound(lstar: f64, loss: &LossFunction, sup_drf: f64) -> Result<f64> {
    nonneg("L*", lstar)?;
    nonneg("distortion", sup_drf)?;
    Ok(lstar + 2.0 * loss.eval_eta(sup_drf)?)
}

/// `L*^(1/r) + 2 D^(1/r)`, the bound on the `r`-th root of the risk for
/// losses of the form `d(y, u)^r`.
pub fn theorem2_bound(lstar: f64, r: f64, sup_drf: f64) -> Result<f64> {
    nonneg("L*", lstar)?;
    nonneg("distortion", sup_drf)?;
    if !(r >= 1.0) {
        return Err(Error::usage(format!("metric power must be >= 1, got {r}")));
    }
    Ok(lstar.powf(1.0 / r) + 2.0 * sup_drf.powf(1.0 / r))
}

/// `sigma (1 + 2^(1 - R))`, the bound on the root risk in the Gaussian
/// regression model.
pub fn theorem3_bound(sigma: f64, rate: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::usage(format!("sigma must be > 0, got {sigma}")));
    }
    nonneg("rate", rate)?;
    Ok(sigma * (1.0 + (1.0 - rate).exp2()))
}

/// `L* + 2 eta(l_n) + C' / sqrt(n)` with a measured distortion `l_n`.
pub fn finite_sample_bound(measured_ln: f64, loss: &LossFunction, lstar: f64, c_prime: f64, n: usize) -> Result<f64> {
    nonneg("distortion", measured_ln)?;
    nonneg("L*", lstar)?;
    nonneg("C'", c_prime)?;
    if n == 0 {
        return Err(Error::usage("n must be >= 1"));
    }
    Ok(lstar + 2.0 * loss.eval_eta(measured_ln)? + c_prime / (n as f64).sqrt())
}

/// Least-squares fit of `dev = C / sqrt(n)` through the origin over every
/// trial of a deviation sweep, and `C' = 2 C`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CPrimeFit {
    pub c_hat: f64,
    pub c_prime: f64,
}

pub fn calibrate_c_prime(rows: &[UllnRow]) -> Result<CPrimeFit> {
    let (mut num, mut den) = (0.0, 0.0);
    for row in rows {
        if row.n == 0 {
            return Err(Error::usage("sample size 0 in calibration sweep"));
        }
        let s = 1.0 / (row.n as f64).sqrt();
        for &d in &row.deviations {
            num += d * s;
            den += s * s;
        }
    }
    if den == 0.0 {
        return Err(Error::usage("calibration sweep has no trials"));
    }
    let c_hat = num / den;
    Ok(CPrimeFit {
        c_hat,
        c_prime: 2.0 * c_hat,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Remark2Terms {
    /// `2 eta(l_n)` at the measured distortion.
    pub distortion_term: f64,
    /// `C' / sqrt(n)`.
    pub sample_term: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rate: f64,
    pub loss: String,
    pub lstar: f64,
    pub sup_drf: f64,
    pub theorem1_bound: f64,
    pub theorem2_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem3_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remark2: Option<Remark2Terms>,
}

/// Measured quantities for the finite-sample terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measured {
    pub ln: f64,
    pub c_prime: f64,
    pub n: usize,
}

/// Collect every applicable bound at one rate. `gaussian_sigma` marks the
/// Gaussian regression family and enables the closed-form root-risk bound.
pub fn bound_report(
    rate: f64,
    lstar: f64,
    loss: &LossFunction,
    sup_drf: f64,
    gaussian_sigma: Option<f64>,
    measured: Option<Measured>,
) -> Result<BoundReport> {
    let remark2 = match measured {
        Some(m) => Some(Remark2Terms {
            distortion_term: 2.0 * loss.eval_eta(m.ln)?,
            sample_term: m.c_prime / (m.n as f64).sqrt(),
            bound: finite_sample_bound(m.ln, loss, lstar, m.c_prime, m.n)?,
        }),
        None => None,
    };
    Ok(BoundReport {
        rate,
        loss: loss.to_string(),
        lstar,
        sup_drf,
        theorem1_bound: theorem1_bound(lstar, loss, sup_drf)?,
        theorem2_bound: theorem2_bound(lstar, loss.metric_power(), sup_drf)?,
        theorem3_bound: gaussian_sigma.map(|s| theorem3_bound(s, rate)).transpose()?,
        remark2,
    })
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rate                 {}", self.rate)?;
        writeln!(f, "loss                 {}", self.loss)?;
        writeln!(f, "L*                   {}", self.lstar)?;
        writeln!(f, "worst-case D(R)      {}", self.sup_drf)?;
        writeln!(f, "L* + 2 eta(D)        {}", self.theorem1_bound)?;
        write!(f, "root-risk bound      {}", self.theorem2_bound)?;
        if let Some(t3) = self.theorem3_bound {
            write!(f, "\nsigma (1 + 2^(1-R))  {t3}")?;
        }
        if let Some(r) = &self.remark2 {
            write!(
                f,
                "\nfinite-n bound       {} (2 eta(l_n) = {}, C'/sqrt(n) = {})",
                r.bound, r.distortion_term, r.sample_term
            )?;
        }
        Ok(())
    }
}
