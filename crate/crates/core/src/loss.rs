//! Loss functions and their generalized-Lipschitz moduli.
//!
//! A modulus `eta` bounds how much the loss against a fixed prediction can
//! change when the target moves: `|l(f(x), u) - l(f(x), u')| <= eta(l(u, u'))`.
//! Moduli are kept in a symbolic form `c * t^e` with `0 < e <= 1` so that
//! concavity and `eta(0) = 0` hold by construction and can be re-checked.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LossKind {
    /// `(y - u)^2`: the metric `|y - u|` raised to `r = 2`.
    Squared,
    /// `|y - u|`, a metric.
    Absolute,
    /// `|y - u|^p` for `p >= 1`; the modulus assumes outputs in `[0, 1]`.
    PPower { p: f64 },
    /// `1[y != u]`, the discrete metric.
    Hamming,
}

/// `eta(t) = coef * t^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eta {
    pub coef: f64,
    pub exponent: f64,
}

impl Eta {
    pub const IDENTITY: Eta = Eta {
        coef: 1.0,
        exponent: 1.0,
    };

    pub fn eval(&self, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else {
            self.coef * t.powf(self.exponent)
        }
    }

    /// Midpoint-concavity and `eta(0) = 0` at the given sample points.
    pub fn is_concave_on(&self, points: &[f64]) -> bool {
        if self.eval(0.0) != 0.0 {
            return false;
        }
        points.iter().all(|&a| {
            points.iter().all(|&b| {
                let mid = self.eval(0.5 * (a + b));
                let chord = 0.5 * (self.eval(a) + self.eval(b));
                mid >= chord - 1e-12 * (1.0 + chord.abs())
            })
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossFunction {
    #[serde(flatten)]
    pub kind: LossKind,
    /// Overrides the modulus implied by `kind` (used for falsification runs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Eta>,
    /// `delta` in the uniform moment condition `sup E[l(Y, y0)^(1+delta)] < inf`.
    #[serde(default = "default_delta")]
    pub moment_delta: f64,
}

fn default_delta() -> f64 {
    1.0
}

impl LossFunction {
    pub fn new(kind: LossKind) -> Result<Self> {
        if let LossKind::PPower { p } = kind {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(Error::validation(format!("p-power loss needs p >= 1, got {p}")));
            }
        }
        Ok(LossFunction {
            kind,
            eta: None,
            moment_delta: default_delta(),
        })
    }

    pub fn squared() -> Self {
        LossFunction::new(LossKind::Squared).expect("valid")
    }

    pub fn absolute() -> Self {
        LossFunction::new(LossKind::Absolute).expect("valid")
    }

    pub fn hamming() -> Self {
        LossFunction::new(LossKind::Hamming).expect("valid")
    }

    pub fn p_power(p: f64) -> Result<Self> {
        LossFunction::new(LossKind::PPower { p })
    }

    /// Replace the modulus. Only the exponent range is checked; a modulus
    /// that is too small is accepted so soundness checks can catch it.
    pub fn with_eta(mut self, eta: Eta) -> Result<Self> {
        if !(eta.coef >= 0.0 && eta.exponent > 0.0 && eta.exponent <= 1.0) {
            return Err(Error::validation(format!(
                "modulus {eta:?} is not of the concave form c * t^e with c >= 0, 0 < e <= 1"
            )));
        }
        self.eta = Some(eta);
        Ok(self)
    }

    #[inline]
    pub fn eval(&self, y: f64, u: f64) -> f64 {
        match self.kind {
            LossKind::Squared => (y - u) * (y - u),
            LossKind::Absolute => (y - u).abs(),
            LossKind::PPower { p } => (y - u).abs().powf(p),
            LossKind::Hamming => {
                if y == u {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// The modulus in effect: the override if set, otherwise `t` for metrics
    /// and `p t^(1/p)` for `p`-th powers (squared loss is the `p = 2` case).
    pub fn eta_form(&self) -> Eta {
        if let Some(e) = self.eta {
            return e;
        }
        match self.kind {
            LossKind::Absolute | LossKind::Hamming => Eta::IDENTITY,
            LossKind::Squared => Eta {
                coef: 2.0,
                exponent: 0.5,
            },
            LossKind::PPower { p } => Eta {
                coef: p,
                exponent: 1.0 / p,
            },
        }
    }

    pub fn eval_eta(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::usage(format!("modulus argument must be >= 0, got {t}")));
        }
        Ok(self.eta_form().eval(t))
    }

    /// `r` such that the loss is `d(y, u)^r` for a metric `d`.
    pub fn metric_power(&self) -> f64 {
        match self.kind {
            LossKind::Squared => 2.0,
            LossKind::Absolute | LossKind::Hamming => 1.0,
            LossKind::PPower { p } => p,
        }
    }

    /// Whether the loss is a difference distortion `rho(y - u)`.
    pub fn is_difference(&self) -> bool {
        !matches!(self.kind, LossKind::Hamming)
    }
}

impl fmt::Display for LossFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LossKind::Squared => write!(f, "squared"),
            LossKind::Absolute => write!(f, "absolute"),
            LossKind::PPower { p } => write!(f, "p-power:{p}"),
            LossKind::Hamming => write!(f, "hamming"),
        }
    }
}

impl FromStr for LossFunction {
    type Err = Error;

    /// `squared`, `absolute`, `hamming`, or `p-power:<p>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(LossFunction::squared()),
            "absolute" => Ok(LossFunction::absolute()),
            "hamming" => Ok(LossFunction::hamming()),
            _ => match s.strip_prefix("p-power:") {
                Some(p) => LossFunction::p_power(
                    p.parse()
                        .map_err(|_| Error::usage(format!("bad exponent in {s:?}")))?,
                ),
                None => Err(Error::usage(format!(
                    "unknown loss {s:?} (expected squared, absolute, hamming, p-power:<p>)"
                ))),
            },
        }
    }
}
