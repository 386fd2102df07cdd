use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DobrushinTrend {
    pub c: f64,
    /// `log2(H(eps) / 2^(c / eps))` at every sampled `eps`, in input order.
    pub log2_ratios: Vec<f64>,
    /// The ratio never increases as `eps` shrinks over the sampled range.
    pub decreasing: bool,
}

/// Finite-`eps` look at the entropy condition `H(eps) / 2^(c/eps) -> 0`.
///
/// This only reports the trend of the ratio over the sampled values of
/// `eps`; it says nothing about the limit. Samples are `(eps, H(eps))`
/// pairs with `eps` strictly decreasing and `H` in bits. Ratios are kept in
/// the log domain since `2^(c/eps)` overflows quickly.
pub fn dobrushin_diagnostic(samples: &[(f64, f64)], c_values: &[f64]) -> Result<Vec<DobrushinTrend>> {
    if samples.len() < 3 {
        return Err(Error::usage(format!(
            "need at least 3 (eps, H) samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 < w[0].0)) || samples.iter().any(|s| !(s.0 > 0.0)) {
        return Err(Error::usage("eps values must be positive and strictly decreasing"));
    }
    if samples.iter().any(|s| !(s.1 >= 0.0)) {
        return Err(Error::usage("entropies must be >= 0"));
    }
    c_values
        .iter()
        .map(|&c| {
            if !(c > 0.0) {
                return Err(Error::usage(format!("c must be > 0, got {c}")));
            }
            let log2_ratios: Vec<f64> = samples.iter().map(|&(eps, h)| h.log2() - c / eps).collect();
            let decreasing = log2_ratios.windows(2).all(|w| w[1] <= w[0]);
            Ok(DobrushinTrend {
                c,
                log2_ratios,
                decreasing,
            })
        })
        .collect()
}
