use serde::{Deserialize, Serialize};

use super::FiniteJoint;
use crate::error::{Error, Result};

/// KL divergence and variational distance between two pmfs on the same
/// alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    /// `D(p || q)` in nats; `+inf` when `p` is not absolutely continuous
    /// with respect to `q`.
    pub kl_nats: f64,
    /// `sum |p - q|`, which equals `2 sup_A |P(A) - Q(A)|`; in `[0, 2]`.
    pub dv: f64,
}

impl Divergence {
    pub fn kl_bits(&self) -> f64 {
        self.kl_nats / std::f64::consts::LN_2
    }

    /// `sqrt(2 * kl)`, the Pinsker upper bound on `dv`.
    pub fn pinsker_bound(&self) -> f64 {
        (2.0 * self.kl_nats).sqrt()
    }
}

pub fn kl_and_variational(p: &[f64], q: &[f64]) -> Result<Divergence> {
    if p.len() != q.len() {
        return Err(Error::usage(format!(
            "alphabet sizes differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    let mut kl = 0.0;
    let mut dv = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        dv += (a - b).abs();
        if a > 0.0 {
            if b > 0.0 {
                kl += a * (a / b).ln();
            } else {
                kl = f64::INFINITY;
            }
        }
    }
    Ok(Divergence {
        kl_nats: kl.max(0.0),
        dv,
    })
}

/// [`kl_and_variational`] for two joints, which must share both alphabets.
pub fn kl_and_variational_joint(p: &FiniteJoint, q: &FiniteJoint) -> Result<Divergence> {
    if !p.same_alphabets(q) {
        return Err(Error::usage("joints are defined on different alphabets"));
    }
    kl_and_variational(p.pmf(), q.pmf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_zero() {
        let d = kl_and_variational(&[0.2, 0.3, 0.5], &[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(d.kl_nats, 0.0);
        assert_eq!(d.dv, 0.0);
    }

    #[test]
    fn skewed_coin_against_fair() {
        let d = kl_and_variational(&[0.9, 0.1], &[0.5, 0.5]).unwrap();
        assert!((d.dv - 0.8).abs() < 1e-15);
        // long-summation oracle: ln via series ln(1+u) = sum (-1)^{k+1} u^k / k
        let ln = |x: f64| {
            // x in (0, 2); use atanh series ln x = 2 atanh((x-1)/(x+1))
            let z = (x - 1.0) / (x + 1.0);
            let mut term = z;
            let mut s = 0.0;
            for k in 0..200 {
                s += term / (2 * k + 1) as f64;
                term *= z * z;
            }
            2.0 * s
        };
        let oracle = 0.9 * ln(1.8) + 0.1 * ln(0.2);
        assert!((d.kl_nats - oracle).abs() < 1e-14, "{} vs {oracle}", d.kl_nats);
        assert!(d.dv <= d.pinsker_bound() + 1e-9);
    }

    #[test]
    fn missing_support_is_infinite() {
        let d = kl_and_variational(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!(d.kl_nats.is_infinite());
        assert!((d.dv - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mismatched_alphabets() {
        assert!(matches!(
            kl_and_variational(&[1.0], &[0.5, 0.5]),
            Err(Error::Usage(_))
        ));
        let a = FiniteJoint::single_source(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let b = FiniteJoint::single_source(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(kl_and_variational_joint(&a, &b).is_err());
    }
}
