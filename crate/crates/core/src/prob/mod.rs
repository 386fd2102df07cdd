//! Finite-alphabet probability objects and exact information measures.
//!
//! All entropies and mutual informations are in bits. KL divergence is
//! reported in nats (with a bits accessor) because the Gaussian-family
//! identities are usually stated that way.

mod divergence;
mod gaussian;
mod joint;
mod multivar;

pub use divergence::{kl_and_variational, kl_and_variational_joint, Divergence};
pub use gaussian::{
    discretize_family, discretize_regression, normal_interval_mass, DiscretizationSpec,
    RegressionModel,
};
pub use joint::{entropy_bits, mutual_information_bits, FiniteJoint, Selector, XSymbol};
pub use multivar::MultiPmf;

/// Tolerance for pmf construction (sums and marginals).
pub const PMF_TOL: f64 = 1e-12;

/// `-p log2 p` with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn neg_p_log2_p(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}
