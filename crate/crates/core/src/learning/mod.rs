//! Finite hypothesis grids, empirical risk minimization, exact regression
//! risk and constructive covering numbers.

mod checks;
mod covering;
mod erm;
mod grid;

pub use checks::{
    family_net_from_function_net, max_risk_deviation, modulus_soundness_check, moment_check, ulln_sweep,
    FamilyNet, PairCheck, UllnRow,
};
pub use covering::{covering_count, covering_number, CoverCount, LipschitzClass, Norm};
pub use erm::{best_in_class_regression, empirical_risk, erm, erm_exhaustive, true_risk_regression, ErmResult};
pub use grid::HypothesisGrid;
