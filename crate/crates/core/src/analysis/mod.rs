//! Bound evaluation and exhaustive checks of the inequality chains.

mod appendix;
mod bounds;
mod chain;
mod dobrushin;

pub use appendix::{
    appendix_chain_verify, appendix_curve, verify_appendix, AppendixCap, AppendixInstance, AppendixReport,
    DominanceRow, Learner, Scheme,
};
pub use bounds::{
    bound_report, calibrate_c_prime, finite_sample_bound, theorem1_bound, theorem2_bound, theorem3_bound, BoundReport,
    CPrimeFit, Measured, Remark2Terms,
};
pub use chain::{proof_chain_check, ChainReport, ChainStep, Relation};
pub use dobrushin::{dobrushin_diagnostic, DobrushinTrend};
