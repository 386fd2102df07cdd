//! Statistical learning from rate-compressed observations with side
//! information.
//!
//! The training inputs `X^n` are seen exactly; the outputs `Y^n` reach the
//! learner through a fixed-rate encoder/decoder pair that may use `X^n` at
//! both ends. The crate computes conditional rate-distortion curves, builds
//! operational scalar codecs, runs ERM on the decoded outputs, evaluates the
//! resulting achievability bounds and checks the supporting inequality chains
//! on concrete instances.
//!
//! | module | contents |
//! |---|---|
//! | [`prob`] | finite joints, entropies, mutual information, KL and variational distance, Gaussian discretization |
//! | [`rd`] | Blahut–Arimoto with side information, curves, inversion, Gaussian closed form, worst case over a family |
//! | [`codec`] | uniform, Lloyd–Max, conditional Lloyd–Max and pilot-shift codecs; packed index blocks |
//! | [`learning`] | hypothesis grids, ERM, exact regression risk, covering numbers |
//! | [`analysis`] | bound formulas, per-realization proof chains, converse chain verifier, entropy-condition trend |
//! | [`experiment`] | seeded trials and sweeps with CSV/JSON reports |
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod codec;
pub mod error;
pub mod experiment;
pub mod function;
pub mod learning;
pub mod loss;
pub mod prob;
pub mod rd;

pub use error::{Error, Result};
pub use function::Function1D;
pub use loss::{Eta, LossFunction, LossKind};
