//! Binary classification from uncertain similarity triplets and unlabeled
//! data.
//!
//! An uncertain similarity triplet `(x, {x', x''})` guarantees only that at
//! least two of its three instances share a class label. Together with a
//! pool of unlabeled instances and a known class prior, the supervised
//! classification risk can be rewritten as a combination of two pointwise
//! losses, one averaged over the disassembled triplets and one over the
//! unlabeled pool. This crate provides:
//!
//! - [`types`]: priors, labels, feature vectors, triplets, loss and correction kinds.
//! - [`risk`]: the mixing coefficients, corrected losses, empirical risk and its gradient,
//!   and exact discrete-domain risks.
//! - [`sampler`]: triplet and unlabeled-pool generation from labeled sources.
//! - [`model`]: linear and one-hidden-layer scorers with analytic gradients, plus Adam.
//! - [`trainer`]: the mini-batch training loop and a fully supervised reference.
//! - [`eval`]: accuracy and the prior, data-fraction and correction sweeps.
//! - [`verify`]: enumeration, Monte Carlo and finite-difference oracles.
//! - [`io`]: the on-disk record formats.
//!
//! Heavy loops (sweeps, Monte Carlo, enumeration) run on rayon when the
//! `parallel` feature is enabled and sequentially otherwise; results are
//! identical either way.

pub mod error;
pub mod eval;
pub mod io;
pub mod model;
pub mod parallel;
pub mod risk;
pub mod sampler;
pub mod seed;
pub mod trainer;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
pub use model::{AdamState, LinearModel, MlpModel, ModelKind, Scorer};
pub use risk::{RiskValue, Thetas};
pub use seed::Seed;
pub use types::{
    ClassPrior, CorrectionKind, FeatureVector, Label, LabeledExample, LossKind, LossSpec,
    UncertainTriplet, WeakDataset,
};
