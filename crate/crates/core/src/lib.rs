//! Balanced risk estimation for severely imbalanced binary classification:
//! weighted empirical measures, balanced k-NN, constrained balanced ERM,
//! explicit generalization-bound calculators and the experiment harness.

pub mod bounds;
pub mod cli;
pub mod data;
pub mod erm;
pub mod error;
pub mod experiments;
pub mod knn;
pub mod measures;
pub mod numeric;
pub mod par;
pub mod rng;

pub use error::{Error, Result};
pub use measures::{Label, LabeledDataset, WeightParam, Weighting};
