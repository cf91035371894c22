//! Simulation and verification toolkit for pure-state classical shadows.
//!
//! The crate simulates the symmetric joint measurement on `s` copies of a pure
//! state, the single-copy Haar measurement, the estimators built from their
//! outcomes, and the Boolean Hidden Matching reduction. Every closed-form
//! moment used by the estimators has an exact brute-force counterpart in
//! [`moments`] so the formulas can be checked independently of the sampler.

pub mod bhm;
pub mod ensembles;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod linalg;
pub mod measurement;
pub mod moments;
pub mod observables;
pub mod par;
pub mod stats;

pub use error::{Result, ShadowError};
pub use linalg::{ComplexMatrix, HermitianMatrix, Permutation, PureState, C64};
