//! The two measurement primitives: the symmetric joint measurement on `s`
//! copies and the single-copy Haar measurement.
//!
//! Outcomes are drawn from their exact law instead of building the `d^s`
//! dimensional POVM. For pure input the fail element has zero weight, so it
//! is never produced.

use crate::ensembles::{sample_posterior_state, RngStream};
use crate::error::{invalid, Result};
use crate::linalg::{HermitianMatrix, PureState};

/// Purity tolerance `‖ρ² − ρ‖` for density-matrix input.
pub const PURITY_TOL: f64 = 1e-8;

/// The classical record of one measurement: the outcome state and the number
/// of copies it consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOutcome {
    psi: PureState,
    s: usize,
}

impl JointOutcome {
    pub fn new(psi: PureState, s: usize) -> Result<Self> {
        if s == 0 {
            return Err(invalid("an outcome must consume at least one copy"));
        }
        Ok(Self { psi, s })
    }

    pub fn psi(&self) -> &PureState {
        &self.psi
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }
}

/// Measures `φ^{⊗s}` with the symmetric joint measurement.
pub fn measure_joint(phi: &PureState, s: usize, rng: &mut RngStream) -> Result<JointOutcome> {
    if s == 0 {
        return Err(invalid("joint measurement needs s >= 1"));
    }
    JointOutcome::new(sample_posterior_state(phi, s, rng)?, s)
}

/// Measures one copy of `φ`.
pub fn measure_independent(phi: &PureState, rng: &mut RngStream) -> Result<JointOutcome> {
    measure_joint(phi, 1, rng)
}

/// `s` independent single-copy measurements of `φ`.
pub fn measure_independent_batch(
    phi: &PureState,
    s: usize,
    rng: &mut RngStream,
) -> Result<Vec<JointOutcome>> {
    (0..s).map(|_| measure_independent(phi, rng)).collect()
}

/// [`measure_joint`] for a density-matrix input, which must be pure.
pub fn measure_joint_density(
    rho: &HermitianMatrix,
    s: usize,
    rng: &mut RngStream,
) -> Result<JointOutcome> {
    let phi = PureState::from_density(rho, PURITY_TOL)?;
    measure_joint(&phi, s, rng)
}
