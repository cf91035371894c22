//! Seeded samplers for Haar-random states and for the outcome law of the
//! symmetric joint measurement.
//!
//! Measuring `φ^{⊗s}` with the symmetric joint measurement yields `ψ` with
//! density `κ_s |⟨ψ|φ⟩|^{2s}` relative to Haar. Writing
//! `ψ = e^{iθ}√t φ + √(1−t) χ`, the Haar marginal of `t` is
//! `(d−1)(1−t)^{d−2}`; reweighting by `t^s` gives `t ~ Beta(s+1, d−1)`, while
//! `θ` stays uniform and `χ` stays Haar on the orthogonal complement of `φ`.

use std::f64::consts::TAU;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Result, ShadowError};
use crate::linalg::{ComplexVector, PureState, C64};

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Distinct stream ids under one seed are independent ChaCha streams, so every
/// Monte Carlo trial can own its stream regardless of scheduling order.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream derived from this one's seed, for nested work that must
    /// not perturb the parent sequence.
    pub fn fork(&self, stream_id: u64) -> Self {
        Self::new(self.seed ^ 0x9e37_79b9_7f4a_7c15, stream_id)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Squared overlap `t = |⟨ψ|φ⟩|²` and relative phase `θ` of a sampled outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapSample {
    pub t: f64,
    pub theta: f64,
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(ShadowError::InvalidArgument(format!("dimension {d} < 2")));
    }
    Ok(())
}

pub(crate) fn gaussian_vector(d: usize, rng: &mut RngStream) -> ComplexVector {
    ComplexVector::from_fn(d, |_, _| {
        C64::new(rng.standard_normal(), rng.standard_normal())
    })
}

/// A Haar-random pure state: a normalized vector of i.i.d. complex Gaussians.
pub fn sample_haar_state(d: usize, rng: &mut RngStream) -> Result<PureState> {
    check_dim(d)?;
    loop {
        let v = gaussian_vector(d, rng);
        let norm = v.norm();
        if norm > 1e-12 {
            return PureState::new(v.unscale(norm));
        }
    }
}

/// Samples `t ~ Beta(s+1, d−1)` as a ratio of Gamma variates, and `θ`
/// uniform on `[0, 2π)`.
pub fn sample_posterior_overlap(s: usize, d: usize, rng: &mut RngStream) -> Result<OverlapSample> {
    check_dim(d)?;
    let near =
        Gamma::new((s + 1) as f64, 1.0).map_err(|e| ShadowError::InvalidArgument(e.to_string()))?;
    let far =
        Gamma::new((d - 1) as f64, 1.0).map_err(|e| ShadowError::InvalidArgument(e.to_string()))?;
    let g_near: f64 = near.sample(rng);
    let g_far: f64 = far.sample(rng);
    let t = (g_near / (g_near + g_far)).clamp(0.0, 1.0);
    let theta = TAU * rng.uniform();
    Ok(OverlapSample { t, theta })
}

/// A Haar-random unit vector orthogonal to `phi`.
pub fn sample_orthogonal_direction(phi: &PureState, rng: &mut RngStream) -> Result<ComplexVector> {
    let d = phi.dim();
    check_dim(d)?;
    let amps = phi.amplitudes();
    loop {
        let v = gaussian_vector(d, rng);
        let residual = &v - amps * amps.dotc(&v);
        let norm = residual.norm();
        if norm > 1e-12 {
            return Ok(residual.unscale(norm));
        }
    }
}

/// One outcome of the symmetric joint measurement on `φ^{⊗s}`, with the
/// overlap sample it was built from.
pub fn sample_posterior_state_with_overlap(
    phi: &PureState,
    s: usize,
    rng: &mut RngStream,
) -> Result<(PureState, OverlapSample)> {
    let overlap = sample_posterior_overlap(s, phi.dim(), rng)?;
    let chi = sample_orthogonal_direction(phi, rng)?;
    let along = C64::from_polar(overlap.t.sqrt(), overlap.theta);
    let across = C64::new((1.0 - overlap.t).sqrt(), 0.0);
    let psi = phi.amplitudes() * along + chi * across;
    Ok((PureState::normalized(psi)?, overlap))
}

pub fn sample_posterior_state(phi: &PureState, s: usize, rng: &mut RngStream) -> Result<PureState> {
    sample_posterior_state_with_overlap(phi, s, rng).map(|(psi, _)| psi)
}
