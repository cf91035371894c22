//! Boolean Hidden Matching instances and the one-way protocol that solves
//! them with joint-measurement shadows.
//!
//! Alice holds `x` and prepares copies of `ψ_x`; Bob holds the matching and
//! `w`, builds the projector `O_y`, and rounds the shadow estimate of
//! `Tr(O_y ρ_x) = 2αb`. The two sides only meet through [`AliceMessage`].

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ensembles::RngStream;
use crate::error::{invalid, Result, ShadowError};
use crate::estimators::{joint_shadows, median_estimate, plan_batches, BatchPlan, Shadow};
use crate::linalg::{ComplexMatrix, ComplexVector, HermitianMatrix, PureState, C64};
use crate::observables::Observable;

/// Validates `α n` as an integer edge count with `2αn ≤ n`.
pub fn edge_count(n: usize, alpha: f64) -> Result<usize> {
    if n < 2 {
        return Err(ShadowError::Infeasible(format!("n = {n} < 2")));
    }
    if !(alpha > 0.0 && alpha <= 0.25) {
        return Err(ShadowError::Infeasible(format!(
            "alpha = {alpha} outside (0, 1/4]"
        )));
    }
    let edges = alpha * n as f64;
    let rounded = edges.round();
    if (edges - rounded).abs() > 1e-9 || rounded < 1.0 {
        return Err(ShadowError::Infeasible(format!(
            "alpha * n = {edges} is not a positive integer"
        )));
    }
    let edges = rounded as usize;
    if 2 * edges > n {
        return Err(ShadowError::Infeasible(format!(
            "{edges} edges need {} > {n} vertices",
            2 * edges
        )));
    }
    Ok(edges)
}

fn check_matching(n: usize, matching: &[(usize, usize)]) -> Result<()> {
    let mut used = vec![false; n];
    for &(i, j) in matching {
        for v in [i, j] {
            if v >= n {
                return Err(ShadowError::IndexOutOfRange { index: v, size: n });
            }
            if used[v] {
                return Err(ShadowError::Infeasible(format!(
                    "vertex {v} is matched twice"
                )));
            }
            used[v] = true;
        }
    }
    Ok(())
}

/// Alice's input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliceInput {
    pub x: Vec<bool>,
}

/// Bob's input `y = (M, w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BobInput {
    pub n: usize,
    pub alpha: f64,
    pub matching: Vec<(usize, usize)>,
    pub w: Vec<bool>,
}

/// A promise-satisfying instance: `b = x_i ⊕ x_j ⊕ w_k` on every edge `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BhmInstance {
    n: usize,
    alpha: f64,
    x: Vec<bool>,
    matching: Vec<(usize, usize)>,
    w: Vec<bool>,
    b: bool,
}

impl BhmInstance {
    /// Validates the instance and recovers the promise bit.
    pub fn new(
        n: usize,
        alpha: f64,
        x: Vec<bool>,
        matching: Vec<(usize, usize)>,
        w: Vec<bool>,
    ) -> Result<Self> {
        let edges = edge_count(n, alpha)?;
        if x.len() != n {
            return Err(ShadowError::DimensionMismatch(format!(
                "x has {} bits, expected {n}",
                x.len()
            )));
        }
        if matching.len() != edges || w.len() != edges {
            return Err(ShadowError::DimensionMismatch(format!(
                "{} edges and {} labels, expected {edges}",
                matching.len(),
                w.len()
            )));
        }
        check_matching(n, &matching)?;
        let parity = |k: usize| x[matching[k].0] ^ x[matching[k].1] ^ w[k];
        let b = parity(0);
        if let Some(k) = (1..edges).find(|&k| parity(k) != b) {
            return Err(ShadowError::PromiseViolated(k));
        }
        Ok(Self {
            n,
            alpha,
            x,
            matching,
            w,
            b,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn x(&self) -> &[bool] {
        &self.x
    }

    pub fn matching(&self) -> &[(usize, usize)] {
        &self.matching
    }

    pub fn w(&self) -> &[bool] {
        &self.w
    }

    pub fn b(&self) -> bool {
        self.b
    }

    pub fn split(&self) -> (AliceInput, BobInput) {
        (
            AliceInput { x: self.x.clone() },
            BobInput {
                n: self.n,
                alpha: self.alpha,
                matching: self.matching.clone(),
                w: self.w.clone(),
            },
        )
    }
}

/// Uniform `x`, a uniform matching of `αn` edges (shuffle the vertices and
/// pair the first `2αn`), and `w_k = b ⊕ x_i ⊕ x_j`.
pub fn gen_instance(n: usize, alpha: f64, b: bool, rng: &mut RngStream) -> Result<BhmInstance> {
    let edges = edge_count(n, alpha)?;
    let x: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
    let mut vertices: Vec<usize> = (0..n).collect();
    vertices.shuffle(rng);
    let matching: Vec<(usize, usize)> = (0..edges)
        .map(|k| (vertices[2 * k], vertices[2 * k + 1]))
        .collect();
    let w = matching.iter().map(|&(i, j)| b ^ x[i] ^ x[j]).collect();
    BhmInstance::new(n, alpha, x, matching, w)
}

/// `|ψ_x⟩ = n^{−1/2} Σ_i (−1)^{x_i} |i⟩`.
pub fn state_psi_x(x: &[bool]) -> Result<PureState> {
    if x.len() < 2 {
        return Err(invalid("psi_x needs at least two bits"));
    }
    let amp = 1.0 / (x.len() as f64).sqrt();
    PureState::new(ComplexVector::from_iterator(
        x.len(),
        x.iter()
            .map(|&bit| C64::new(if bit { -amp } else { amp }, 0.0)),
    ))
}

/// `O_y = Σ_k ½(|i_k⟩ − (−1)^{w_k}|j_k⟩)(⟨i_k| − (−1)^{w_k}⟨j_k|)`, embedded in
/// dimension `dim ≥ n` on the first `n` coordinates.
pub fn observable_o_y(bob: &BobInput, dim: usize) -> Result<Observable> {
    let edges = edge_count(bob.n, bob.alpha)?;
    if bob.matching.len() != edges || bob.w.len() != edges {
        return Err(ShadowError::DimensionMismatch(
            "matching and labels disagree with alpha * n".into(),
        ));
    }
    if dim < bob.n {
        return Err(ShadowError::DimensionMismatch(format!(
            "dimension {dim} below n = {}",
            bob.n
        )));
    }
    check_matching(bob.n, &bob.matching)?;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (&(i, j), &wk) in bob.matching.iter().zip(&bob.w) {
        // off-diagonal entry −(−1)^{w_k}/2
        let cj = if wk { 1.0 } else { -1.0 };
        m[(i, i)] += C64::new(0.5, 0.0);
        m[(j, j)] += C64::new(0.5, 0.0);
        m[(i, j)] += C64::new(0.5 * cj, 0.0);
        m[(j, i)] += C64::new(0.5 * cj, 0.0);
    }
    Observable::new(HermitianMatrix::new(m)?, edges as f64)
}

/// `Tr(O_y ρ_x)` from the matrices.
pub fn expected_value(instance: &BhmInstance) -> Result<f64> {
    let (alice, bob) = instance.split();
    let psi = state_psi_x(&alice.x)?;
    Ok(psi.expectation(observable_o_y(&bob, instance.n)?.matrix()))
}

/// `(1/n) Σ_k (1 − (−1)^{x_i ⊕ x_j ⊕ w_k})`, the same value from parities.
pub fn parity_value(instance: &BhmInstance) -> f64 {
    let hits = instance
        .matching
        .iter()
        .zip(&instance.w)
        .filter(|(&(i, j), &wk)| instance.x[i] ^ instance.x[j] ^ wk)
        .count();
    2.0 * hits as f64 / instance.n as f64
}

/// Rounds `E/(2α)` to a bit: below ½ gives 0, ½ and above give 1.
pub fn round_guess(estimate: f64, alpha: f64) -> bool {
    estimate / (2.0 * alpha) >= 0.5
}

/// What Alice sends: the shadows and the number of copies they consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct AliceMessage {
    pub shadows: Vec<Shadow>,
    pub samples_used: usize,
}

/// The plan both sides agree on: `B = αn`, `ε = α`.
pub fn protocol_plan(n: usize, alpha: f64, delta: f64) -> Result<BatchPlan> {
    let edges = edge_count(n, alpha)?;
    plan_batches(edges as f64, alpha, delta)
}

/// Alice measures `k` batches of `ψ_x^{⊗s}`, optionally padded to a larger
/// dimension, and builds the affine shadows.
pub fn alice_measure(
    alice: &AliceInput,
    plan: &BatchPlan,
    pad_to: Option<usize>,
    rng: &mut RngStream,
) -> Result<AliceMessage> {
    let mut psi = state_psi_x(&alice.x)?;
    if let Some(dim) = pad_to {
        psi = psi.padded(dim)?;
    }
    let shadows = joint_shadows(&psi, plan, rng)?;
    Ok(AliceMessage {
        shadows,
        samples_used: plan.total(),
    })
}

/// Bob's decision from the median estimate of `Tr(O_y ρ̂)`.
pub fn bob_decide(bob: &BobInput, message: &AliceMessage) -> Result<bool> {
    let dim = message
        .shadows
        .first()
        .ok_or(ShadowError::Empty("Alice's message"))?
        .dim();
    let o = observable_o_y(bob, dim)?;
    Ok(round_guess(
        median_estimate(o.matrix(), &message.shadows)?,
        bob.alpha,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolRun {
    pub guess: bool,
    pub samples_used: usize,
}

pub fn run_protocol(
    instance: &BhmInstance,
    delta: f64,
    rng: &mut RngStream,
) -> Result<ProtocolRun> {
    run_protocol_padded(instance, delta, None, rng)
}

pub fn run_protocol_padded(
    instance: &BhmInstance,
    delta: f64,
    pad_to: Option<usize>,
    rng: &mut RngStream,
) -> Result<ProtocolRun> {
    let (alice, bob) = instance.split();
    let plan = protocol_plan(instance.n, instance.alpha, delta)?;
    let message = alice_measure(&alice, &plan, pad_to, rng)?;
    Ok(ProtocolRun {
        guess: bob_decide(&bob, &message)?,
        samples_used: message.samples_used,
    })
}
