//! Shadows built from measurement outcomes, batch planning, and the
//! median-of-batches observable estimate.

use crate::ensembles::RngStream;
use crate::error::{invalid, Result, ShadowError};
use crate::linalg::{trace_product, ComplexMatrix, HermitianMatrix, PureState, C64};
use crate::measurement::{measure_independent_batch, measure_joint, JointOutcome};
use crate::stats::median;

/// Trace tolerance for trace-one shadow kinds.
pub const SHADOW_TRACE_TOL: f64 = 1e-9;
/// Per-batch failure probability used by the default plans.
pub const DEFAULT_FAILURE_BUDGET: f64 = 0.25;
/// Constant in the per-batch variance bound `C (B d / s² + 1 / s)` of the
/// quadratic estimator.
pub const QUADRATIC_VARIANCE_CONSTANT: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShadowKind {
    /// `((d+s)ψψ† − I)/s` from one joint measurement of `s` copies.
    AffineJoint,
    /// `(d+1)ψψ† − I` from one copy, or an average of such shadows.
    LinearSingle,
    /// The ordered-pair product average; trace not fixed.
    Quadratic,
}

/// One batch estimate of the unknown state.
#[derive(Debug, Clone, PartialEq)]
pub struct Shadow {
    matrix: HermitianMatrix,
    kind: ShadowKind,
    s_used: usize,
}

impl Shadow {
    /// Checks the trace-one invariant for the affine and linear kinds.
    pub fn new(matrix: HermitianMatrix, kind: ShadowKind, s_used: usize) -> Result<Self> {
        if s_used == 0 {
            return Err(invalid("a shadow must use at least one copy"));
        }
        if kind != ShadowKind::Quadratic {
            let tr = matrix.trace();
            if (tr - 1.0).abs() > SHADOW_TRACE_TOL {
                return Err(invalid(format!(
                    "{kind:?} shadow has trace {tr}, expected 1"
                )));
            }
        }
        Ok(Self {
            matrix,
            kind,
            s_used,
        })
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> ShadowKind {
        self.kind
    }

    pub fn s_used(&self) -> usize {
        self.s_used
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `Tr(O ρ̂)`.
    pub fn estimate(&self, o: &HermitianMatrix) -> f64 {
        o.trace_with(&self.matrix)
    }
}

fn check_outcome_dim(outcome: &JointOutcome, d: usize) -> Result<()> {
    if outcome.dim() != d {
        return Err(ShadowError::DimensionMismatch(format!(
            "outcome has dimension {}, expected {d}",
            outcome.dim()
        )));
    }
    Ok(())
}

fn projector_affine(psi: &PureState, a: f64, b: f64) -> HermitianMatrix {
    // a·ψψ† − b·I
    let v = psi.amplitudes();
    let mut m: ComplexMatrix = v * v.adjoint() * C64::new(a, 0.0);
    for i in 0..psi.dim() {
        m[(i, i)] -= C64::new(b, 0.0);
    }
    HermitianMatrix::hermitize(m)
}

/// `((d+s)ψψ† − I)/s`.
pub fn affine_shadow(outcome: &JointOutcome, d: usize) -> Result<Shadow> {
    check_outcome_dim(outcome, d)?;
    let s = outcome.s() as f64;
    let m = projector_affine(outcome.psi(), (d as f64 + s) / s, 1.0 / s);
    Shadow::new(m, ShadowKind::AffineJoint, outcome.s())
}

/// `Tr(O ρ̂)` for the affine shadow, computed in `O(d²)` from the outcome
/// vector without forming the shadow.
pub fn affine_estimate(outcome: &JointOutcome, o: &HermitianMatrix) -> f64 {
    let d = outcome.dim() as f64;
    let s = outcome.s() as f64;
    ((d + s) * outcome.psi().expectation(o) - o.trace()) / s
}

/// `(d+1)ψψ† − I` for a single-copy outcome.
pub fn single_shadow(outcome: &JointOutcome) -> Result<Shadow> {
    if outcome.s() != 1 {
        return Err(invalid(format!(
            "single-copy shadow from an outcome with s = {}",
            outcome.s()
        )));
    }
    let d = outcome.dim() as f64;
    Shadow::new(
        projector_affine(outcome.psi(), d + 1.0, 1.0),
        ShadowKind::LinearSingle,
        1,
    )
}

/// Samples per batch `s`, batch count `k` (odd), and the per-batch failure
/// budget `p` the plan was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchPlan {
    pub s: usize,
    pub k: usize,
    pub p: f64,
}

impl BatchPlan {
    pub fn total(&self) -> usize {
        self.s * self.k
    }
}

fn check_budget_args(b: f64, eps: f64, delta: f64, p: f64) -> Result<()> {
    if !b.is_finite() || b < 1.0 {
        return Err(invalid(format!("B = {b} must be a finite value >= 1")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid(format!("epsilon = {eps} outside (0, 1]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta = {delta} outside (0, 1)")));
    }
    if !(p > 0.0 && p < 0.5) {
        return Err(invalid(format!(
            "per-batch failure budget {p} outside (0, 1/2)"
        )));
    }
    Ok(())
}

/// Smallest odd `k ≥ ln(1/δ) / ln((4p(1−p))^{−1/2})`.
pub fn batch_count(delta: f64, p: f64) -> Result<usize> {
    check_budget_args(1.0, 1.0, delta, p)?;
    let need = 2.0 * (1.0 / delta).ln() / (1.0 / (4.0 * p * (1.0 - p))).ln();
    let mut k = (need - 1e-12).ceil().max(1.0) as usize;
    if k.is_multiple_of(2) {
        k += 1;
    }
    Ok(k)
}

/// Smallest `s ≥ min_s` with `bound(s) ≤ p ε²`, by doubling then bisection.
/// `bound` must be non-increasing in `s`.
fn smallest_s(min_s: usize, target: f64, bound: impl Fn(f64) -> f64) -> usize {
    let ok = |s: usize| bound(s as f64) <= target;
    if ok(min_s) {
        return min_s;
    }
    let mut hi = min_s.max(1) * 2;
    while !ok(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2;
    // invariant: !ok(lo), ok(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Joint-measurement plan: `s` minimal with `(B + 8s)/s² ≤ p ε²` at
/// `p = 1/4`, and `k` from [`batch_count`].
pub fn plan_batches(b: f64, eps: f64, delta: f64) -> Result<BatchPlan> {
    plan_batches_with(b, eps, delta, DEFAULT_FAILURE_BUDGET)
}

pub fn plan_batches_with(b: f64, eps: f64, delta: f64, p: f64) -> Result<BatchPlan> {
    check_budget_args(b, eps, delta, p)?;
    let s = smallest_s(1, p * eps * eps, |s| (b + 8.0 * s) / (s * s));
    Ok(BatchPlan {
        s,
        k: batch_count(delta, p)?,
        p,
    })
}

/// Independent-measurement plan for the linear average: each single-copy
/// estimate has variance at most `B + 8`, so `s = ⌈(B + 8)/(p ε²)⌉`.
pub fn plan_linear(b: f64, eps: f64, delta: f64) -> Result<BatchPlan> {
    let p = DEFAULT_FAILURE_BUDGET;
    check_budget_args(b, eps, delta, p)?;
    let s = smallest_s(1, p * eps * eps, |s| (b + 8.0) / s);
    Ok(BatchPlan {
        s,
        k: batch_count(delta, p)?,
        p,
    })
}

/// Independent-measurement plan for the quadratic estimator: `s ≥ 2` minimal
/// with `16 (B d / s² + 1 / s) ≤ p ε²`.
pub fn plan_quadratic(b: f64, d: usize, eps: f64, delta: f64) -> Result<BatchPlan> {
    let p = DEFAULT_FAILURE_BUDGET;
    check_budget_args(b, eps, delta, p)?;
    if b > d as f64 {
        return Err(invalid(format!("B = {b} exceeds dimension {d}")));
    }
    let bd = b * d as f64;
    let s = smallest_s(2, p * eps * eps, |s| {
        QUADRATIC_VARIANCE_CONSTANT * (bd / (s * s) + 1.0 / s)
    });
    Ok(BatchPlan {
        s,
        k: batch_count(delta, p)?,
        p,
    })
}

/// The middle order statistic of `Tr(O ρ̂⁽ⁱ⁾)`.
pub fn median_estimate(o: &HermitianMatrix, shadows: &[Shadow]) -> Result<f64> {
    if shadows.is_empty() {
        return Err(ShadowError::Empty("median over no shadows"));
    }
    let values: Vec<f64> = shadows.iter().map(|sh| sh.estimate(o)).collect();
    median(&values)
}

fn check_same_kind(shadows: &[Shadow], kind: ShadowKind) -> Result<usize> {
    let first = shadows.first().ok_or(ShadowError::Empty("shadow list"))?;
    let d = first.dim();
    for sh in shadows {
        if sh.kind() != kind || sh.s_used() != 1 {
            return Err(invalid(format!("expected single-copy {kind:?} shadows")));
        }
        if sh.dim() != d {
            return Err(ShadowError::DimensionMismatch(
                "shadows of differing dimension".into(),
            ));
        }
    }
    Ok(d)
}

/// `X̂ = (1/s) Σ ρ̂_i` over single-copy shadows.
pub fn linear_mean_shadow(singles: &[Shadow]) -> Result<Shadow> {
    let d = check_same_kind(singles, ShadowKind::LinearSingle)?;
    let mut acc = ComplexMatrix::zeros(d, d);
    for sh in singles {
        acc += sh.matrix().as_matrix();
    }
    acc /= C64::new(singles.len() as f64, 0.0);
    Shadow::new(
        HermitianMatrix::hermitize(acc),
        ShadowKind::LinearSingle,
        singles.len(),
    )
}

/// `Ŷ = (1/(s(s−1))) Σ_{i≠j} ρ̂_i ρ̂_j`, evaluated as `(S² − Q)/(s(s−1))` with
/// `S = Σ ρ̂_i` and `Q = Σ ρ̂_i²`.
pub fn quadratic_shadow(singles: &[Shadow]) -> Result<Shadow> {
    let d = check_same_kind(singles, ShadowKind::LinearSingle)?;
    let s = singles.len();
    if s < 2 {
        return Err(invalid("the quadratic estimator needs s >= 2"));
    }
    let mut sum = ComplexMatrix::zeros(d, d);
    let mut sq = ComplexMatrix::zeros(d, d);
    for sh in singles {
        let m = sh.matrix().as_matrix();
        sum += m;
        sq += m * m;
    }
    let y = (&sum * &sum - sq) / C64::new((s * (s - 1)) as f64, 0.0);
    Shadow::new(HermitianMatrix::hermitize(y), ShadowKind::Quadratic, s)
}

/// [`quadratic_shadow`] straight from single-copy outcomes. With
/// `ρ̂_i = (d+1)Ψ_i − I` and `Ψ_i² = Ψ_i`, `S = (d+1)P − sI` and
/// `Q = (d²−1)P + sI` for `P = Σ Ψ_i`, so the cost is `O(s d² + d³)`.
pub fn quadratic_shadow_from_outcomes(outcomes: &[JointOutcome]) -> Result<Shadow> {
    let s = outcomes.len();
    if s < 2 {
        return Err(invalid("the quadratic estimator needs s >= 2"));
    }
    let d = outcomes[0].dim();
    let mut p = ComplexMatrix::zeros(d, d);
    for o in outcomes {
        check_outcome_dim(o, d)?;
        if o.s() != 1 {
            return Err(invalid("quadratic estimator takes single-copy outcomes"));
        }
        let v = o.psi().amplitudes();
        p.gerc(C64::new(1.0, 0.0), v, v, C64::new(1.0, 0.0));
    }
    let (df, sf) = (d as f64, s as f64);
    let mut sum = &p * C64::new(df + 1.0, 0.0);
    let mut sq = &p * C64::new(df * df - 1.0, 0.0);
    for i in 0..d {
        sum[(i, i)] -= C64::new(sf, 0.0);
        sq[(i, i)] += C64::new(sf, 0.0);
    }
    let y = (&sum * &sum - sq) / C64::new(sf * (sf - 1.0), 0.0);
    Shadow::new(HermitianMatrix::hermitize(y), ShadowKind::Quadratic, s)
}

/// `X̂` straight from single-copy outcomes.
pub fn linear_shadow_from_outcomes(outcomes: &[JointOutcome]) -> Result<Shadow> {
    let singles: Vec<Shadow> = outcomes.iter().map(single_shadow).collect::<Result<_>>()?;
    linear_mean_shadow(&singles)
}

/// `Tr(O Ŷ)` without forming `Ŷ`: with `P = Σ Ψ_i` as above,
/// `Tr(O S²) = (d+1)² Tr(OP²) − 2s(d+1) Tr(OP) + s² Tr(O)`.
pub fn quadratic_estimate(outcomes: &[JointOutcome], o: &HermitianMatrix) -> Result<f64> {
    let s = outcomes.len();
    if s < 2 {
        return Err(invalid("the quadratic estimator needs s >= 2"));
    }
    let d = o.dim();
    let mut p = ComplexMatrix::zeros(d, d);
    for out in outcomes {
        check_outcome_dim(out, d)?;
        let v = out.psi().amplitudes();
        p.gerc(C64::new(1.0, 0.0), v, v, C64::new(1.0, 0.0));
    }
    let (df, sf) = (d as f64, s as f64);
    let op = o.as_matrix() * &p;
    let tr_op = crate::linalg::trace(&op).re;
    let tr_opp = trace_product(&op, &p).re;
    let tr_o = o.trace();
    let tr_os2 = (df + 1.0).powi(2) * tr_opp - 2.0 * sf * (df + 1.0) * tr_op + sf * sf * tr_o;
    let tr_oq = (df * df - 1.0) * tr_op + sf * tr_o;
    Ok((tr_os2 - tr_oq) / (sf * (sf - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorChoice {
    Linear,
    Quadratic,
}

/// Quadratic iff `ε ≤ √(B/d)`; the boundary goes to quadratic.
pub fn choose_estimator(b: f64, d: usize, eps: f64) -> EstimatorChoice {
    if eps * eps * d as f64 <= b {
        EstimatorChoice::Quadratic
    } else {
        EstimatorChoice::Linear
    }
}

/// `√(8 |1 − E|)`: the trace-distance bound on a learned state implied by an
/// estimate `E` of `Tr(ρ ρ̂′)` at the observable `O = ρ`.
pub fn tomography_gap_bound(estimate: f64) -> f64 {
    (8.0 * (1.0 - estimate).abs()).sqrt()
}

/// Joint-measurement shadows: `k` batches, one `M_s` outcome each.
pub fn joint_shadows(
    phi: &PureState,
    plan: &BatchPlan,
    rng: &mut RngStream,
) -> Result<Vec<Shadow>> {
    (0..plan.k)
        .map(|_| affine_shadow(&measure_joint(phi, plan.s, rng)?, phi.dim()))
        .collect()
}

/// Median of `k` joint-measurement batch estimates of `Tr(Oρ)`.
pub fn estimate_joint(
    phi: &PureState,
    o: &HermitianMatrix,
    plan: &BatchPlan,
    rng: &mut RngStream,
) -> Result<f64> {
    let values: Vec<f64> = (0..plan.k)
        .map(|_| measure_joint(phi, plan.s, rng).map(|out| affine_estimate(&out, o)))
        .collect::<Result<_>>()?;
    median(&values)
}

/// Median of `k` independent-measurement batch estimates with the chosen
/// per-batch estimator.
pub fn estimate_independent(
    phi: &PureState,
    o: &HermitianMatrix,
    plan: &BatchPlan,
    choice: EstimatorChoice,
    rng: &mut RngStream,
) -> Result<f64> {
    let mut values = Vec::with_capacity(plan.k);
    for _ in 0..plan.k {
        let outcomes = measure_independent_batch(phi, plan.s, rng)?;
        let v = match choice {
            EstimatorChoice::Linear => {
                let d = phi.dim() as f64;
                let tr_o = o.trace();
                outcomes
                    .iter()
                    .map(|out| (d + 1.0) * out.psi().expectation(o) - tr_o)
                    .sum::<f64>()
                    / outcomes.len() as f64
            }
            EstimatorChoice::Quadratic => quadratic_estimate(&outcomes, o)?,
        };
        values.push(v);
    }
    median(&values)
}
