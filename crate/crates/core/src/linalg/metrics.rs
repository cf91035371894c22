use super::{trace_product, HermitianMatrix, PureState, EIGEN_TOL};
use crate::error::{Result, ShadowError};

const DENSITY_TOL: f64 = 1e-8;

fn check_same_dim(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(ShadowError::DimensionMismatch(format!(
            "operands of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

fn looks_like_density(m: &HermitianMatrix) -> bool {
    (m.trace() - 1.0).abs() <= DENSITY_TOL && m.eigenvalues()[0] >= -DENSITY_TOL
}

/// `½‖ρ − σ‖₁`. Inputs that are not density matrices are still accepted; the
/// value is computed all the same and a warning is logged.
pub fn trace_distance(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    if !looks_like_density(rho) || !looks_like_density(sigma) {
        log::warn!("trace_distance called on operands that are not density matrices");
    }
    Ok(0.5 * rho.sub(sigma).trace_norm())
}

/// `√(1 − |⟨ψ|φ⟩|²)`, the trace distance between two pure states.
pub fn trace_distance_pure(a: &PureState, b: &PureState) -> f64 {
    (1.0 - a.inner(b).norm_sqr()).max(0.0).sqrt()
}

/// `Tr(ρσ) = F(ρ, σ)²` when either argument is pure.
pub fn pure_overlap_fidelity(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> f64 {
    rho.trace_with(sigma)
}

/// `F(ρ, σ) = Tr √(√ρ σ √ρ)` for PSD inputs.
pub fn fidelity(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let (vals, vecs) = rho.eigh();
    let sqrt_vals: Vec<f64> = vals.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let root = HermitianMatrix::hermitize(
        &vecs * HermitianMatrix::from_real_diagonal(&sqrt_vals).as_matrix() * vecs.adjoint(),
    );
    let inner = HermitianMatrix::hermitize(root.as_matrix() * sigma.as_matrix() * root.as_matrix());
    Ok(inner
        .eigenvalues()
        .iter()
        .map(|&v| if v > EIGEN_TOL { v.sqrt() } else { 0.0 })
        .sum())
}

/// Whether `|Tr((Oρ)²) − Tr(Oρ)²| ≤ 1e-9`, which holds for every pure `ρ`.
pub fn purity_trace_identity_check(rho: &HermitianMatrix, op: &HermitianMatrix) -> bool {
    let o_rho = op.as_matrix() * rho.as_matrix();
    let lhs = trace_product(&o_rho, &o_rho).re;
    let rhs = super::trace(&o_rho).re.powi(2);
    (lhs - rhs).abs() <= 1e-9
}
