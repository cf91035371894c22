//! Observables in `Obs(B)`, traceless reductions, and optimal two-state
//! distinguishers.

use crate::ensembles::{gaussian_vector, RngStream};
use crate::error::{invalid, Result, ShadowError};
use crate::linalg::{ComplexMatrix, ComplexVector, HermitianMatrix, C64, EIGEN_TOL};

/// Tolerance on `‖O‖ = 1` and `Tr(O²) ≤ B`.
pub const OBSERVABLE_TOL: f64 = 1e-9;
/// Below this trace distance two states count as equal.
pub const DISTINGUISH_TOL: f64 = 1e-10;

/// A Hermitian observable with `‖O‖ = 1` and `Tr(O²) ≤ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: HermitianMatrix,
    budget: f64,
}

impl Observable {
    pub fn new(matrix: HermitianMatrix, budget: f64) -> Result<Self> {
        let d = matrix.dim() as f64;
        if !(budget >= 1.0 && budget <= d + OBSERVABLE_TOL) {
            return Err(invalid(format!("budget B = {budget} outside [1, {d}]")));
        }
        let norm = matrix.operator_norm();
        if (norm - 1.0).abs() > OBSERVABLE_TOL {
            return Err(invalid(format!(
                "observable has operator norm {norm}, expected 1"
            )));
        }
        let fro = matrix.frobenius_sq();
        if fro > budget + OBSERVABLE_TOL {
            return Err(invalid(format!("Tr(O^2) = {fro} exceeds budget {budget}")));
        }
        Ok(Self { matrix, budget })
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> HermitianMatrix {
        self.matrix
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// `r` orthonormal columns spanning a Haar-random `r`-dimensional subspace,
/// by Gram–Schmidt on complex Gaussian columns.
pub fn random_orthonormal_columns(
    d: usize,
    r: usize,
    rng: &mut RngStream,
) -> Result<ComplexMatrix> {
    if r == 0 || r > d {
        return Err(invalid(format!("rank {r} outside 1..={d}")));
    }
    let mut cols: Vec<ComplexVector> = Vec::with_capacity(r);
    while cols.len() < r {
        let mut v = gaussian_vector(d, rng);
        // two passes keep the basis orthonormal to machine precision
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-10 {
            cols.push(v.unscale(norm));
        }
    }
    Ok(ComplexMatrix::from_columns(&cols))
}

fn from_spectrum(u: &ComplexMatrix, eigen: &[f64]) -> HermitianMatrix {
    let d = u.nrows();
    let mut m = ComplexMatrix::zeros(d, d);
    for (k, &lam) in eigen.iter().enumerate() {
        let c = u.column(k);
        m += c * c.adjoint() * C64::new(lam, 0.0);
    }
    HermitianMatrix::hermitize(m)
}

/// `U P_r U†` for a Haar-random rank-`r` subspace. `Tr(O²) = r`, `‖O‖ = 1`.
pub fn random_projector_observable(d: usize, r: usize, rng: &mut RngStream) -> Result<Observable> {
    let u = random_orthonormal_columns(d, r, rng)?;
    Observable::new(from_spectrum(&u, &vec![1.0; r]), r as f64)
}

/// A random element of `Obs(B)`: a rank-`⌊B⌋` projector.
pub fn random_observable(d: usize, b: f64, rng: &mut RngStream) -> Result<Observable> {
    if !(b >= 1.0 && b <= d as f64) {
        return Err(invalid(format!("B = {b} outside [1, {d}]")));
    }
    let r = b.floor() as usize;
    let o = random_projector_observable(d, r, rng)?;
    Ok(Observable { budget: b, ..o })
}

/// `U diag(+1, −1, +1, …, 0, …) U†` with `r` nonzero eigenvalues of
/// alternating sign: `Tr(O²) = r`, and `Tr(O) = 0` for even `r`.
pub fn random_sign_observable(d: usize, r: usize, rng: &mut RngStream) -> Result<Observable> {
    let u = random_orthonormal_columns(d, r, rng)?;
    let eigen: Vec<f64> = (0..r)
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    Observable::new(from_spectrum(&u, &eigen), r as f64)
}

/// `O₀ = O − Tr(O) I/d`.
pub fn traceless_part(o: &HermitianMatrix) -> HermitianMatrix {
    let d = o.dim();
    let shift = o.trace() / d as f64;
    let mut m = o.as_matrix().clone();
    for i in 0..d {
        m[(i, i)] -= C64::new(shift, 0.0);
    }
    HermitianMatrix::hermitize(m)
}

/// An optimal distinguisher for a pair of states.
#[derive(Debug, Clone, PartialEq)]
pub struct Distinguisher {
    pub observable: Observable,
    /// `|Tr(O(ρ − σ))|`, equal to the trace distance.
    pub gap: f64,
    /// `true` for the projector onto the positive eigenspace of `ρ − σ`.
    pub positive: bool,
}

/// The projector onto the positive or the negative eigenspace of `ρ − σ`,
/// whichever is requested; either one attains `|Tr(O(ρ−σ))| = ½‖ρ−σ‖₁` for
/// trace-equal inputs. With `pick_low_rank` the smaller-rank projector is
/// returned, ties going to the positive one; otherwise the positive one.
pub fn distinguishing_observable(
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    pick_low_rank: bool,
) -> Result<Distinguisher> {
    if rho.dim() != sigma.dim() {
        return Err(ShadowError::DimensionMismatch(format!(
            "states of dimension {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let diff = rho.sub(sigma);
    let (vals, vecs) = diff.eigh();
    let pos: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > EIGEN_TOL).collect();
    let neg: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] < -EIGEN_TOL).collect();
    let half_norm = 0.5 * vals.iter().map(|v| v.abs()).sum::<f64>();
    if half_norm <= DISTINGUISH_TOL || pos.is_empty() {
        return Err(ShadowError::IndistinguishableStates);
    }
    let positive = !pick_low_rank || neg.is_empty() || pos.len() <= neg.len();
    let chosen = if positive { &pos } else { &neg };
    let u = ComplexMatrix::from_columns(
        &chosen
            .iter()
            .map(|&i| vecs.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    let proj = from_spectrum(&u, &vec![1.0; chosen.len()]);
    let gap = proj.trace_with(&diff).abs();
    let observable = Observable::new(proj, chosen.len() as f64)?;
    Ok(Distinguisher {
        observable,
        gap,
        positive,
    })
}

/// `½ + ¼‖ρ − σ‖₁`.
pub fn helstrom_success(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(ShadowError::DimensionMismatch(
            "Helstrom on states of differing dimension".into(),
        ));
    }
    Ok(0.5 + 0.25 * rho.sub(sigma).trace_norm())
}

/// Guesses which of two reference values an estimate came from: `false` when
/// it is nearer `v0` (ties included), `true` when nearer `v1`.
pub fn guess_nearer(estimate: f64, v0: f64, v1: f64) -> bool {
    (estimate - v1).abs() < (estimate - v0).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_haar_state;
    use crate::linalg::{max_abs_diff, trace_distance, PureState};

    #[test]
    fn projector_spectrum() {
        let mut rng = RngStream::new(5, 0);
        let o = random_projector_observable(8, 3, &mut rng).unwrap();
        let ev = o.matrix().eigenvalues();
        for (i, v) in ev.iter().enumerate() {
            let want = if i >= 5 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-10, "{ev:?}");
        }
        assert!((o.matrix().frobenius_sq() - 3.0).abs() < 1e-10);
        let full = random_projector_observable(4, 4, &mut rng).unwrap();
        assert!(max_abs_diff(full.matrix().as_matrix(), &ComplexMatrix::identity(4, 4)) < 1e-10);
        assert!(random_projector_observable(4, 0, &mut rng).is_err());
        assert!(random_projector_observable(4, 5, &mut rng).is_err());
    }

    #[test]
    fn traceless_reduction() {
        assert!(traceless_part(&HermitianMatrix::identity(3)).frobenius_sq() < 1e-30);
        let o = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]);
        let o0 = traceless_part(&o);
        assert!(
            max_abs_diff(
                o0.as_matrix(),
                HermitianMatrix::from_real_diagonal(&[0.5, -0.5]).as_matrix()
            ) < 1e-15
        );
        assert!((o0.frobenius_sq() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sign_observable_is_traceless() {
        let mut rng = RngStream::new(6, 0);
        let o = random_sign_observable(6, 6, &mut rng).unwrap();
        assert!(o.matrix().trace().abs() < 1e-10);
        assert!((o.matrix().frobenius_sq() - 6.0).abs() < 1e-10);
    }

    #[test]
    fn basis_pair_distinguisher() {
        let zero = PureState::basis(2, 0).unwrap().density();
        let one = PureState::basis(2, 1).unwrap().density();
        let dist = distinguishing_observable(&zero, &one, true).unwrap();
        assert!(dist.positive);
        assert!((dist.gap - 1.0).abs() < 1e-12);
        assert!(max_abs_diff(dist.observable.matrix().as_matrix(), zero.as_matrix()) < 1e-12);
        assert!(matches!(
            distinguishing_observable(&zero, &zero, true),
            Err(ShadowError::IndistinguishableStates)
        ));
    }

    #[test]
    fn pure_pair_gap_is_trace_distance() {
        let mut rng = RngStream::new(7, 0);
        for _ in 0..10 {
            let a = sample_haar_state(6, &mut rng).unwrap().density();
            let b = sample_haar_state(6, &mut rng).unwrap().density();
            let dist = distinguishing_observable(&a, &b, true).unwrap();
            assert!((dist.gap - trace_distance(&a, &b).unwrap()).abs() < 1e-9);
            assert!(dist.observable.matrix().frobenius_sq() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn helstrom_values() {
        let zero = PureState::basis(2, 0).unwrap().density();
        let one = PureState::basis(2, 1).unwrap().density();
        assert!((helstrom_success(&zero, &zero).unwrap() - 0.5).abs() < 1e-15);
        assert!((helstrom_success(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn guess_rule() {
        assert!(!guess_nearer(0.1, 0.0, 0.5));
        assert!(guess_nearer(0.3, 0.0, 0.5));
        assert!(!guess_nearer(0.25, 0.0, 0.5));
    }
}
