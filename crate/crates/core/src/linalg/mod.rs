//! Dense complex linear algebra for moderate dimensions.
//!
//! Matrices are `nalgebra` column-major `DMatrix<Complex64>`. Hermitian
//! operators and pure states get thin newtypes that carry their invariants.
//! Tensor-power operators on `(C^d)^{⊗s}` use the convention that qudit 0
//! is the most significant digit of the basis index, which matches
//! `DMatrix::kronecker`.

mod eigen;
mod metrics;
mod permutation;
mod tensor;

pub use metrics::{
    fidelity, pure_overlap_fidelity, purity_trace_identity_check, trace_distance,
    trace_distance_pure,
};
pub use permutation::{perm_operator, sym_projector, symmetric_dimension, Permutation};
pub use tensor::{cycle_partial_trace, cycle_trace, kron, kron_all, partial_trace, tensor_dim};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, ShadowError};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Relative Hermiticity tolerance accepted by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Largest tensor-power dimension `d^s` that may be materialized densely.
pub const MAX_TENSOR_DIM: usize = 10_000;
/// Absolute cutoff used when classifying eigenvalues by sign.
pub const EIGEN_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Largest absolute entry.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest absolute entrywise difference between two equally shaped matrices.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `Tr(AB)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// A square Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Validates Hermiticity to `HERMITIAN_TOL · max|entry|` and removes the
    /// residual anti-Hermitian part.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(ShadowError::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(ShadowError::NonFinite);
        }
        let dev = hermitian_deviation(&m);
        let scale = max_abs(&m).max(f64::MIN_POSITIVE);
        if dev > HERMITIAN_TOL * scale {
            return Err(ShadowError::NotHermitian(dev));
        }
        Ok(Self::hermitize(m))
    }

    /// `(M + M†)/2`, for results that are Hermitian in exact arithmetic.
    pub fn hermitize(m: ComplexMatrix) -> Self {
        assert!(m.is_square(), "hermitize needs a square matrix");
        let adj = m.adjoint();
        Self((m + adj) * C64::new(0.5, 0.0))
    }

    pub fn identity(d: usize) -> Self {
        Self(ComplexMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(ComplexMatrix::zeros(d, d))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = ComplexMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        trace(&self.0).re
    }

    /// `Tr(self · other)`, real for two Hermitian operators.
    pub fn trace_with(&self, other: &HermitianMatrix) -> f64 {
        trace_product(&self.0, &other.0).re
    }

    /// `Tr(M²)`, the squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues in ascending order with matching eigenvector columns.
    pub fn eigh(&self) -> (Vec<f64>, ComplexMatrix) {
        let (raw, vectors) = eigen::decompose(&self.0, true);
        let vectors = vectors.expect("vectors requested");
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
        let values = order.iter().map(|&i| raw[i]).collect();
        let vectors = ComplexMatrix::from_columns(
            &order
                .iter()
                .map(|&i| vectors.column(i).into_owned())
                .collect::<Vec<_>>(),
        );
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v = eigen::decompose(&self.0, false).0;
        v.sort_by(f64::total_cmp);
        v
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|v| v.abs()).sum()
    }

    /// `‖M² − M‖_max`, zero for projectors.
    pub fn idempotency_defect(&self) -> f64 {
        max_abs_diff(&(&self.0 * &self.0), &self.0)
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        Self(&self.0 - &other.0)
    }

    pub fn scale(&self, k: f64) -> HermitianMatrix {
        Self(&self.0 * C64::new(k, 0.0))
    }
}

/// A unit vector in `C^d` with `d ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(ComplexVector);

/// Norm tolerance for [`PureState::new`].
pub const NORM_TOL: f64 = 1e-12;

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(ShadowError::InvalidArgument(format!(
                "pure states need dimension >= 2, got {}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(ShadowError::NotNormalized(norm));
        }
        Ok(Self(amplitudes))
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(v: ComplexVector) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(ShadowError::NotNormalized(norm));
        }
        Self::new(v.unscale(norm))
    }

    pub fn from_amplitudes(amps: &[C64]) -> Result<Self> {
        Self::normalized(ComplexVector::from_column_slice(amps))
    }

    /// Computational basis vector `|i⟩`.
    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(ShadowError::IndexOutOfRange { index: i, size: d });
        }
        let mut v = ComplexVector::zeros(d);
        v[i] = ONE;
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.0
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.0.dotc(&other.0)
    }

    /// `|self⟩⟨self|`.
    pub fn density(&self) -> HermitianMatrix {
        HermitianMatrix(&self.0 * self.0.adjoint())
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, op: &HermitianMatrix) -> f64 {
        self.0.dotc(&(op.as_matrix() * &self.0)).re
    }

    /// Appends zero amplitudes up to dimension `d`.
    pub fn padded(&self, d: usize) -> Result<PureState> {
        if d < self.dim() {
            return Err(ShadowError::DimensionMismatch(format!(
                "cannot pad dimension {} down to {d}",
                self.dim()
            )));
        }
        let mut v = ComplexVector::zeros(d);
        v.rows_mut(0, self.dim()).copy_from(&self.0);
        Ok(Self(v))
    }

    /// Extracts the state from a pure density matrix (up to global phase).
    pub fn from_density(rho: &HermitianMatrix, purity_tol: f64) -> Result<Self> {
        let defect = rho.idempotency_defect();
        let tr = rho.trace();
        if defect > purity_tol || (tr - 1.0).abs() > purity_tol {
            return Err(ShadowError::NotPure(defect.max((tr - 1.0).abs())));
        }
        let (_, vecs) = rho.eigh();
        let top = vecs.column(rho.dim() - 1).into_owned();
        Self::normalized(top)
    }
}
