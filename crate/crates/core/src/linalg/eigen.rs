//! Hermitian eigendecomposition.
//!
//! `nalgebra`'s tridiagonal QR is used first. On some sparse inputs (for
//! example direct sums of 2×2 blocks with many zero rows) it returns
//! non-finite eigenvalues, so every result is checked against the invariants
//! `Σλ = Tr(A)` and `Σλ² = ‖A‖_F²` and recomputed with cyclic complex Jacobi
//! rotations when the check fails.

use super::{ComplexMatrix, C64};

const JACOBI_MAX_SWEEPS: usize = 100;

fn consistent(a: &ComplexMatrix, values: &[f64]) -> bool {
    if values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let fro: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let scale = fro.max(1.0);
    let tr: f64 = (0..a.nrows()).map(|i| a[(i, i)].re).sum();
    let sum: f64 = values.iter().sum();
    let sq: f64 = values.iter().map(|v| v * v).sum();
    (sum - tr).abs() <= 1e-9 * scale.sqrt() * (a.nrows() as f64).sqrt()
        && (sq - fro).abs() <= 1e-9 * scale
}

/// Eigenvalues (unsorted) and, if requested, eigenvector columns.
pub(super) fn decompose(a: &ComplexMatrix, vectors: bool) -> (Vec<f64>, Option<ComplexMatrix>) {
    if vectors {
        let eig = a.clone().symmetric_eigen();
        let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        if consistent(a, &values)
            && eig
                .eigenvectors
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return (values, Some(eig.eigenvectors));
        }
    } else {
        let values: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
        if consistent(a, &values) {
            return (values, None);
        }
    }
    let (values, v) = jacobi(a);
    (values, vectors.then_some(v))
}

/// Cyclic Jacobi: each rotation zeroes one off-diagonal pair after a phase
/// change that makes it real.
pub(super) fn jacobi(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = ComplexMatrix::identity(n, n);
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let threshold = (f64::EPSILON * f64::EPSILON) * total.max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (i, j)))
            .map(|ij| a[ij].norm_sqr())
            .sum();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = [[c, s], [−s·conj(phase), c·conj(phase)]] on rows/cols p, q
                let ph = phase.conj();
                for k in 0..n {
                    let (kp, kq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = kp * c - kq * ph * s;
                    a[(k, q)] = kp * s + kq * ph * c;
                }
                for k in 0..n {
                    let (pk, qk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = pk * c - qk * phase * s;
                    a[(q, k)] = pk * s + qk * phase * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let (kp, kq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = kp * c - kq * ph * s;
                    v[(k, q)] = kp * s + kq * ph * c;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}
