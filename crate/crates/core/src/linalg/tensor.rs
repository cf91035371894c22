use super::permutation::{decode, encode};
use super::{ComplexMatrix, Permutation, MAX_TENSOR_DIM, ONE, ZERO};
use crate::error::{Result, ShadowError};

/// `d^s`, rejected when it exceeds [`MAX_TENSOR_DIM`].
pub fn tensor_dim(d: usize, s: usize) -> Result<usize> {
    let dim = (d as u128).checked_pow(s as u32).unwrap_or(u128::MAX);
    if dim > MAX_TENSOR_DIM as u128 {
        return Err(ShadowError::DimensionOverflow {
            dim,
            budget: MAX_TENSOR_DIM,
        });
    }
    Ok(dim as usize)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `A₀ ⊗ A₁ ⊗ …`, with the budget check on the final dimension.
pub fn kron_all(ops: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
    let first = ops.first().ok_or(ShadowError::Empty("kron_all operands"))?;
    let total: u128 = ops.iter().map(|m| m.nrows() as u128).product();
    if total > MAX_TENSOR_DIM as u128 {
        return Err(ShadowError::DimensionOverflow {
            dim: total,
            budget: MAX_TENSOR_DIM,
        });
    }
    Ok(ops[1..]
        .iter()
        .fold((*first).clone(), |acc, m| acc.kronecker(*m)))
}

/// Partial trace of an operator on `(C^d)^{⊗s}` over every qudit not in
/// `keep`. Kept qudits retain their relative order; an empty `keep` yields the
/// 1×1 matrix holding `Tr(M)`.
pub fn partial_trace(
    m: &ComplexMatrix,
    d: usize,
    s: usize,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    let dim = tensor_dim(d, s)?;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(ShadowError::DimensionMismatch(format!(
            "expected a {dim}x{dim} operator for {s} qudits of dimension {d}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&k| k >= s) {
        return Err(ShadowError::IndexOutOfRange {
            index: bad,
            size: s,
        });
    }
    let traced: Vec<usize> = (0..s).filter(|q| !kept.contains(q)).collect();
    let out_dim = d.pow(kept.len() as u32);
    let env_dim = d.pow(traced.len() as u32);

    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    let mut row_digits = vec![0usize; kept.len()];
    let mut col_digits = vec![0usize; kept.len()];
    let mut env_digits = vec![0usize; traced.len()];
    let mut full = vec![0usize; s];
    for r in 0..out_dim {
        decode(r, d, &mut row_digits);
        for c in 0..out_dim {
            decode(c, d, &mut col_digits);
            let mut acc = ZERO;
            for e in 0..env_dim {
                decode(e, d, &mut env_digits);
                for (slot, &q) in traced.iter().enumerate() {
                    full[q] = env_digits[slot];
                }
                for (slot, &q) in kept.iter().enumerate() {
                    full[q] = row_digits[slot];
                }
                let row = encode(&full, d);
                for (slot, &q) in kept.iter().enumerate() {
                    full[q] = col_digits[slot];
                }
                acc += m[(row, encode(&full, d))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

fn check_square_ops(ops: &[&ComplexMatrix]) -> Result<usize> {
    let d = ops
        .first()
        .ok_or(ShadowError::Empty("cycle operands"))?
        .nrows();
    for (i, a) in ops.iter().enumerate() {
        if a.nrows() != d || a.ncols() != d {
            return Err(ShadowError::DimensionMismatch(format!(
                "operand {i} is {}x{}, expected {d}x{d}",
                a.nrows(),
                a.ncols()
            )));
        }
    }
    Ok(d)
}

/// `Tr_{−0}(W_{(0 1 … n−1)} (A₀ ⊗ A₁ ⊗ … ⊗ A_{n−1})) = A_{n−1} ⋯ A₁ A₀`,
/// evaluated as a plain matrix product.
pub fn cycle_trace(ops: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
    let d = check_square_ops(ops)?;
    Ok(ops
        .iter()
        .fold(ComplexMatrix::identity(d, d), |acc, a| *a * acc))
}

/// Product of the operands met walking the cycle of `start`, with the
/// operand at `start` rightmost: `A_{π^{m−1}(start)} ⋯ A_{π(start)} A_start`.
pub(crate) fn walk_cycle(
    perm: &Permutation,
    start: usize,
    ops: &[&ComplexMatrix],
) -> ComplexMatrix {
    let mut acc = ops[start].clone();
    let mut i = perm.apply(start);
    while i != start {
        acc = ops[i] * acc;
        i = perm.apply(i);
    }
    acc
}

/// `Tr_{−K}(W_π (A₀ ⊗ … ⊗ A_{n−1}))` for the kept set `K = {0, …, kept−1}`,
/// computed from the cycle decomposition of `π` without forming any
/// `d^n`-dimensional operator.
///
/// Requires every kept position to sit on its own cycle; the result is then the
/// Kronecker product of the per-kept-cycle products times the traces of the
/// remaining cycles.
pub fn cycle_partial_trace(
    perm: &Permutation,
    ops: &[&ComplexMatrix],
    kept: usize,
) -> Result<ComplexMatrix> {
    check_square_ops(ops)?;
    if ops.len() != perm.size() {
        return Err(ShadowError::DimensionMismatch(format!(
            "{} operands for a permutation of size {}",
            ops.len(),
            perm.size()
        )));
    }
    if kept > perm.size() {
        return Err(ShadowError::IndexOutOfRange {
            index: kept,
            size: perm.size(),
        });
    }
    for a in 0..kept {
        for b in (a + 1)..kept {
            if perm.same_cycle(a, b) {
                return Err(ShadowError::InvalidArgument(format!(
                    "kept qudits {a} and {b} share a cycle"
                )));
            }
        }
    }
    let mut scalar = ONE;
    let mut factors: Vec<ComplexMatrix> = Vec::with_capacity(kept);
    for cycle in perm.cycles() {
        let first = cycle[0];
        if first < kept {
            // cycles list their smallest element first, so that is the kept one
            factors.push(walk_cycle(perm, first, ops));
        } else {
            scalar *= super::trace(&walk_cycle(perm, first, ops));
        }
    }
    let mut out = match factors.split_first() {
        None => ComplexMatrix::from_element(1, 1, ONE),
        Some((head, tail)) => tail.iter().fold(head.clone(), |acc, f| acc.kronecker(f)),
    };
    out *= scalar;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, perm_operator, trace, C64};

    fn sample(d: usize, seed: u64) -> ComplexMatrix {
        // deterministic pseudo-random entries without pulling in the rng stack
        let mut x = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ComplexMatrix::from_fn(d, d, |_, _| {
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let re = ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let im = ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            C64::new(re, im)
        })
    }

    #[test]
    fn swap_partial_traces() {
        let a = sample(2, 1);
        let b = sample(2, 2);
        let swap = perm_operator(&Permutation::transposition(2, 0, 1).unwrap(), 2).unwrap();
        let m = kron(&a, &b) * &swap;
        // tracing out qudit 0 leaves B·A, tracing out qudit 1 leaves A·B
        assert!(max_abs_diff(&partial_trace(&m, 2, 2, &[1]).unwrap(), &(&b * &a)) < 1e-14);
        assert!(max_abs_diff(&partial_trace(&m, 2, 2, &[0]).unwrap(), &(&a * &b)) < 1e-14);
        // W on the left keeping qudit 0 is the cycle identity A₁A₀
        let m2 = &swap * kron(&a, &b);
        let ct = cycle_trace(&[&a, &b]).unwrap();
        assert!(max_abs_diff(&partial_trace(&m2, 2, 2, &[0]).unwrap(), &ct) < 1e-14);
        assert!(max_abs_diff(&ct, &(&b * &a)) < 1e-14);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho = sample(2, 3);
        let sigma2 = sample(2, 5);
        let m2 = kron(&rho, &sigma2);
        let out = partial_trace(&m2, 2, 2, &[0]).unwrap();
        assert!(max_abs_diff(&out, &(&rho * trace(&sigma2))) < 1e-14);
        let full = partial_trace(&m2, 2, 2, &[]).unwrap();
        assert!((full[(0, 0)] - trace(&m2)).norm() < 1e-14);
        let all = partial_trace(&m2, 2, 2, &[0, 1]).unwrap();
        assert_eq!(all, m2);
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let m = ComplexMatrix::identity(4, 4);
        assert!(matches!(
            partial_trace(&m, 2, 2, &[2]),
            Err(ShadowError::IndexOutOfRange { index: 2, size: 2 })
        ));
    }

    #[test]
    fn cycle_trace_diag_cubed() {
        let a = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            ONE,
            C64::new(2.0, 0.0),
        ]));
        let out = cycle_trace(&[&a, &a, &a]).unwrap();
        assert!((trace(&out).re - 9.0).abs() < 1e-14);
        // against the explicit 8×8 operator
        let w = perm_operator(&Permutation::full_cycle(3), 2).unwrap();
        let dense = w * kron_all(&[&a, &a, &a]).unwrap();
        let reduced = partial_trace(&dense, 2, 3, &[0]).unwrap();
        assert!(max_abs_diff(&reduced, &out) < 1e-13);
    }

    #[test]
    fn cycle_trace_identity_gives_dimension() {
        let i3 = ComplexMatrix::identity(3, 3);
        let out = cycle_trace(&[&i3, &i3, &i3, &i3]).unwrap();
        assert!((trace(&out).re - 3.0).abs() < 1e-14);
    }

    #[test]
    fn cycle_trace_mismatched_dims() {
        let a = ComplexMatrix::identity(2, 2);
        let b = ComplexMatrix::identity(3, 3);
        assert!(matches!(
            cycle_trace(&[&a, &b]),
            Err(ShadowError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn cycle_partial_trace_matches_dense_for_all_s4() {
        let d = 2;
        let mats: Vec<ComplexMatrix> = (0..4).map(|i| sample(d, 10 + i)).collect();
        let ops: Vec<&ComplexMatrix> = mats.iter().collect();
        let product = kron_all(&ops).unwrap();
        for p in Permutation::all(4).unwrap() {
            let dense = perm_operator(&p, d).unwrap() * &product;
            let one = partial_trace(&dense, d, 4, &[0]).unwrap();
            let fast = cycle_partial_trace(&p, &ops, 1).unwrap();
            assert!(max_abs_diff(&one, &fast) < 1e-12, "{p:?}");
            if !p.same_cycle(0, 1) {
                let two = partial_trace(&dense, d, 4, &[0, 1]).unwrap();
                let fast2 = cycle_partial_trace(&p, &ops, 2).unwrap();
                assert!(max_abs_diff(&two, &fast2) < 1e-12, "{p:?}");
            } else {
                assert!(cycle_partial_trace(&p, &ops, 2).is_err());
            }
            let full = partial_trace(&dense, d, 4, &[]).unwrap();
            let fast0 = cycle_partial_trace(&p, &ops, 0).unwrap();
            assert!(max_abs_diff(&full, &fast0) < 1e-12);
        }
    }
}
