//! Closed-form outcome moments, their brute-force permutation-sum
//! counterparts, and exact covariances of single-copy shadow products.
//!
//! The brute-force routes enumerate `S_{s+1}` or `S_{s+2}` and evaluate every
//! partial trace through the cycle decomposition, so they never touch a
//! `d^s`-dimensional operator.

use crate::ensembles::RngStream;
use crate::error::{invalid, Result, ShadowError};
use crate::linalg::{
    cycle_partial_trace, kron, max_abs_diff, perm_operator, symmetric_dimension, trace_product,
    ComplexMatrix, HermitianMatrix, Permutation, PureState, C64,
};
use crate::measurement::{measure_independent, PURITY_TOL};
use crate::par::{chunked_reduce, Execution};

/// Permutations handled per parallel work item during enumeration.
const ENUMERATION_CHUNK: usize = 64;

fn check_pure(rho: &HermitianMatrix) -> Result<()> {
    let defect = rho.idempotency_defect();
    let tr = (rho.trace() - 1.0).abs();
    if defect > PURITY_TOL || tr > PURITY_TOL {
        return Err(ShadowError::NotPure(defect.max(tr)));
    }
    Ok(())
}

fn check_observable(rho: &HermitianMatrix, o: &HermitianMatrix) -> Result<()> {
    if rho.dim() != o.dim() {
        return Err(ShadowError::DimensionMismatch(format!(
            "state of dimension {} with observable of dimension {}",
            rho.dim(),
            o.dim()
        )));
    }
    Ok(())
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn swap_operator(d: usize) -> Result<ComplexMatrix> {
    perm_operator(&Permutation::transposition(2, 0, 1)?, d)
}

/// `Π_sym^{(2)} = (I + SWAP)/2` on `C^d ⊗ C^d`.
fn sym2(d: usize) -> Result<ComplexMatrix> {
    Ok((ComplexMatrix::identity(d * d, d * d) + swap_operator(d)?) * real(0.5))
}

/// `E[Ψ] = (I + sρ)/(d+s)` for the outcome of the joint measurement on `ρ^{⊗s}`.
pub fn exact_first_moment(rho: &HermitianMatrix, s: usize) -> Result<HermitianMatrix> {
    check_pure(rho)?;
    let d = rho.dim();
    let m =
        (ComplexMatrix::identity(d, d) + rho.as_matrix() * real(s as f64)) / real((d + s) as f64);
    Ok(HermitianMatrix::hermitize(m))
}

/// Counts gathered while enumerating `S_{s+1}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FirstMomentTally {
    pub total: usize,
    /// Permutations fixing position 0; each contributes `I`.
    pub fixing_first: usize,
}

/// `(κ_s/κ_{s+1}) (1/(s+1)!) Σ_{π ∈ S_{s+1}} Tr_{−0}(W_π (I ⊗ ρ^{⊗s}))`.
pub fn brute_first_moment(
    rho: &HermitianMatrix,
    s: usize,
    exec: Execution,
) -> Result<(HermitianMatrix, FirstMomentTally)> {
    check_pure(rho)?;
    let d = rho.dim();
    let n = s + 1;
    let perms = Permutation::all(n)?;
    let id = ComplexMatrix::identity(d, d);
    let mut ops: Vec<&ComplexMatrix> = vec![&id];
    ops.extend(std::iter::repeat_n(rho.as_matrix(), s));

    let sum = chunked_reduce(
        perms.len(),
        ENUMERATION_CHUNK,
        exec,
        |range| -> Result<(ComplexMatrix, FirstMomentTally)> {
            let mut acc = ComplexMatrix::zeros(d, d);
            let mut tally = FirstMomentTally::default();
            for p in &perms[range] {
                acc += cycle_partial_trace(p, &ops, 1)?;
                tally.total += 1;
                if p.apply(0) == 0 {
                    tally.fixing_first += 1;
                }
            }
            Ok((acc, tally))
        },
        |a, b| {
            let (mut ma, ta) = a?;
            let (mb, tb) = b?;
            ma += mb;
            Ok((
                ma,
                FirstMomentTally {
                    total: ta.total + tb.total,
                    fixing_first: ta.fixing_first + tb.fixing_first,
                },
            ))
        },
    )
    .ok_or(ShadowError::Empty("permutation enumeration"))?;
    let (acc, tally) = sum?;
    let weight = symmetric_dimension(s, d) / symmetric_dimension(s + 1, d) / factorial(n);
    Ok((HermitianMatrix::hermitize(acc * real(weight)), tally))
}

/// `E[Ψ ⊗ Ψ] = 2/((d+s)(d+s+1)) ((I + sρ)^{⊗2} − s(s+1)/2 ρ⊗ρ) Π_sym^{(2)}`.
pub fn exact_second_moment(rho: &HermitianMatrix, s: usize) -> Result<HermitianMatrix> {
    check_pure(rho)?;
    let d = rho.dim();
    let sf = s as f64;
    let a = ComplexMatrix::identity(d, d) + rho.as_matrix() * real(sf);
    let inner = kron(&a, &a) - kron(rho.as_matrix(), rho.as_matrix()) * real(sf * (sf + 1.0) / 2.0);
    let c = 2.0 / ((d as f64 + sf) * (d as f64 + sf + 1.0));
    Ok(HermitianMatrix::hermitize(inner * sym2(d)? * real(c)))
}

/// Counts gathered while enumerating `S_{s+2}`. A permutation is type A
/// when positions 0 and 1 lie on different cycles.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SecondMomentTally {
    pub total: usize,
    pub type_a: usize,
    pub type_b: usize,
    /// Type-A terms equal to `I⊗I`, `ρ⊗I`, `I⊗ρ`, `ρ⊗ρ` respectively.
    pub ii: usize,
    pub rho_i: usize,
    pub i_rho: usize,
    pub rho_rho: usize,
}

impl SecondMomentTally {
    fn merge(self, o: Self) -> Self {
        Self {
            total: self.total + o.total,
            type_a: self.type_a + o.type_a,
            type_b: self.type_b + o.type_b,
            ii: self.ii + o.ii,
            rho_i: self.rho_i + o.rho_i,
            i_rho: self.i_rho + o.i_rho,
            rho_rho: self.rho_rho + o.rho_rho,
        }
    }
}

/// `(κ_s/κ_{s+2}) (1/(s+2)!) Σ_{π ∈ S_{s+2}} Tr_{−0,1}(W_π (I ⊗ I ⊗ ρ^{⊗s}))`.
///
/// Type-A terms are read off the cycle decomposition directly. A type-B `π`
/// is written `W_π = W_{(0 1)} W_{π′}` with `π′ = (0 1)∘π` of type A, and the
/// swap is pulled outside the partial trace.
pub fn brute_second_moment(
    rho: &HermitianMatrix,
    s: usize,
    exec: Execution,
) -> Result<(HermitianMatrix, SecondMomentTally)> {
    check_pure(rho)?;
    let d = rho.dim();
    let n = s + 2;
    let perms = Permutation::all(n)?;
    let swap_perm = Permutation::transposition(n, 0, 1)?;
    let swap = swap_operator(d)?;
    let id = ComplexMatrix::identity(d, d);
    let mut ops: Vec<&ComplexMatrix> = vec![&id, &id];
    ops.extend(std::iter::repeat_n(rho.as_matrix(), s));

    let sum = chunked_reduce(
        perms.len(),
        ENUMERATION_CHUNK,
        exec,
        |range| -> Result<(ComplexMatrix, SecondMomentTally)> {
            let mut acc = ComplexMatrix::zeros(d * d, d * d);
            let mut t = SecondMomentTally::default();
            for p in &perms[range] {
                t.total += 1;
                if p.same_cycle(0, 1) {
                    t.type_b += 1;
                    let reduced = swap_perm.compose(p)?;
                    acc += &swap * cycle_partial_trace(&reduced, &ops, 2)?;
                } else {
                    t.type_a += 1;
                    match (p.apply(0) == 0, p.apply(1) == 1) {
                        (true, true) => t.ii += 1,
                        (false, true) => t.rho_i += 1,
                        (true, false) => t.i_rho += 1,
                        (false, false) => t.rho_rho += 1,
                    }
                    acc += cycle_partial_trace(p, &ops, 2)?;
                }
            }
            Ok((acc, t))
        },
        |a, b| {
            let (mut ma, ta) = a?;
            let (mb, tb) = b?;
            ma += mb;
            Ok((ma, ta.merge(tb)))
        },
    )
    .ok_or(ShadowError::Empty("permutation enumeration"))?;
    let (acc, tally) = sum?;
    let weight = symmetric_dimension(s, d) / symmetric_dimension(s + 2, d) / factorial(n);
    Ok((HermitianMatrix::hermitize(acc * real(weight)), tally))
}

/// `(I⊗I + ρ⊗I + I⊗ρ)(W_id + W_swap)/((d+1)(d+2))`, the `s = 1` second moment.
pub fn single_copy_second_moment(rho: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_pure(rho)?;
    let d = rho.dim();
    let id = ComplexMatrix::identity(d, d);
    let terms = kron(&id, &id) + kron(rho.as_matrix(), &id) + kron(&id, rho.as_matrix());
    let perms = ComplexMatrix::identity(d * d, d * d) + swap_operator(d)?;
    let c = 1.0 / ((d as f64 + 1.0) * (d as f64 + 2.0));
    Ok(HermitianMatrix::hermitize(terms * perms * real(c)))
}

/// `E[ρ̂ ⊗ ρ̂] = (I⊗I + I⊗ρ + ρ⊗I)(W_swap − 2/(d+2) Π_sym^{(2)})` for the
/// single-copy shadow `ρ̂ = (d+1)Ψ − I`.
pub fn single_shadow_second_moment(rho: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_pure(rho)?;
    let d = rho.dim();
    let id = ComplexMatrix::identity(d, d);
    let terms = kron(&id, &id) + kron(&id, rho.as_matrix()) + kron(rho.as_matrix(), &id);
    let right = swap_operator(d)? - sym2(d)? * real(2.0 / (d as f64 + 2.0));
    Ok(HermitianMatrix::hermitize(terms * right))
}

/// Whether `π ↦ (0 1)∘π` exchanges type A and type B over all of `S_n`.
pub fn ab_bijection_check(n: usize) -> Result<bool> {
    if n < 2 {
        return Err(invalid("the type A/B split needs n >= 2"));
    }
    let perms = Permutation::all(n)?;
    let swap = Permutation::transposition(n, 0, 1)?;
    let mut type_a = 0usize;
    for p in &perms {
        let a = !p.same_cycle(0, 1);
        let image = swap.compose(p)?;
        if a == !image.same_cycle(0, 1) {
            return Ok(false);
        }
        // the map is an involution, so exchanging the classes makes it a bijection
        if swap.compose(&image)? != *p {
            return Ok(false);
        }
        type_a += usize::from(a);
    }
    Ok(2 * type_a == perms.len())
}

/// Index patterns for `Cov(Tr(O ρ̂_i ρ̂_j), Tr(O ρ̂_k ρ̂_l))`, where the
/// covariance of complex variables is `E[X Ȳ] − E[X] E[Ȳ]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CovPattern {
    IjJk,
    IjKj,
    IjJi,
    IjIj,
    /// Four distinct indices.
    IjKl,
}

impl CovPattern {
    pub const ALL: [CovPattern; 5] = [
        CovPattern::IjJk,
        CovPattern::IjKj,
        CovPattern::IjJi,
        CovPattern::IjIj,
        CovPattern::IjKl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CovPattern::IjJk => "ij_jk",
            CovPattern::IjKj => "ij_kj",
            CovPattern::IjJi => "ij_ji",
            CovPattern::IjIj => "ij_ij",
            CovPattern::IjKl => "ij_kl",
        }
    }

    /// Number of independent shadows the pattern involves.
    pub fn distinct_indices(self) -> usize {
        match self {
            CovPattern::IjJi | CovPattern::IjIj => 2,
            CovPattern::IjJk | CovPattern::IjKj => 3,
            CovPattern::IjKl => 4,
        }
    }

    /// Positions `((i, j), (k, l))` in a draw of independent shadows.
    fn slots(self) -> ((usize, usize), (usize, usize)) {
        match self {
            CovPattern::IjJk => ((0, 1), (1, 2)),
            CovPattern::IjKj => ((0, 1), (2, 1)),
            CovPattern::IjJi => ((0, 1), (1, 0)),
            CovPattern::IjIj => ((0, 1), (0, 1)),
            CovPattern::IjKl => ((0, 1), (2, 3)),
        }
    }

    /// Upper bound on the exact covariance from the corresponding corollary.
    pub fn bound(self, rho: &HermitianMatrix, o: &HermitianMatrix) -> f64 {
        let d = o.dim() as f64;
        let norm2 = o.operator_norm().powi(2);
        let tr_o2 = o.frobenius_sq();
        match self {
            CovPattern::IjJk => 2.0 * o.trace_with(rho).powi(2),
            CovPattern::IjKj => {
                let o2 = HermitianMatrix::hermitize(o.as_matrix() * o.as_matrix());
                2.0 * o2.trace_with(rho)
            }
            CovPattern::IjJi => d * tr_o2 + 6.0 * (d * tr_o2).sqrt() + norm2,
            CovPattern::IjIj => (d + 2.0) * tr_o2 + (3.0 * d - 2.0) * norm2,
            CovPattern::IjKl => 0.0,
        }
    }
}

impl std::str::FromStr for CovPattern {
    type Err = ShadowError;

    fn from_str(s: &str) -> Result<Self> {
        CovPattern::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| invalid(format!("unknown covariance pattern {s:?}")))
    }
}

/// `E[Tr(OAB) Tr(OBA)]` for independent `A`, `B` with second moment `m2`:
/// `Σ O_pq O_tu m2[(q,v),(r,t)] m2[(r,u),(p,v)]`.
fn cross_product_moment(o: &ComplexMatrix, m2: &ComplexMatrix, d: usize) -> C64 {
    let at = |a: usize, b: usize, c: usize, e: usize| m2[(a * d + b, c * d + e)];
    let mut total = C64::new(0.0, 0.0);
    for q in 0..d {
        for t in 0..d {
            for p in 0..d {
                for u in 0..d {
                    let w = o[(p, q)] * o[(t, u)];
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    let mut inner = C64::new(0.0, 0.0);
                    for r in 0..d {
                        for v in 0..d {
                            inner += at(q, v, r, t) * at(r, u, p, v);
                        }
                    }
                    total += w * inner;
                }
            }
        }
    }
    total
}

/// Exact covariance for a pattern, assembled from the single-shadow second
/// moment. Cost is dominated by `O(d^6)` for [`CovPattern::IjIj`].
pub fn exact_covariance(
    pattern: CovPattern,
    rho: &HermitianMatrix,
    o: &HermitianMatrix,
) -> Result<f64> {
    check_pure(rho)?;
    check_observable(rho, o)?;
    let d = rho.dim();
    let t = o.trace_with(rho);
    if pattern == CovPattern::IjKl {
        return Ok(0.0);
    }
    let m2 = single_shadow_second_moment(rho)?.into_matrix();
    let (om, rm) = (o.as_matrix(), rho.as_matrix());
    let second = match pattern {
        CovPattern::IjJk => {
            let a = om * rm;
            trace_product(&kron(&a, &a), &m2)
        }
        CovPattern::IjKj => trace_product(&kron(&(om * rm), &(rm * om)), &(m2)),
        CovPattern::IjJi => trace_product(&kron(om, om), &(&m2 * &m2)),
        CovPattern::IjIj => cross_product_moment(om, &m2, d),
        CovPattern::IjKl => unreachable!(),
    };
    Ok(second.re - t * t)
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// `Tr(O ρ̂_a ρ̂_b)` for single-copy shadows of outcomes `a`, `b`:
/// `(d+1)² ⟨a|b⟩⟨b|O|a⟩ − (d+1)(⟨a|O|a⟩ + ⟨b|O|b⟩) + Tr(O)`.
pub fn shadow_pair_trace(o: &HermitianMatrix, a: &PureState, b: &PureState) -> C64 {
    let d1 = o.dim() as f64 + 1.0;
    let oa = o.as_matrix() * a.amplitudes();
    let cross = a.inner(b) * b.amplitudes().dotc(&oa);
    let ea = a.amplitudes().dotc(&oa).re;
    let eb = b.expectation(o);
    cross * real(d1 * d1) - real(d1 * (ea + eb) - o.trace())
}

/// Sample covariance of the pattern's two trace variables over `n` draws of
/// independent single-copy shadows of `φ`.
pub fn mc_covariance(
    pattern: CovPattern,
    phi: &PureState,
    o: &HermitianMatrix,
    n: usize,
    rng: &mut RngStream,
) -> Result<McEstimate> {
    if n < 2 {
        return Err(invalid("Monte Carlo covariance needs at least two draws"));
    }
    if phi.dim() != o.dim() {
        return Err(ShadowError::DimensionMismatch(
            "state and observable dimensions differ".into(),
        ));
    }
    let ((i, j), (k, l)) = pattern.slots();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let draws: Vec<PureState> = (0..pattern.distinct_indices())
            .map(|_| measure_independent(phi, rng).map(|out| out.psi().clone()))
            .collect::<Result<_>>()?;
        xs.push(shadow_pair_trace(o, &draws[i], &draws[j]));
        ys.push(shadow_pair_trace(o, &draws[k], &draws[l]));
    }
    let nf = n as f64;
    let mx: C64 = xs.iter().sum::<C64>() / real(nf);
    let my: C64 = ys.iter().sum::<C64>() / real(nf);
    let z: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| ((x - mx) * (y - my).conj()).re)
        .collect();
    let value = z.iter().sum::<f64>() / (nf - 1.0);
    let spread = z.iter().map(|v| (v - value).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(McEstimate {
        value,
        stderr: (spread / nf).sqrt(),
    })
}

/// Exact `Var(Tr(O ρ̂))` for the affine shadow of one joint measurement on
/// `φ^{⊗s}`, in `O(d²)`. Uses `Tr((O⊗O)(A⊗B)Π_sym) = ½(Tr(OA)Tr(OB) + Tr(OAOB))`
/// on each term of the second moment.
pub fn exact_joint_variance(phi: &PureState, o: &HermitianMatrix, s: usize) -> Result<f64> {
    if s == 0 {
        return Err(invalid("joint variance needs s >= 1"));
    }
    if phi.dim() != o.dim() {
        return Err(ShadowError::DimensionMismatch(
            "state and observable dimensions differ".into(),
        ));
    }
    let (d, sf) = (phi.dim() as f64, s as f64);
    let o_phi = o.as_matrix() * phi.amplitudes();
    let t = phi.amplitudes().dotc(&o_phi).re;
    let q = o_phi.norm_squared();
    let (tr_o, tr_o2) = (o.trace(), o.frobenius_sq());
    let f_ii = 0.5 * (tr_o * tr_o + tr_o2);
    let f_ir = 0.5 * (tr_o * t + q);
    let f_rr = t * t;
    let c = 2.0 / ((d + sf) * (d + sf + 1.0));
    let second = c * (f_ii + 2.0 * sf * f_ir + 0.5 * sf * (sf - 1.0) * f_rr);
    let mean = (tr_o + sf * t) / (d + sf);
    Ok(((d + sf) / sf).powi(2) * (second - mean * mean))
}

/// [`exact_joint_variance`] through the dense `d² × d²` second moment.
pub fn exact_joint_variance_dense(
    rho: &HermitianMatrix,
    o: &HermitianMatrix,
    s: usize,
) -> Result<f64> {
    check_observable(rho, o)?;
    if s == 0 {
        return Err(invalid("joint variance needs s >= 1"));
    }
    let (d, sf) = (rho.dim() as f64, s as f64);
    let second = trace_product(
        &kron(o.as_matrix(), o.as_matrix()),
        exact_second_moment(rho, s)?.as_matrix(),
    )
    .re;
    let mean = o.trace_with(&exact_first_moment(rho, s)?);
    Ok(((d + sf) / sf).powi(2) * (second - mean * mean))
}

/// Exact `Var(Tr(O X̂))` for the mean of `s` single-copy shadows.
pub fn exact_linear_variance(phi: &PureState, o: &HermitianMatrix, s: usize) -> Result<f64> {
    if s == 0 {
        return Err(invalid("linear variance needs s >= 1"));
    }
    Ok(exact_joint_variance(phi, o, 1)? / s as f64)
}

/// Exact `Var(Tr(O Ŷ))`. Among the ordered index pairs, `s(s−1)` pairs repeat
/// the same indices and `s(s−1)` reverse them; each of the four one-shared
/// index arrangements occurs `s(s−1)(s−2)` times and two of them reduce to
/// the real part of `ij_jk`, two to `ij_kj`. Disjoint pairs contribute zero.
pub fn exact_quadratic_variance(
    rho: &HermitianMatrix,
    o: &HermitianMatrix,
    s: usize,
) -> Result<f64> {
    if s < 2 {
        return Err(invalid("the quadratic estimator needs s >= 2"));
    }
    let sf = s as f64;
    let pairs = sf * (sf - 1.0);
    let same =
        exact_covariance(CovPattern::IjIj, rho, o)? + exact_covariance(CovPattern::IjJi, rho, o)?;
    let shared =
        exact_covariance(CovPattern::IjJk, rho, o)? + exact_covariance(CovPattern::IjKj, rho, o)?;
    Ok((pairs * same + 2.0 * pairs * (sf - 2.0) * shared) / (pairs * pairs))
}

/// A value computed two ways.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentValue {
    Matrix(ComplexMatrix),
    Scalar(f64),
}

impl MomentValue {
    fn deviation(&self, other: &MomentValue) -> Result<f64> {
        match (self, other) {
            (MomentValue::Matrix(a), MomentValue::Matrix(b)) if a.shape() == b.shape() => {
                Ok(max_abs_diff(a, b))
            }
            (MomentValue::Scalar(a), MomentValue::Scalar(b)) => Ok((a - b).abs()),
            _ => Err(ShadowError::DimensionMismatch(
                "moment values of different shape".into(),
            )),
        }
    }
}

/// A closed-form value next to its brute-force counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub label: String,
    pub formula: MomentValue,
    pub brute: MomentValue,
    pub max_abs_deviation: f64,
}

impl MomentReport {
    pub fn new(label: impl Into<String>, formula: MomentValue, brute: MomentValue) -> Result<Self> {
        let max_abs_deviation = formula.deviation(&brute)?;
        Ok(Self {
            label: label.into(),
            formula,
            brute,
            max_abs_deviation,
        })
    }
}
