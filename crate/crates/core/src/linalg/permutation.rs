use super::{tensor_dim, ComplexMatrix, HermitianMatrix, C64, ONE};
use crate::error::{Result, ShadowError};

/// Cap on the number of permutations any enumeration may produce.
pub const MAX_PERMUTATIONS: usize = 1_000_000;

/// A bijection on `{0, …, s−1}`; `images[i]` is `π(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(ShadowError::InvalidPermutation("empty permutation".into()));
        }
        let mut seen = vec![false; n];
        for &v in &images {
            if v >= n || seen[v] {
                return Err(ShadowError::InvalidPermutation(format!(
                    "{images:?} is not a bijection on 0..{n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(s: usize) -> Self {
        Self {
            images: (0..s).collect(),
        }
    }

    /// The transposition exchanging `a` and `b`.
    pub fn transposition(s: usize, a: usize, b: usize) -> Result<Self> {
        if a >= s || b >= s {
            return Err(ShadowError::IndexOutOfRange {
                index: a.max(b),
                size: s,
            });
        }
        let mut images: Vec<usize> = (0..s).collect();
        images.swap(a, b);
        Ok(Self { images })
    }

    /// The full cycle `0 → 1 → … → s−1 → 0`.
    pub fn full_cycle(s: usize) -> Self {
        Self {
            images: (0..s).map(|i| (i + 1) % s).collect(),
        }
    }

    /// Builds a permutation of size `s` from disjoint cycles.
    pub fn from_cycles(s: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..s).collect();
        let mut touched = vec![false; s];
        for cycle in cycles {
            for (k, &i) in cycle.iter().enumerate() {
                if i >= s {
                    return Err(ShadowError::IndexOutOfRange { index: i, size: s });
                }
                if touched[i] {
                    return Err(ShadowError::InvalidPermutation(format!(
                        "element {i} appears in more than one cycle"
                    )));
                }
                touched[i] = true;
                images[i] = cycle[(k + 1) % cycle.len()];
            }
        }
        Self::new(images)
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.size()];
        for (i, &p) in self.images.iter().enumerate() {
            inv[p] = i;
        }
        Self { images: inv }
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.size() != other.size() {
            return Err(ShadowError::DimensionMismatch(format!(
                "composing permutations of sizes {} and {}",
                self.size(),
                other.size()
            )));
        }
        Ok(Self {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        })
    }

    /// Disjoint cycles, each starting at its smallest element and listed in
    /// the order `i, π(i), π²(i), …`. Cycles are sorted by first element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.size()];
        let mut out = Vec::new();
        for start in 0..self.size() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.images[i];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    /// Whether `a` and `b` lie on the same cycle.
    pub fn same_cycle(&self, a: usize, b: usize) -> bool {
        let mut i = self.images[a];
        loop {
            if i == b {
                return true;
            }
            if i == a {
                return false;
            }
            i = self.images[i];
        }
    }

    /// Every permutation of `{0, …, s−1}` in lexicographic order of images.
    pub fn all(s: usize) -> Result<Vec<Permutation>> {
        let count: u128 = (1..=s as u128).product();
        if count > MAX_PERMUTATIONS as u128 {
            return Err(ShadowError::EnumerationBudget {
                count,
                budget: MAX_PERMUTATIONS,
            });
        }
        let mut out = Vec::with_capacity(count as usize);
        let mut current: Vec<usize> = (0..s).collect();
        loop {
            out.push(Self {
                images: current.clone(),
            });
            if !next_lexicographic(&mut current) {
                break;
            }
        }
        Ok(out)
    }
}

fn next_lexicographic(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `W_π` on `(C^d)^{⊗s}`: the qudit in position `i` moves to position `π(i)`,
/// so `W_π |x₀…x_{s−1}⟩ = |x_{π⁻¹(0)} … x_{π⁻¹(s−1)}⟩`.
pub fn perm_operator(perm: &Permutation, d: usize) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(ShadowError::InvalidArgument(format!(
            "local dimension {d} < 2"
        )));
    }
    let s = perm.size();
    let dim = tensor_dim(d, s)?;
    let mut w = ComplexMatrix::zeros(dim, dim);
    let mut digits = vec![0usize; s];
    let mut out_digits = vec![0usize; s];
    for x in 0..dim {
        decode(x, d, &mut digits);
        for (i, &xi) in digits.iter().enumerate() {
            out_digits[perm.apply(i)] = xi;
        }
        w[(encode(&out_digits, d), x)] = ONE;
    }
    Ok(w)
}

/// `Π_sym^{(s)} = (1/s!) Σ_π W_π`.
pub fn sym_projector(s: usize, d: usize) -> Result<HermitianMatrix> {
    let dim = tensor_dim(d, s)?;
    let perms = Permutation::all(s)?;
    let mut acc = ComplexMatrix::zeros(dim, dim);
    let mut digits = vec![0usize; s];
    let mut out_digits = vec![0usize; s];
    let weight = C64::new(1.0 / perms.len() as f64, 0.0);
    for p in &perms {
        for x in 0..dim {
            decode(x, d, &mut digits);
            for (i, &xi) in digits.iter().enumerate() {
                out_digits[p.apply(i)] = xi;
            }
            acc[(encode(&out_digits, d), x)] += weight;
        }
    }
    Ok(HermitianMatrix::hermitize(acc))
}

/// `κ_s = binom(s + d − 1, d − 1)`, the dimension of the symmetric subspace.
pub fn symmetric_dimension(s: usize, d: usize) -> f64 {
    // acc walks binom(s + i, i), which stays integral at every step
    let mut acc: u128 = 1;
    for i in 1..d as u128 {
        acc = acc * (s as u128 + i) / i;
    }
    acc as f64
}

pub(crate) fn decode(mut x: usize, d: usize, digits: &mut [usize]) {
    for slot in digits.iter_mut().rev() {
        *slot = x % d;
        x /= d;
    }
}

pub(crate) fn encode(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}
