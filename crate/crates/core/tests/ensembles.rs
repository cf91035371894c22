use shadowlab::ensembles::{
    sample_haar_state, sample_posterior_overlap, sample_posterior_state, RngStream,
};
use shadowlab::linalg::{kron, max_abs_diff, sym_projector, symmetric_dimension, ComplexMatrix, PureState};
use shadowlab::stats::{ks_against_cdf, ks_two_sample};

// 0.1% critical values
fn ks_one(n: usize) -> f64 {
    1.95 / (n as f64).sqrt()
}

fn ks_two(n: usize, m: usize) -> f64 {
    1.95 * ((n + m) as f64 / (n * m) as f64).sqrt()
}

#[test]
fn haar_overlap_follows_beta_one_d_minus_one() {
    let n = 20_000;
    for d in [2usize, 3, 7] {
        let mut rng = RngStream::new(1, d as u64);
        let e0 = PureState::basis(d, 0).unwrap();
        let t: Vec<f64> = (0..n)
            .map(|_| sample_haar_state(d, &mut rng).unwrap().inner(&e0).norm_sqr())
            .collect();
        let stat = ks_against_cdf(&t, |x| 1.0 - (1.0 - x).powi(d as i32 - 1));
        assert!(stat < ks_one(n), "d={d}: KS {stat}");
    }
}

#[test]
fn haar_phase_is_uniform() {
    let n = 20_000;
    let mut rng = RngStream::new(2, 0);
    let e0 = PureState::basis(4, 0).unwrap();
    let phases: Vec<f64> = (0..n)
        .map(|_| {
            let z = e0.inner(&sample_haar_state(4, &mut rng).unwrap());
            (z.arg() + std::f64::consts::PI) / std::f64::consts::TAU
        })
        .collect();
    assert!(ks_against_cdf(&phases, |x| x.clamp(0.0, 1.0)) < ks_one(n));
}

/// Accept a Haar draw with probability `|⟨ψ|φ⟩|^{2s}`.
fn rejection_sample(phi: &PureState, s: usize, rng: &mut RngStream) -> PureState {
    loop {
        let psi = sample_haar_state(phi.dim(), rng).unwrap();
        if rng.uniform() < psi.inner(phi).norm_sqr().powi(s as i32) {
            return psi;
        }
    }
}

#[test]
fn posterior_matches_rejection_sampling() {
    let n = 4000;
    for (d, s) in [(2usize, 1usize), (3, 2), (4, 3)] {
        let mut rng = RngStream::new(3, (10 * d + s) as u64);
        let phi = sample_haar_state(d, &mut rng).unwrap();
        let probe = PureState::basis(d, 0).unwrap();
        let mut oracle_t = Vec::with_capacity(n);
        let mut oracle_probe = Vec::with_capacity(n);
        for _ in 0..n {
            let psi = rejection_sample(&phi, s, &mut rng);
            oracle_t.push(psi.inner(&phi).norm_sqr());
            oracle_probe.push(psi.inner(&probe).norm_sqr());
        }
        let mut fast_t = Vec::with_capacity(n);
        let mut fast_probe = Vec::with_capacity(n);
        for _ in 0..n {
            let psi = sample_posterior_state(&phi, s, &mut rng).unwrap();
            fast_t.push(psi.inner(&phi).norm_sqr());
            fast_probe.push(psi.inner(&probe).norm_sqr());
        }
        assert!(ks_two_sample(&oracle_t, &fast_t) < ks_two(n, n), "overlap d={d} s={s}");
        assert!(ks_two_sample(&oracle_probe, &fast_probe) < ks_two(n, n), "probe d={d} s={s}");
    }
}

#[test]
fn overlap_sampler_matches_beta_cdf() {
    // Beta(s+1, d−1) with d = 2 has CDF t^{s+1}
    let n = 20_000;
    let mut rng = RngStream::new(4, 0);
    for s in [0usize, 1, 5] {
        let t: Vec<f64> = (0..n).map(|_| sample_posterior_overlap(s, 2, &mut rng).unwrap().t).collect();
        assert!(ks_against_cdf(&t, |x| x.clamp(0.0, 1.0).powi(s as i32 + 1)) < ks_one(n), "s={s}");
    }
}

#[test]
fn haar_second_moment_is_normalized_symmetric_projector() {
    let (d, n) = (2usize, 200_000);
    let mut rng = RngStream::new(5, 0);
    let mut acc = ComplexMatrix::zeros(d * d, d * d);
    for _ in 0..n {
        let p = sample_haar_state(d, &mut rng).unwrap().density().into_matrix();
        acc += kron(&p, &p);
    }
    acc /= shadowlab::C64::new(n as f64, 0.0);
    let expected = sym_projector(2, d).unwrap().into_matrix()
        / shadowlab::C64::new(symmetric_dimension(2, d), 0.0);
    // entries lie in the unit disc, so 5σ ≤ 5/√N
    assert!(max_abs_diff(&acc, &expected) < 5.0 / (n as f64).sqrt());
}

#[test]
fn streams_are_independent_of_scheduling() {
    let a: Vec<f64> = (0..5)
        .map(|i| sample_haar_state(3, &mut RngStream::new(9, i)).unwrap().amplitudes()[0].re)
        .collect();
    let b: Vec<f64> = (0..5)
        .rev()
        .map(|i| sample_haar_state(3, &mut RngStream::new(9, i)).unwrap().amplitudes()[0].re)
        .rev()
        .collect();
    assert_eq!(a, b);
}
