use proptest::prelude::*;
use shadowlab::ensembles::{sample_haar_state, RngStream};
use shadowlab::linalg::{trace_distance, HermitianMatrix, PureState, C64};
use shadowlab::observables::{
    distinguishing_observable, guess_nearer, helstrom_success, random_observable,
    random_sign_observable, traceless_part, Observable,
};
use shadowlab::ShadowError;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_observables_respect_budget(seed in any::<u64>(), d in 2usize..=10, frac in 0.0f64..=1.0) {
        let b = 1.0 + frac * (d as f64 - 1.0);
        let o = random_observable(d, b, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert!((o.matrix().operator_norm() - 1.0).abs() < 1e-9);
        prop_assert!(o.matrix().frobenius_sq() <= b + 1e-9);
        prop_assert!(o.matrix().idempotency_defect() < 1e-9);
    }

    #[test]
    fn sign_observables_are_traceless_for_even_rank(seed in any::<u64>(), half in 1usize..=4) {
        let d = 2 * half + 1;
        let o = random_sign_observable(d, 2 * half, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert!(o.matrix().trace().abs() < 1e-9);
        prop_assert!((o.matrix().frobenius_sq() - 2.0 * half as f64).abs() < 1e-9);
    }

    #[test]
    fn low_rank_pick_is_no_larger(seed in any::<u64>(), d in 2usize..=6) {
        let mut rng = RngStream::new(seed, 0);
        let rho = sample_haar_state(d, &mut rng).unwrap().density();
        let sigma = sample_haar_state(d, &mut rng).unwrap().density();
        let plain = distinguishing_observable(&rho, &sigma, false).unwrap();
        let low = distinguishing_observable(&rho, &sigma, true).unwrap();
        prop_assert!(low.observable.budget() <= plain.observable.budget());
        let td = trace_distance(&rho, &sigma).unwrap();
        prop_assert!((low.gap - td).abs() < 1e-9 && (plain.gap - td).abs() < 1e-9);
    }
}

#[test]
fn equal_states_are_indistinguishable() {
    let rho = PureState::basis(3, 1).unwrap().density();
    assert!(matches!(
        distinguishing_observable(&rho, &rho, false),
        Err(ShadowError::IndistinguishableStates)
    ));
    assert!((helstrom_success(&rho, &rho).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn orthogonal_states_are_perfectly_distinguishable() {
    let a = PureState::basis(2, 0).unwrap().density();
    let b = PureState::basis(2, 1).unwrap().density();
    assert!((helstrom_success(&a, &b).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn observable_validation() {
    let half = HermitianMatrix::from_real_diagonal(&[0.5, 0.0]);
    assert!(Observable::new(half, 1.0).is_err());
    let id = HermitianMatrix::identity(3);
    assert!(Observable::new(id.clone(), 2.0).is_err());
    assert!(Observable::new(id, 3.0).is_ok());
}

#[test]
fn traceless_part_removes_trace_only() {
    let o = HermitianMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, -0.5]);
    let t = traceless_part(&o);
    assert!(t.trace().abs() < 1e-15);
    assert_eq!(t.as_matrix()[(0, 1)], C64::new(0.0, 0.0));
    assert!((t.as_matrix()[(0, 0)].re - (1.0 - 0.125)).abs() < 1e-15);
}

#[test]
fn nearer_guess_breaks_ties_toward_first() {
    assert!(!guess_nearer(0.25, 0.0, 0.5));
    assert!(guess_nearer(0.3, 0.0, 0.5));
    assert!(!guess_nearer(0.2, 0.0, 0.5));
}
