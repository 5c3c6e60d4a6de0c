use freelab::cpmaps::{gns, stinespring, trace_conditional_expectation, FiniteState, Subalgebra, UCPMap};
use freelab::fock::{creation, semicircle_moments, FockSpace};
use freelab::freeprod::{lift_left_operator, lift_word, vector_state};
use freelab::hilbert::{alternating_sequences, free_product_dimension, FreeProductSpace, PointedSpace};
use freelab::linalg::{self, c, random_complex_matrix, random_unit_vector, vector_expectation, CMat, C64};
use freelab::norms::op_norm;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

fn pointed(rng: &mut ChaCha8Rng, dims: &[usize]) -> Vec<PointedSpace> {
    dims.iter().map(|&d| PointedSpace::new(random_unit_vector(rng, d)).unwrap()).collect()
}

#[test]
fn dimension_matches_brute_force_enumeration() {
    for d1 in 1..=4 {
        for d2 in 1..=4 {
            for depth in 0..=5 {
                let mut brute = 0usize;
                for len in 0..=depth {
                    for seq in alternating_sequences(2, len) {
                        brute += seq.iter().map(|&t| [d1, d2][t] - 1).product::<usize>();
                    }
                }
                assert_eq!(free_product_dimension(&[d1, d2], depth), brute, "{d1} {d2} {depth}");
                let f = vec![PointedSpace::standard(d1).unwrap(), PointedSpace::standard(d2).unwrap()];
                assert_eq!(FreeProductSpace::new(f, depth).unwrap().dim(), brute);
            }
        }
    }
}

#[test]
fn free_moment_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let f = pointed(&mut rng, &[3, 2]);
    let space = Arc::new(FreeProductSpace::new(f.clone(), 4).unwrap());
    let (a1, a2) = (random_complex_matrix(&mut rng, 3, 3), random_complex_matrix(&mut rng, 3, 3));
    let (b1, b2) = (random_complex_matrix(&mut rng, 2, 2), random_complex_matrix(&mut rng, 2, 2));
    let ta = |m: &CMat| f[0].state(m);
    let tb = |m: &CMat| f[1].state(m);
    let state = |w: Vec<(usize, CMat)>| vector_state(&lift_word(&w, &space).unwrap());

    let ab = state(vec![(0, a1.clone()), (1, b1.clone())]);
    assert!((ab - ta(&a1) * tb(&b1)).norm() < 1e-12);

    let aba = state(vec![(0, a1.clone()), (1, b1.clone()), (0, a2.clone())]);
    assert!((aba - ta(&(&a1 * &a2)) * tb(&b1)).norm() < 1e-12);

    let abab = state(vec![(0, a1.clone()), (1, b1.clone()), (0, a2.clone()), (1, b2.clone())]);
    let expect = ta(&(&a1 * &a2)) * tb(&b1) * tb(&b2) + ta(&a1) * ta(&a2) * tb(&(&b1 * &b2))
        - ta(&a1) * ta(&a2) * tb(&b1) * tb(&b2);
    assert!((abab - expect).norm() < 1e-12);
}

#[test]
fn lifted_operator_on_the_vacuum() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let f = pointed(&mut rng, &[3, 3]);
    let space = Arc::new(FreeProductSpace::new(f.clone(), 3).unwrap());
    let a = random_complex_matrix(&mut rng, 3, 3);
    let t = lift_left_operator(&a, 1, &space).unwrap();
    let v = t.apply(&space.xi0());
    assert!((v.norm() - (&a * f[1].xi()).norm()).abs() < 1e-12);
    assert!((v[0] - vector_expectation(&a, f[1].xi())).norm() < 1e-12);
}

#[test]
fn semicircle_and_truncated_norms() {
    let rows = semicircle_moments(10, 8).unwrap();
    let even: Vec<u64> = rows.iter().step_by(2).map(|r| r.moment.round() as u64).collect();
    assert_eq!(even, vec![1, 1, 2, 5, 14, 42]);
    for depth in [4, 8, 16] {
        let fs = FockSpace::new(1, depth).unwrap();
        let l = creation(&fs, 1).unwrap();
        let x = linalg::sp_add(&l, &linalg::sp_adjoint(&l));
        let expect = 2.0 * (PI / (depth as f64 + 2.0)).cos();
        assert!((op_norm(&x, 1e-12).unwrap().value - expect).abs() < 1e-10);
    }
}

#[test]
fn transpose_choi_is_the_swap() {
    let err = UCPMap::from_fn(2, 2, |t| t.transpose()).unwrap_err();
    assert!(matches!(err, freelab::Error::NotCompletelyPositive(v) if (v + 1.0).abs() < 1e-12));
}

#[test]
fn trace_expectation_onto_diagonal_keeps_the_diagonal() {
    let sub = Subalgebra::diagonal(3).unwrap();
    let e = trace_conditional_expectation(&sub).unwrap();
    let m = CMat::from_fn(3, 3, |i, j| c((i * 3 + j) as f64, i as f64 - j as f64));
    let out = e.apply(&m);
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { m[(i, i)] } else { C64::new(0.0, 0.0) };
            assert!((out[(i, j)] - want).norm() < 1e-12);
        }
    }
    let st = stinespring(&e);
    assert!(st.isometry_residual() < 1e-12);
}

#[test]
fn gns_of_the_normalized_trace() {
    for n in 1..=3 {
        let st = FiniteState::tracial(Subalgebra::full(n).unwrap()).unwrap();
        assert_eq!(gns(&st).unwrap().dim, n * n);
    }
}
