use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

use upb_core::linalg::{
    hermitian_eigensystem, kron, partial_transpose, reduced_contraction, span_dimension, tensor_product,
    HermitianOp, Ket, C64, RANK_TOL,
};

fn ket(dim: usize) -> impl Strategy<Value = Ket> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_filter_map("nonzero", |v| {
        Ket::new(v.into_iter().map(|(re, im)| C64::new(re, im)).collect())
            .normalized()
            .ok()
    })
}

fn hermitian(dim: usize) -> impl Strategy<Value = HermitianOp> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        let m = DMatrix::from_fn(dim, dim, |i, j| C64::new(v[i * dim + j].0, v[i * dim + j].1));
        HermitianOp::new((&m + m.adjoint()).scale(0.5)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_product_is_associative(a in ket(2), b in ket(3), c in ket(2)) {
        let flat = tensor_product(&[a.clone(), b.clone(), c.clone()]).unwrap();
        let nested = kron(&kron(&a, &b), &c);
        prop_assert!(flat.max_abs_diff(&nested) <= 1e-14);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(flat.max_abs_diff(&right) <= 1e-14);
    }

    #[test]
    fn span_dimension_ignores_order_and_scale(
        vs in prop::collection::vec(ket(4), 1..6),
        scales in prop::collection::vec((0.1f64..3.0, 0.0f64..std::f64::consts::TAU), 6),
        seed in any::<u64>(),
    ) {
        let base = span_dimension(&vs, RANK_TOL).unwrap();
        let mut shuffled: Vec<Ket> = vs
            .iter()
            .zip(&scales)
            .map(|(v, (r, phi))| v.scaled(C64::from_polar(*r, *phi)))
            .collect();
        let n = shuffled.len();
        for i in 0..n {
            let j = (seed.rotate_left(i as u32) as usize) % n;
            shuffled.swap(i, j);
        }
        prop_assert_eq!(span_dimension(&shuffled, RANK_TOL).unwrap(), base);
    }

    #[test]
    fn eigensystem_reconstructs(m in hermitian(6)) {
        let eig = hermitian_eigensystem(&m).unwrap();
        let mut acc = DMatrix::<C64>::zeros(6, 6);
        for (l, v) in eig.values.iter().zip(&eig.vectors) {
            let col = v.to_dvector();
            acc += (&col * col.adjoint()).scale(*l);
        }
        let err = (acc - m.matrix()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        prop_assert!(err <= 1e-9 * m.max_abs().max(1e-300));
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn partial_transposes_compose_to_full(m in hermitian(8), mask in 1usize..7) {
        let dims = [2, 2, 2];
        let block: Vec<usize> = (0..3).filter(|p| mask & (1 << p) != 0).collect();
        let rest: Vec<usize> = (0..3).filter(|p| mask & (1 << p) == 0).collect();
        let once = partial_transpose(&m, &dims, &block).unwrap();
        let twice = partial_transpose(&once, &dims, &rest).unwrap();
        prop_assert!(twice.max_abs_diff(&m.transpose()) <= 1e-15);
        prop_assert!(partial_transpose(&once, &dims, &block).unwrap().max_abs_diff(&m) == 0.0);
        prop_assert!((once.trace() - m.trace()).abs() <= 1e-12);
    }

    #[test]
    fn partial_transpose_of_block_and_complement_are_isospectral(m in hermitian(8), mask in 1usize..7) {
        let dims = [2, 2, 2];
        let block: Vec<usize> = (0..3).filter(|p| mask & (1 << p) != 0).collect();
        let rest: Vec<usize> = (0..3).filter(|p| mask & (1 << p) == 0).collect();
        let a = hermitian_eigensystem(&partial_transpose(&m, &dims, &block).unwrap()).unwrap();
        let b = hermitian_eigensystem(&partial_transpose(&m, &dims, &rest).unwrap()).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }
}

#[test]
fn contraction_identity_on_random_states() {
    // <fixed ⊗ w| rho |fixed ⊗ w> computed two ways, 20 trials.
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strat = (hermitian(12), ket(2), ket(3), ket(2));
    for _ in 0..20 {
        let (rho, a, w, c) = strat.new_tree(&mut runner).unwrap().current();
        let dims = [2, 3, 2];
        let m = reduced_contraction(&rho, &dims, &[Some(a.clone()), None, Some(c.clone())], 1).unwrap();
        let direct = rho.expectation(&tensor_product(&[a, w.clone(), c]).unwrap());
        assert!((m.expectation(&w) - direct).abs() <= 1e-12);
    }
}
