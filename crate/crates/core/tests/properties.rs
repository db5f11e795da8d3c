mod common;

use common::*;
use proptest::prelude::*;
use rembed_core::downstream::{evaluate, predict_topk, rank_top, ModelKind, TrainedModel};
use rembed_core::linalg::{orthogonalize, ridge_gradient_norm, ridge_lstsq_report, sym_eig_topk};
use rembed_core::matrix::{gemm, randn, spmm_t};
use rembed_core::synth::random_features;
use rembed_core::{Ridge, SeededRng, SolverConfig, SparseMatrix};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn ridge_strategy() -> impl Strategy<Value = Ridge> {
    prop_oneof![
        Just(Ridge::none()),
        (1e-8f64..1e-1).prop_map(Ridge::Relative),
        (1e-6f64..10.0).prop_map(Ridge::Absolute),
    ]
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn solver_meets_gradient_contract(
        n in 5usize..60,
        d in 1usize..15,
        m in 1usize..4,
        density in 0.1f64..1.0,
        ridge in ridge_strategy(),
        seed in any::<u64>(),
    ) {
        let mut rng = SeededRng::new(seed);
        let x = random_features(n, d, density, &mut rng).unwrap();
        let b = randn(n, m, &mut rng).unwrap();
        let cfg = SolverConfig { ridge, tol: 1e-10, max_iters: 1000 };
        let sol = ridge_lstsq_report(&x, &b, &cfg).unwrap();
        if sol.converged() {
            let grad = ridge_gradient_norm(&x, &b, &sol.z, sol.lambda);
            let scale = spmm_t(&x, &b).unwrap().frobenius_norm();
            prop_assert!(grad <= cfg.tol * scale, "{grad:e} > {:e}", cfg.tol * scale);
        }
    }

    #[test]
    fn orthogonalize_is_orthonormal_and_keeps_the_span(
        rows in 2usize..40,
        cols in 1usize..10,
        dup in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let cols = cols.min(rows);
        let mut rng = SeededRng::new(seed);
        let mut m = na(&randn(rows, cols, &mut rng).unwrap());
        if dup && cols > 1 {
            let c0 = m.column(0).into_owned();
            m.set_column(cols - 1, &(c0 * 3.0));
        }
        let q = orthogonalize(&ours(&m)).unwrap();
        let qn = na(&q);
        let defect = (qn.transpose() * &qn - nalgebra::DMatrix::identity(q.cols(), q.cols())).amax();
        prop_assert!(defect < 1e-10, "defect {defect:e}");
        let residual = (&m - &qn * (qn.transpose() * &m)).norm() / m.norm();
        prop_assert!(residual < 1e-10, "span residual {residual:e}");
        let expected_rank = if dup && cols > 1 { cols - 1 } else { cols };
        prop_assert_eq!(q.cols(), expected_rank);
    }

    #[test]
    fn eig_residuals_are_small(n in 1usize..16, k in 1usize..16, seed in any::<u64>()) {
        let k = k.min(n);
        let g = randn(n + 3, n, &mut SeededRng::new(seed)).unwrap();
        let f = gemm(&g, &g, true).unwrap();
        let eig = sym_eig_topk(&f, k).unwrap();
        let fv = na(&f) * na(&eig.vectors);
        let norm = na(&f).norm().max(1.0);
        for j in 0..k {
            let r = (fv.column(j) - na(&eig.vectors).column(j) * eig.raw_values[j]).norm();
            prop_assert!(r < 1e-8 * norm, "pair {j}: residual {r:e}");
        }
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        let vn = na(&eig.vectors);
        prop_assert!((vn.transpose() * &vn - nalgebra::DMatrix::identity(k, k)).amax() < 1e-10);
    }

    #[test]
    fn decoding_ignores_positive_rescaling(
        d in 1usize..8,
        c in 2usize..12,
        k in 1usize..4,
        exp in -20i32..20,
        seed in any::<u64>(),
    ) {
        let mut rng = SeededRng::new(seed);
        let z = randn(d, k, &mut rng).unwrap();
        let v = randn(c, k, &mut rng).unwrap();
        let x = random_features(10, d, 0.6, &mut rng).unwrap();
        let s = 2f64.powi(exp);
        let base = TrainedModel::new(ModelKind::InnerProduct, z.clone(), v.clone(), None).unwrap();
        let scaled = TrainedModel::new(ModelKind::InnerProduct, z.scaled(s), v, None).unwrap();
        prop_assert_eq!(predict_topk(&base, &x, 3).unwrap(), predict_topk(&scaled, &x, 3).unwrap());
    }

    #[test]
    fn metrics_are_complementary_on_single_label_data(
        n in 1usize..50,
        c in 1usize..10,
        seed in any::<u64>(),
    ) {
        let mut rng = SeededRng::new(seed);
        let truth: Vec<Vec<(usize, f64)>> = (0..n).map(|_| vec![(rng.below(c), 1.0)]).collect();
        let truth = SparseMatrix::from_rows(c, &truth).unwrap();
        let preds: Vec<Vec<usize>> = (0..n).map(|_| vec![rng.below(c)]).collect();
        let r = evaluate(&preds, &truth).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.test_error));
        prop_assert!((r.precision_at_1 + r.test_error - 1.0).abs() < 1e-12);
        prop_assert_eq!(r.n_eval, n);
    }

    #[test]
    fn rank_top_agrees_with_full_sort(
        scores in proptest::collection::vec(-3i32..3, 1..30),
        take in 1usize..40,
    ) {
        let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
        let mut all: Vec<usize> = (0..scores.len()).collect();
        all.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        all.truncate(take);
        prop_assert_eq!(rank_top(&scores, take, &mut Vec::new()), all);
    }

    #[test]
    fn randn_is_a_function_of_the_seed(seed in any::<u64>(), other in any::<u64>()) {
        let a = randn(7, 3, &mut SeededRng::new(seed)).unwrap();
        let b = randn(7, 3, &mut SeededRng::new(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        if other != seed {
            let c = randn(7, 3, &mut SeededRng::new(other)).unwrap();
            prop_assert_ne!(&a, &c);
        }
    }
}

#[test]
fn spmm_matches_dense_product() {
    let mut rng = SeededRng::new(3);
    let x = random_features(25, 9, 0.3, &mut rng).unwrap();
    let b = randn(9, 4, &mut rng).unwrap();
    let got = na(&rembed_core::matrix::spmm(&x, &b).unwrap());
    let want = dense(&x) * na(&b);
    assert!((got - want).amax() < 1e-12);
}
