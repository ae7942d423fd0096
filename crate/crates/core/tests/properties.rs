use kwidth_core::dof::{dof_at_level, DofLevels};
use kwidth_core::linalg;
use kwidth_core::operator::Operator;
use kwidth_core::spaces::{NormKind, NormSpec};
use kwidth_core::widths::{operator_norm, width_sequence, widths_hilbert, SearchConfig};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn kind(i: u8) -> NormKind {
    match i % 3 {
        0 => NormKind::P1,
        1 => NormKind::P2,
        _ => NormKind::PInf,
    }
}

fn small_cfg(seed: u64) -> SearchConfig {
    SearchConfig { restarts: 8, ..SearchConfig::with_seed(seed) }
}

fn matrix(seed: u64, rows: usize, cols: usize) -> DMatrix<f64> {
    linalg::gaussian_matrix(&mut linalg::rng(seed, 0), rows, cols)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sequence_is_a_nested_sandwich(seed in 0u64..10_000, rows in 1usize..5, cols in 1usize..5, d in 0u8..3, c in 0u8..3) {
        let t = Operator::with_norms(matrix(seed, rows, cols), NormSpec::new(kind(d)), NormSpec::new(kind(c))).unwrap();
        let seq = width_sequence(&t, rows.min(cols), &small_cfg(seed)).unwrap();
        let norm = operator_norm(&t);
        let mut prev = f64::INFINITY;
        for e in seq.estimates() {
            prop_assert!(e.lower >= 0.0 && e.lower <= e.upper);
            prop_assert!(e.upper <= prev);
            prop_assert!(e.upper <= norm * (1.0 + 1e-9));
            prev = e.upper;
        }
        if let Some(first) = seq.get(1) {
            prop_assert!((first.upper - norm).abs() <= 1e-9 * norm.max(1.0));
        }
    }

    #[test]
    fn scaling_is_homogeneous(seed in 0u64..10_000, rows in 1usize..5, cols in 1usize..5, f in 0.01f64..100.0) {
        let t = Operator::euclidean(matrix(seed, rows, cols)).unwrap();
        let k = rows.min(cols);
        let a = widths_hilbert(&t, k).unwrap().uppers();
        let b = widths_hilbert(&t.scaled(f).unwrap(), k).unwrap().uppers();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x * f - y).abs() <= 1e-12 * (x * f).max(1.0));
        }
    }

    #[test]
    fn dof_is_non_increasing_in_eps(seed in 0u64..10_000, rows in 1usize..6, cols in 1usize..6) {
        let t = Operator::euclidean(matrix(seed, rows, cols)).unwrap();
        let cfg = small_cfg(seed);
        let norm = operator_norm(&t);
        let mut levels = DofLevels::new(&t, &cfg);
        let mut prev = usize::MAX;
        for i in 0..20 {
            let eps = norm * (1.1 - i as f64 * 0.055);
            let n = levels.count(eps).unwrap().count;
            if prev != usize::MAX {
                prop_assert!(n >= prev);
            }
            prev = n;
        }
        prop_assert_eq!(dof_at_level(&t, norm, &cfg).unwrap().count, 0);
        prop_assert!(prev <= rows.min(cols));
    }

    #[test]
    fn hilbert_widths_are_singular_values(seed in 0u64..10_000, rows in 1usize..7, cols in 1usize..7) {
        let m = matrix(seed, rows, cols);
        let sv = linalg::singular_values(&m);
        let t = Operator::euclidean(m).unwrap();
        let w = widths_hilbert(&t, rows.min(cols)).unwrap().uppers();
        for (a, b) in w.iter().zip(&sv) {
            prop_assert!((a - b).abs() <= 1e-12 * sv[0].max(1.0));
        }
    }
}

#[test]
fn svd_recovers_planted_rank_deficient_spectra() {
    // shapes where the bidiagonal factorization has been seen to drift
    for seed in 0..60u64 {
        let mut r = linalg::rng(seed, 7);
        let (rows, cols, rank) = (12, 8, 3);
        let u = linalg::gaussian_matrix(&mut r, rows, rank).qr().q();
        let v = linalg::gaussian_matrix(&mut r, cols, rank).qr().q();
        let s = [2.0, 1.0, 0.25];
        let mut us = u.clone();
        for (j, x) in s.iter().enumerate() {
            us.column_mut(j).scale_mut(*x);
        }
        let a = &us * v.transpose();
        let got = linalg::singular_values(&a);
        for (g, w) in got.iter().zip(s.iter().chain([0.0; 5].iter())) {
            assert!((g - w).abs() < 1e-12, "seed {seed}: {got:?}");
        }
        let (uu, ss, vv) = linalg::sorted_svd(&a);
        let mut rec = uu.clone();
        for (j, x) in ss.iter().enumerate() {
            rec.column_mut(j).scale_mut(*x);
        }
        assert!((rec * vv.transpose() - &a).norm() < 1e-12);
    }
}
