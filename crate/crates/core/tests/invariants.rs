use augsc::geometry::dual_point;
use augsc::ingest::{read_matrix, write_matrix, MatrixFormat};
use augsc::metrics::{error_rate, nmi};
use augsc::model::{affinity, effective_lambda, normalize_columns};
use augsc::semisupervised::{update_f, PropagationMatrices};
use augsc::spectral::spectral_cluster;
use augsc::synth::{make_bases, sample_union};
use augsc::{AugmentedDictionary, DataMatrix, LabelState};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-5.0f64..5.0, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn sized_matrix() -> impl Strategy<Value = DMatrix<f64>> {
    (1usize..6, 2usize..9).prop_flat_map(|(r, c)| matrix(r, c))
}

fn nonzero_columns(m: &DMatrix<f64>) -> bool {
    m.column_iter().all(|c| c.norm() > 1e-3)
}

/// A random propagation instance: nonnegative coefficients, augmented columns
/// with one to three parents, and at least one labeled sample.
#[derive(Debug)]
struct Instance {
    dict: AugmentedDictionary,
    ctilde: DMatrix<f64>,
    labels: LabelState,
}

fn instance() -> impl Strategy<Value = Instance> {
    (2usize..8, 0usize..6, 1usize..4).prop_flat_map(|(n, m, p)| {
        let n_tilde = n + m;
        (
            prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..2.0], n_tilde * n),
            prop::collection::vec(prop::collection::btree_set(0..n, 1..=n.min(3)), m),
            prop::collection::vec(prop::option::of(0..p), n),
            0..n,
        )
            .prop_map(move |(coef, parents, mut given, anchor)| {
                if given.iter().all(Option::is_none) {
                    given[anchor] = Some(0);
                }
                let mut all_parents = vec![Vec::new(); n];
                all_parents.extend(parents.into_iter().map(|s| s.into_iter().collect::<Vec<_>>()));
                let dict = AugmentedDictionary::new(
                    DMatrix::from_element(2, n_tilde, 1.0),
                    n,
                    (0..n).map(|j| vec![j]).collect(),
                    all_parents,
                    vec!["mix".to_string(); m],
                )
                .unwrap();
                let mut ctilde = DMatrix::from_vec(n_tilde, n, coef);
                for j in 0..n {
                    ctilde[(j, j)] = 0.0;
                }
                let labels = LabelState::new(given, p, n_tilde).unwrap();
                Instance { dict, ctilde, labels }
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_is_idempotent(m in sized_matrix()) {
        prop_assume!(nonzero_columns(&m));
        let once = normalize_columns(&DataMatrix::new(m).unwrap()).unwrap();
        let twice = normalize_columns(&once).unwrap();
        prop_assert!((once.values() - twice.values()).amax() <= 1e-14);
    }

    #[test]
    fn lambda_doubles_with_mu(m in sized_matrix(), mu in 0.5f64..200.0) {
        prop_assume!(nonzero_columns(&m));
        let x = DataMatrix::new(m).unwrap();
        if let Ok(base) = effective_lambda(&x, mu) {
            prop_assert_eq!(effective_lambda(&x, 2.0 * mu).unwrap(), 2.0 * base);
        }
    }

    #[test]
    fn affinity_is_symmetric_and_nonnegative(c in (2usize..8).prop_flat_map(|n| matrix(n, n))) {
        let a = affinity(&c);
        prop_assert!(a.iter().all(|&v| v >= 0.0));
        prop_assert_eq!(a.transpose(), a);
    }

    #[test]
    fn propagated_labels_are_row_stochastic(inst in instance()) {
        let prop = PropagationMatrices::new(&inst.ctilde, &inst.dict).unwrap();
        let out = update_f(&prop, &inst.labels.u_diag(), &inst.labels.ytilde(), 1000.0, 1000.0).unwrap();
        prop_assert_eq!(out.f.shape(), (inst.dict.n_tilde(), inst.labels.n_clusters()));
        for row in out.f.row_iter() {
            prop_assert!((row.sum() - 1.0).abs() <= 1e-8);
            prop_assert!(row.iter().all(|&v| v >= -1e-10));
        }
    }

    #[test]
    fn binary_files_round_trip_exactly(m in sized_matrix()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        write_matrix(&path, &m, MatrixFormat::Bin).unwrap();
        prop_assert_eq!(read_matrix(&path, MatrixFormat::Bin).unwrap(), m);
    }

    #[test]
    fn text_files_round_trip(m in sized_matrix()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_matrix(&path, &m, MatrixFormat::Csv).unwrap();
        let back = read_matrix(&path, MatrixFormat::Csv).unwrap();
        prop_assert!((back - &m).amax() <= 1e-15);
    }

    #[test]
    fn scores_are_symmetric_and_bounded(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..30)) {
        let (a, b): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let e = error_rate(&a, &b).unwrap();
        prop_assert_eq!(e, error_rate(&b, &a).unwrap());
        prop_assert!((0.0..=100.0).contains(&e));
        let s = nmi(&a, &b).unwrap();
        prop_assert!((s - nmi(&b, &a).unwrap()).abs() <= 1e-9);
        prop_assert!((0.0..=100.0 + 1e-9).contains(&s));
    }

    #[test]
    fn renaming_predictions_keeps_the_error(
        pairs in prop::collection::vec((0usize..3, 0usize..3), 1..30),
        shift in 1usize..3,
    ) {
        let (a, b): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let renamed: Vec<usize> = b.iter().map(|&l| (l + shift) % 3).collect();
        prop_assert_eq!(error_rate(&a, &b).unwrap(), error_rate(&a, &renamed).unwrap());
    }

    #[test]
    fn dual_points_are_feasible(m in (2usize..4).prop_flat_map(|d| matrix(d, d + 3)), t in matrix(4, 1)) {
        let d = m.nrows();
        prop_assume!(m.rank(1e-6) == d);
        let target = DVector::from_iterator(d, t.iter().copied().take(d));
        let w = dual_point(&m, &target).unwrap();
        prop_assert!(m.tr_mul(&w).amax() <= 1.0 + 1e-8);
    }

    #[test]
    fn spectral_labels_ignore_affinity_scale(
        noise in matrix(9, 9),
        scale in prop_oneof![Just(0.25), Just(2.0), Just(1024.0)],
        seed in 0u64..50,
    ) {
        let mut a = DMatrix::from_fn(9, 9, |i, j| if i / 3 == j / 3 { 1.0 } else { 0.0 });
        a += noise.abs() * 0.02;
        a = &a + a.transpose();
        let base = spectral_cluster(&a, 3, seed).unwrap();
        let scaled = spectral_cluster(&(a * scale), 3, seed).unwrap();
        prop_assert_eq!(base.labels, scaled.labels);
    }

    #[test]
    fn synthetic_columns_have_unit_norm(theta in 1.0f64..90.0, seed in 0u64..1000) {
        let bases = make_bases(theta).unwrap();
        let (x, truth) = sample_union(&bases, 5, seed).unwrap();
        for (j, col) in x.values().column_iter().enumerate() {
            prop_assert!((col.norm() - 1.0).abs() <= 1e-12);
            let b = bases[truth[j]].basis();
            let residual = col - b * b.tr_mul(&col);
            prop_assert!(residual.norm() <= 1e-12);
        }
    }
}
