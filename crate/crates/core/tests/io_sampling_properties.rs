//! Round trips, partitioning, sampling and noise invariants.

mod common;

use common::cloud;
use ndarray::Array2;
use proptest::prelude::*;
use toposcore::io::{
    decode_csv, decode_tsf1, encode_csv, encode_tsf1, load_embeddings, write_tsf1,
};
use toposcore::sampling::{
    kde_fit, kde_sample, perturb_gaussian, seeded_rng, BandwidthRule, NoiseConfig,
};
use toposcore::{partition_by_class, LabeledPointCloud};

fn labeled() -> impl Strategy<Value = LabeledPointCloud> {
    cloud(1..=40, 1..=6).prop_flat_map(|pts| {
        let n = pts.nrows();
        prop::collection::vec(0u32..5, n)
            .prop_map(move |labels| LabeledPointCloud::new(pts.clone(), labels).unwrap())
    })
}

/// Values representable in `f32`, so TSF1 round trips are exact.
fn as_f32(c: &LabeledPointCloud) -> LabeledPointCloud {
    LabeledPointCloud::new(c.points().mapv(|v| v as f32 as f64), c.labels().to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tsf1_round_trip(c in labeled()) {
        let c = as_f32(&c);
        prop_assert_eq!(decode_tsf1(&encode_tsf1(&c)).unwrap(), c);
    }

    #[test]
    fn csv_round_trip(c in labeled()) {
        prop_assert_eq!(decode_csv(encode_csv(&c).as_bytes()).unwrap(), c);
    }

    #[test]
    fn partition_preserves_rows(c in labeled()) {
        let parts = partition_by_class(&c);
        prop_assert_eq!(parts.values().map(|p| p.nrows()).sum::<usize>(), c.len());
        prop_assert_eq!(parts.len(), c.class_count());
        for (label, rows) in &parts {
            let expected: Vec<_> = c.labels().iter().enumerate().filter(|(_, l)| *l == label).map(|(i, _)| c.points().row(i).to_owned()).collect();
            prop_assert_eq!(rows.nrows(), expected.len());
            for (r, e) in rows.rows().into_iter().zip(&expected) {
                prop_assert_eq!(r, e.view());
            }
        }
    }

    #[test]
    fn kde_is_reproducible(pts in cloud(2..=20, 1..=5), seed in any::<u64>(), m in 1usize..50) {
        prop_assume!(pts.rows().into_iter().any(|r| r != pts.row(0)));
        let model = kde_fit(pts.view(), BandwidthRule::Scott).unwrap();
        let a = kde_sample(&model, m, &mut seeded_rng(seed, 3));
        let b = kde_sample(&model, m, &mut seeded_rng(seed, 3));
        prop_assert_eq!(a.dim(), (m, pts.ncols()));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn perturbation_touches_the_selected_rows_only(c in labeled(), fraction in 0.05f64..1.0, seed in any::<u64>()) {
        let cfg = NoiseConfig::new(vec![1.0; c.dim()], fraction, seed).unwrap();
        let noisy = perturb_gaussian(&c, &cfg).unwrap();
        prop_assert_eq!(noisy.labels(), c.labels());
        let changed = (0..c.len()).filter(|&i| noisy.points().row(i) != c.points().row(i)).count();
        prop_assert_eq!(changed, cfg.selected_count(c.len()));
        prop_assert_eq!(perturb_gaussian(&c, &cfg).unwrap(), noisy);
    }

    #[test]
    fn zero_variance_noise_is_identity(c in labeled(), seed in any::<u64>()) {
        let cfg = NoiseConfig::new(vec![0.0; c.dim()], 0.5, seed).unwrap();
        prop_assert_eq!(perturb_gaussian(&c, &cfg).unwrap(), c);
    }
}

#[test]
fn tsf1_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.tsf1");
    let c = LabeledPointCloud::new(
        Array2::from_shape_fn((5, 3), |(i, j)| (i * 3 + j) as f64 * 0.5),
        vec![2, 0, 2, 1, 0],
    )
    .unwrap();
    write_tsf1(&path, &c).unwrap();
    assert_eq!(load_embeddings(&path, None).unwrap(), c);
    let bytes = std::fs::read(&path).unwrap();
    assert!(bytes.starts_with(b"TSF1 5 3\n"));
    assert_eq!(bytes.len(), 9 + 5 * 4 + 15 * 4);
}
