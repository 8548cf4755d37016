mod common;

use cement_core::harness::{
    encoder_batch_sweep, evaluate, spearman, train, write_trace_csv, DualEncoder, LinearEncoder,
    LossKind, ToyDataset, ToyDatasetConfig, TrainConfig, VocabSizes,
};
use cement_core::cement::Objective;
use cement_core::margin::{MarginConfig, MarginMode};
use nalgebra::DMatrix;
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pinv(a: &Array2<f64>) -> Array2<f64> {
    let m = DMatrix::from_row_slice(a.nrows(), a.ncols(), a.as_slice().unwrap());
    let p = m.pseudo_inverse(1e-12).unwrap();
    Array2::from_shape_fn((p.nrows(), p.ncols()), |(i, j)| p[(i, j)])
}

#[test]
fn exact_recovery_with_generating_maps() {
    let cfg = ToyDatasetConfig { latent_dim: 40, noise_std: 0.0, scenes: 600, seed: 2, ..Default::default() };
    let data = ToyDataset::synthesize(&cfg).unwrap();
    let enc = DualEncoder {
        image: LinearEncoder { weight: pinv(&data.a_img) },
        text: LinearEncoder { weight: pinv(&data.a_txt) },
    };
    let report = evaluate(&enc, &data, 0.07).unwrap();
    assert!(data.scenes.iter().all(|s| s.displacement > 0.0));
    assert_eq!(report.i2t_acc, 1.0);
    assert_eq!(report.t2i_acc, 1.0);
}

#[test]
fn untrained_encoders_sit_at_chance() {
    let data = ToyDataset::synthesize(&ToyDatasetConfig { scenes: 1000, ..Default::default() }).unwrap();
    for seed in 0..3 {
        let r = evaluate(&DualEncoder::random(32, 32, seed), &data, 0.07).unwrap();
        assert!((r.i2t_acc - 0.5).abs() <= 0.1, "{r:?}");
        assert!((r.t2i_acc - 0.5).abs() <= 0.1, "{r:?}");
    }
}

#[test]
fn concreteness_tracks_image_displacement_at_zero_noise() {
    let data = ToyDataset::synthesize(&ToyDatasetConfig { noise_std: 0.0, scenes: 500, ..Default::default() })
        .unwrap();
    let moved: Vec<f64> = (0..data.len())
        .map(|i| {
            let mut s = 0.0;
            for k in 0..data.images.ncols() {
                let d = data.images[[i, k]] - data.negative_images[[i, k]];
                s += d * d;
            }
            s.sqrt()
        })
        .collect();
    let c = data.concreteness();
    // brute-force pairwise concordance: every pair must be ordered the same way
    for i in 0..c.len() {
        for j in 0..c.len() {
            if moved[i] < moved[j] - 1e-9 {
                assert!(c[i] < c[j]);
            }
        }
    }
    // identical flips differ only by rounding in `moved`; snap before ranking
    let snapped: Vec<f64> = moved.iter().map(|m| (m * 1e9).round()).collect();
    assert!((spearman(&c, &snapped) - 1.0).abs() <= 1e-12);
}

#[test]
fn zero_column_difference_maps_to_scale_minimum() {
    let vocab = VocabSizes { object1: 2, attribute: 2, relation: 2, object2: 2 };
    let cfg = ToyDatasetConfig { vocab, latent_dim: 3, noise_std: 0.0, scenes: 50, ..Default::default() };
    let mut a_img = Array2::from_shape_fn((3, 8), |(r, c)| (r * 8 + c) as f64 + 1.0);
    // the two attribute items share an image column
    for r in 0..3 {
        a_img[[r, 3]] = a_img[[r, 2]];
    }
    let a_txt = Array2::from_shape_fn((3, 8), |(r, c)| ((r + 2 * c) % 5) as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let data = ToyDataset::from_maps(&cfg, a_img, a_txt, &mut rng).unwrap();
    let attr: Vec<_> = data.scenes.iter().filter(|s| s.flipped_slot == 1).collect();
    assert!(!attr.is_empty());
    for s in attr {
        assert_eq!(s.displacement, 0.0);
        assert_eq!(s.concreteness, 1.0);
    }
    assert!(data.scenes.iter().any(|s| s.concreteness == 5.0));
}

fn desk() -> (ToyDataset, TrainConfig) {
    let data = ToyDataset::synthesize(&ToyDatasetConfig::default()).unwrap();
    (data, TrainConfig::default())
}

#[test]
fn training_is_deterministic_and_direction_holds() {
    let (data, cfg) = desk();
    let adaptive = train(&data, &cfg).unwrap();
    let again = train(&data, &cfg).unwrap();
    assert_eq!(adaptive.trace, again.trace);
    assert_eq!(adaptive.encoders, again.encoders);
    assert!(adaptive.eval.rank_correlation > 0.3, "{:?}", adaptive.eval);
    assert!(adaptive.eval.i2t_acc > 0.9);

    let zero = train(&data, &TrainConfig { margin: MarginConfig::zero(), ..cfg }).unwrap();
    let info = train(&data, &TrainConfig { loss: LossKind::InfoNce, ..cfg }).unwrap();
    assert_eq!(zero.trace, info.trace);
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_trace_csv(&mut a, &zero.trace).unwrap();
    write_trace_csv(&mut b, &info.trace).unwrap();
    assert_eq!(a, b);

    let one = train(
        &data,
        &TrainConfig { margin: MarginConfig::with_mode(MarginMode::Static(1.0)), ..cfg },
    )
    .unwrap();
    assert!(one.mean_hard_share() > zero.mean_hard_share());
}

#[test]
fn encoder_sweep_resamples_beyond_dataset_size() {
    let data = ToyDataset::synthesize(&ToyDatasetConfig { scenes: 100, ..Default::default() }).unwrap();
    let enc = DualEncoder::random(16, 32, 1);
    let pts = encoder_batch_sweep(&data, &enc, &[16, 64, 256], &Objective::InfoNce, 0.07, 9).unwrap();
    assert_eq!(pts.len(), 3);
    assert_eq!(pts[2].n_anchors, 256);
    for p in &pts {
        assert!(p.report.zero_sum_residual().abs() <= 1e-12);
    }
    assert!(pts[2].report.hard_share < pts[0].report.hard_share);
}
