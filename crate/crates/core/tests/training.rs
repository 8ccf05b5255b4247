use glt_core::data::{
    chronological_split, generate_synthetic, make_windows, normalize, NormalizationSpec, SynthConfig, Topology, WindowSample,
};
use glt_core::graph::{build_graph, BinaryMask, GraphConfig, MaskKind};
use glt_core::model::{init_params, GltModel};
use glt_core::train::{backward, batch_loss, gradient_check, train, GradCheckOptions, StopReason, TrainConfig};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Fixture {
    model: GltModel,
    train: Vec<WindowSample>,
    validation: Vec<WindowSample>,
}

fn fixture(links: usize) -> Fixture {
    let (series, network) = generate_synthetic(&SynthConfig::new(links, 3, 5, Topology::Ring)).unwrap();
    let split = chronological_split(&series, (0.34, 0.33, 0.33)).unwrap();
    let graph = build_graph(&network, &split.train, &GraphConfig { gamma: 2, hops: 2, ..GraphConfig::default() }).unwrap();
    let norm = NormalizationSpec::new(glt_core::data::NormalizationMode::MaxScale, 100.0).unwrap();
    let train = make_windows(&normalize(&split.train, &norm).unwrap(), 4, 1).unwrap();
    let validation = make_windows(&normalize(&split.validation, &norm).unwrap(), 4, 1).unwrap();
    Fixture {
        model: init_params(graph.ultimate, 1, 0.2).unwrap(),
        train: train.into_iter().step_by(3).collect(),
        validation: validation.into_iter().step_by(5).collect(),
    }
}

fn config(max_epochs: usize) -> TrainConfig {
    TrainConfig {
        learning_rate: 1e-3,
        batch_size: 8,
        max_epochs,
        seed: 9,
        ..TrainConfig::default()
    }
}

#[test]
fn same_seed_same_trajectory() {
    let f = fixture(6);
    let (a, log_a) = train(f.model.clone(), &f.train, &f.validation, &config(4)).unwrap();
    let (b, log_b) = train(f.model.clone(), &f.train, &f.validation, &config(4)).unwrap();
    assert_eq!(log_a.to_csv(), log_b.to_csv());
    assert_eq!(a, b);
    let (c, _) = train(f.model, &f.train, &f.validation, &TrainConfig { seed: 10, ..config(4) }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn masks_survive_training_and_best_model_is_returned() {
    let f = fixture(8);
    let sparse = f.model.masks().iter().any(|m| m.nonzero_count() < 64);
    assert!(sparse, "fixture should have masked entries");
    let (best, log) = train(f.model, &f.train, &f.validation, &config(6)).unwrap();
    assert!(best.masks_respected());
    assert_eq!(log.epochs.len(), 6);
    let best_val = batch_loss(&best, &f.validation).unwrap();
    assert_eq!(best_val, log.best_val_mse().unwrap());
    assert_eq!(log.epochs[log.best_epoch - 1].val_mse, best_val);
    assert!(log.final_val_mse().unwrap() < log.initial_val_mse);
}

#[test]
fn early_stopping_bounds_the_run() {
    let f = fixture(5);
    // A huge step makes validation erratic; the patience window must bound the run.
    let cfg = TrainConfig {
        learning_rate: 0.5,
        early_stop_patience: 2,
        ..config(40)
    };
    let (_, log) = train(f.model, &f.train, &f.validation, &cfg).unwrap();
    if log.stop_reason == StopReason::EarlyStop {
        assert_eq!(log.epochs.len(), log.best_epoch + 2);
    } else {
        assert_eq!(log.epochs.len(), 40);
    }
    assert!(log.epochs.len() <= 40);
}

#[test]
fn gradients_vanish_off_mask() {
    let f = fixture(7);
    let (_, grads) = backward(&f.model, &f.train[..5]).unwrap();
    for (g, m) in grads.conv.iter().zip(f.model.masks()) {
        for ((i, j), &v) in g.indexed_iter() {
            if !m.contains(i, j) {
                assert_eq!(v, 0.0);
            }
        }
    }
}

fn random_case(seed: u64) -> (GltModel, Vec<WindowSample>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=8);
    let k = rng.random_range(1..=3);
    let m = rng.random_range(1..=6);
    let masks = (1..=k)
        .map(|h| {
            let v = Array2::from_shape_fn((n, n), |(i, j)| (i == j || rng.random_bool(0.5)) as u8);
            BinaryMask::new(v, MaskKind::Ultimate, Some(h)).unwrap()
        })
        .collect();
    let model = init_params(masks, seed, 0.5).unwrap();
    let batch = (0..3)
        .map(|_| WindowSample {
            inputs: Array2::from_shape_fn((m, n), |_| rng.random_range(0.0..1.0)),
            target: Array1::from_shape_fn(n, |_| rng.random_range(0.0..1.0)),
            t_index: m - 1,
        })
        .collect();
    (model, batch)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn analytic_gradients_match_finite_differences(seed in 0u64..10_000) {
        let (model, batch) = random_case(seed);
        let report = gradient_check(&model, &batch, &GradCheckOptions::default()).unwrap();
        prop_assert!(report.passed(), "max rel error {}", report.max_rel_error());
    }
}
