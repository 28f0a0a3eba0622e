use birdcall::augment::LabeledSample;
use birdcall::nn::build_model;
use birdcall::nn::gradcheck::random_tensor;
use birdcall::train::{mse_loss, train, validation_auc, Adam};
use birdcall::{CbrnnConfig, FeaturePair, Label, Mode, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_cfg() -> CbrnnConfig {
    CbrnnConfig {
        frames: 20,
        mbe_bands: 8,
        n_filters: 3,
        pool_time: vec![2, 2],
        pool_freq_mbe: vec![4, 2],
        rnn_units: 3,
        fc_units: 3,
        ..CbrnnConfig::default()
    }
}

/// Present clips have every MBE value shifted up by `shift`.
fn separable(n: usize, shift: f64, seed: u64) -> Vec<LabeledSample> {
    let cfg = small_cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let present = i % 2 == 0;
            let offset = if present { shift } else { 0.0 };
            let mbe = random_tensor(&mut rng, [cfg.frames, cfg.mbe_bands, 1], 1.0).map(|v| v + offset);
            let dom = random_tensor(&mut rng, [cfg.frames, cfg.domfreq_slots, 2], 1.0);
            let label = if present { Label::Present } else { Label::Absent };
            LabeledSample::original(FeaturePair::new(format!("s{i}"), mbe, dom).unwrap(), label)
        })
        .collect()
}

#[test]
fn loss_falls_over_first_adam_steps() {
    let data = separable(16, 2.0, 5);
    let batch: Vec<&FeaturePair> = data.iter().map(|s| &s.features).collect();
    let y: Vec<f64> = data.iter().map(|s| s.label.target().unwrap()).collect();
    // No dropout, so every step sees the same function of the parameters.
    let cfg = CbrnnConfig { dropout: 0.0, ..small_cfg() };
    let mut model = build_model(cfg, 9).unwrap();
    let mut adam = Adam::new(model.params(), Default::default());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut losses = Vec::new();
    for _ in 0..6 {
        let cache = model.forward(&batch, Mode::Train, &mut rng).unwrap();
        let (loss, grad) = mse_loss(&cache.outputs, &y).unwrap();
        losses.push(loss);
        let grads = model.backward(&cache, &grad).unwrap();
        adam.step(model.params_mut(), &grads).unwrap();
        model.update_running_stats(&cache);
    }
    assert!(losses.windows(2).all(|w| w[1] < w[0]), "{losses:?}");
}

#[test]
fn best_snapshot_and_determinism() {
    let train_set = separable(24, 1.0, 1);
    let val = separable(12, 1.0, 2);
    let cfg = TrainConfig {
        max_epochs: 12,
        patience: 4,
        batch_size: 8,
        seed: 3,
        ..TrainConfig::default()
    };
    let run = || train(build_model(small_cfg(), 4).unwrap(), &train_set, &val, &cfg).unwrap();
    let (model, history) = run();
    let (again, history_again) = run();
    assert_eq!(history, history_again);
    assert_eq!(model, again);

    assert_eq!(validation_auc(&model, &val).unwrap(), history.best_val_auc);
    let max = history.epochs.iter().map(|e| e.val_auc).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(max, history.best_val_auc);
    assert!(history.epochs.len() <= history.best_epoch + cfg.patience);
    assert!(history.epochs.len() <= cfg.max_epochs);
}

#[test]
fn separable_set_reaches_high_validation_auc() {
    let train_set = separable(200, 1.0, 11);
    let val = separable(60, 1.0, 12);
    let cfg = TrainConfig {
        max_epochs: 100,
        patience: 10,
        seed: 1,
        ..TrainConfig::default()
    };
    let (_, history) = train(build_model(small_cfg(), 2).unwrap(), &train_set, &val, &cfg).unwrap();
    assert!(history.best_val_auc >= 0.95, "best val AUC {}", history.best_val_auc);
}

#[test]
fn single_class_validation_is_rejected_up_front() {
    let train_set = separable(8, 1.0, 1);
    let val: Vec<LabeledSample> = separable(8, 1.0, 2).into_iter().filter(|s| s.label == Label::Present).collect();
    let cfg = TrainConfig {
        max_epochs: 3,
        patience: 1,
        batch_size: 4,
        ..TrainConfig::default()
    };
    assert!(train(build_model(small_cfg(), 0).unwrap(), &train_set, &val, &cfg).is_err());
}
