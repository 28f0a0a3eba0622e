//! Acceptance suite: one pass/fail line per criterion; exits nonzero if any
//! criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use birdcall::augment::{adapt_test_mixing, augment_blocks, blocks_mix, LabeledSample, Provenance};
use birdcall::cache::{decode_feature_cache, encode_feature_cache};
use birdcall::eval::{roc_auc, stratified_splits, SplitSpec};
use birdcall::features::extract_features;
use birdcall::nn::checkpoint::{load_checkpoint, save_checkpoint};
use birdcall::nn::gradcheck::{numeric_gradient, random_tensor, random_vec, relative_error, relative_error_with_floor};
use birdcall::nn::layers::{self, Activation};
use birdcall::nn::{build_model, CbrnnConfig, CbrnnModel, FeatureSet, Mode};
use birdcall::synth::{synth_corpus, SynthConfig};
use birdcall::train::{train, train_with_monitor, validation_auc, TrainConfig};
use birdcall::{AudioClip, FeatureConfig, FeaturePair, Label, Manifest, ManifestEntry, Tensor, SAMPLE_RATE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------- criterion 1

fn check(name: &str, err: f64, tol: f64, worst: &mut Vec<String>) -> Result<(), String> {
    worst.push(format!("{name} {err:.1e}"));
    ensure(err <= tol, || format!("{name}: relative error {err:.3e} > {tol:.0e}"))
}

fn gradient_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut report = Vec::new();

    // conv2d: input, kernel and bias
    let (shape, k, cout) = ([7, 6, 2], 3, 3);
    let x = random_tensor(&mut rng, shape, 1.0);
    let kernel = random_vec(&mut rng, k * k * shape[2] * cout, 0.5);
    let bias = random_vec(&mut rng, cout, 0.5);
    let proj = random_vec(&mut rng, shape[0] * shape[1] * cout, 1.0);
    let f = |x: &Tensor, kern: &[f64], b: &[f64]| dot(layers::conv2d(x, kern, b, k).unwrap().data(), &proj);
    let g = layers::conv2d_backward(&x, &kernel, &Tensor::from_vec([shape[0], shape[1], cout], proj.clone()).unwrap(), k)
        .map_err(|e| e.to_string())?;
    let nx = numeric_gradient(|v| f(&Tensor::from_vec(shape, v.to_vec()).unwrap(), &kernel, &bias), x.data());
    check("conv.input", relative_error(g.input.data(), &nx), 1e-6, &mut report)?;
    let nk = numeric_gradient(|v| f(&x, v, &bias), &kernel);
    check("conv.kernel", relative_error(&g.kernel, &nk), 1e-6, &mut report)?;
    let nb = numeric_gradient(|v| f(&x, &kernel, v), &bias);
    check("conv.bias", relative_error(&g.bias, &nb), 1e-6, &mut report)?;

    // maxpool
    let x = random_tensor(&mut rng, [8, 6, 2], 1.0);
    let pooled = layers::maxpool2d(&x, 2, 3).map_err(|e| e.to_string())?;
    let proj = random_vec(&mut rng, pooled.output.len(), 1.0);
    let gout = Tensor::from_vec(pooled.output.shape(), proj.clone()).unwrap();
    let gx = layers::maxpool2d_backward(x.shape(), &pooled.argmax, &gout);
    let nx = numeric_gradient(
        |v| dot(layers::maxpool2d(&Tensor::from_vec(x.shape(), v.to_vec()).unwrap(), 2, 3).unwrap().output.data(), &proj),
        x.data(),
    );
    check("maxpool.input", relative_error(gx.data(), &nx), 1e-5, &mut report)?;

    // batch norm over a batch of 3
    let shape = [4, 3, 2];
    let xs: Vec<Tensor> = (0..3).map(|_| random_tensor(&mut rng, shape, 2.0)).collect();
    let gamma = random_vec(&mut rng, 2, 1.0);
    let beta = random_vec(&mut rng, 2, 1.0);
    let projs: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut rng, 24, 1.0)).collect();
    let bn_loss = |xs: &[Tensor], gm: &[f64], bt: &[f64]| {
        let (ys, _) = layers::batchnorm_train(xs, gm, bt, 1e-5).unwrap();
        ys.iter().zip(&projs).map(|(y, p)| dot(y.data(), p)).sum::<f64>()
    };
    let (_, cache) = layers::batchnorm_train(&xs, &gamma, &beta, 1e-5).map_err(|e| e.to_string())?;
    let gouts: Vec<Tensor> = projs.iter().map(|p| Tensor::from_vec(shape, p.clone()).unwrap()).collect();
    let bg = layers::batchnorm_backward(&cache, &gamma, &gouts);
    let flat: Vec<f64> = xs.iter().flat_map(|t| t.data().to_vec()).collect();
    let unflat = |v: &[f64]| -> Vec<Tensor> {
        v.chunks_exact(24).map(|c| Tensor::from_vec(shape, c.to_vec()).unwrap()).collect()
    };
    let nx = numeric_gradient(|v| bn_loss(&unflat(v), &gamma, &beta), &flat);
    let ax: Vec<f64> = bg.inputs.iter().flat_map(|t| t.data().to_vec()).collect();
    check("batchnorm.input", relative_error(&ax, &nx), 1e-6, &mut report)?;
    let ng = numeric_gradient(|v| bn_loss(&xs, v, &beta), &gamma);
    check("batchnorm.gamma", relative_error(&bg.gamma, &ng), 1e-6, &mut report)?;
    let nb = numeric_gradient(|v| bn_loss(&xs, &gamma, v), &beta);
    check("batchnorm.beta", relative_error(&bg.beta, &nb), 1e-6, &mut report)?;

    // bidirectional GRU
    let (units, input, steps) = (4, 3, 6);
    let mk = |rng: &mut ChaCha8Rng| {
        (
            random_vec(rng, 3 * units * input, 0.6),
            random_vec(rng, 3 * units * units, 0.6),
            random_vec(rng, 3 * units, 0.3),
        )
    };
    let (fw, fu, fb) = mk(&mut rng);
    let (bw, bu, bb) = mk(&mut rng);
    let xs: Vec<Vec<f64>> = (0..steps).map(|_| random_vec(&mut rng, input, 1.0)).collect();
    let proj: Vec<Vec<f64>> = (0..steps).map(|_| random_vec(&mut rng, 2 * units, 1.0)).collect();
    let p = |w: &'static str, v: Option<&[f64]>| -> [Vec<f64>; 6] {
        let mut all = [fw.clone(), fu.clone(), fb.clone(), bw.clone(), bu.clone(), bb.clone()];
        let idx = ["fw", "fu", "fb", "bw", "bu", "bb"].iter().position(|n| *n == w).unwrap();
        if let Some(v) = v {
            all[idx] = v.to_vec();
        }
        all
    };
    let gru_loss = |xs: &[Vec<f64>], a: &[Vec<f64>; 6]| {
        let fp = layers::GruParams { w: &a[0], u: &a[1], b: &a[2], units, input };
        let bp = layers::GruParams { w: &a[3], u: &a[4], b: &a[5], units, input };
        let (out, _) = layers::bigru_forward(xs, fp, bp).unwrap();
        out.iter().zip(&proj).map(|(o, q)| dot(o, q)).sum::<f64>()
    };
    let base = p("fw", None);
    let fp = layers::GruParams { w: &base[0], u: &base[1], b: &base[2], units, input };
    let bp = layers::GruParams { w: &base[3], u: &base[4], b: &base[5], units, input };
    let (_, cache) = layers::bigru_forward(&xs, fp, bp).map_err(|e| e.to_string())?;
    let gg = layers::bigru_backward(&xs, fp, bp, &cache, &proj);
    let analytic = [&gg.fwd.w, &gg.fwd.u, &gg.fwd.b, &gg.bwd.w, &gg.bwd.u, &gg.bwd.b];
    for (i, name) in ["fw", "fu", "fb", "bw", "bu", "bb"].into_iter().enumerate() {
        let n = numeric_gradient(|v| gru_loss(&xs, &p(name, Some(v))), &base[i]);
        check(&format!("bigru.{name}"), relative_error(analytic[i], &n), 1e-5, &mut report)?;
    }
    let nx = numeric_gradient(
        |v| gru_loss(&v.chunks_exact(input).map(<[f64]>::to_vec).collect::<Vec<_>>(), &base),
        &xs.concat(),
    );
    check("bigru.input", relative_error(&gg.input.concat(), &nx), 1e-5, &mut report)?;

    // time-distributed dense, every activation
    for act in [Activation::Linear, Activation::Tanh, Activation::Relu] {
        let (f, u, steps) = (5, 4, 3);
        let xs: Vec<Vec<f64>> = (0..steps).map(|_| random_vec(&mut rng, f, 1.0)).collect();
        let w = random_vec(&mut rng, u * f, 0.7);
        let b = random_vec(&mut rng, u, 0.3);
        let proj: Vec<Vec<f64>> = (0..steps).map(|_| random_vec(&mut rng, u, 1.0)).collect();
        let loss = |xs: &[Vec<f64>], w: &[f64], b: &[f64]| {
            let out = layers::time_distributed_dense(xs, w, b, act).unwrap();
            out.iter().zip(&proj).map(|(o, q)| dot(o, q)).sum::<f64>()
        };
        let out = layers::time_distributed_dense(&xs, &w, &b, act).map_err(|e| e.to_string())?;
        let dg = layers::time_distributed_dense_backward(&xs, &out, &w, act, &proj);
        let tol = if act == Activation::Relu { 1e-5 } else { 1e-6 };
        let nw = numeric_gradient(|v| loss(&xs, v, &b), &w);
        check(&format!("dense[{act:?}].w"), relative_error(&dg.w, &nw), tol, &mut report)?;
        let nb = numeric_gradient(|v| loss(&xs, &w, v), &b);
        check(&format!("dense[{act:?}].b"), relative_error(&dg.b, &nb), tol, &mut report)?;
        let nx = numeric_gradient(
            |v| loss(&v.chunks_exact(f).map(<[f64]>::to_vec).collect::<Vec<_>>(), &w, &b),
            &xs.concat(),
        );
        check(&format!("dense[{act:?}].input"), relative_error(&dg.input.concat(), &nx), tol, &mut report)?;
    }

    // maxout + sigmoid head
    let (f, pieces, steps) = (6, 2, 5);
    let xs: Vec<Vec<f64>> = (0..steps).map(|_| random_vec(&mut rng, f, 1.0)).collect();
    let w = random_vec(&mut rng, pieces * f, 0.8);
    let b = random_vec(&mut rng, pieces, 0.3);
    let head = |xs: &[Vec<f64>], w: &[f64], b: &[f64]| layers::maxout_sigmoid_head(xs, w, b).unwrap().output;
    let cache = layers::maxout_sigmoid_head(&xs, &w, &b).map_err(|e| e.to_string())?;
    let hg = layers::maxout_sigmoid_head_backward(&cache, &w, pieces, steps, 1.0);
    let nw = numeric_gradient(|v| head(&xs, v, &b), &w);
    check("head.w", relative_error(&hg.w, &nw), 1e-5, &mut report)?;
    let nb = numeric_gradient(|v| head(&xs, &w, v), &b);
    check("head.b", relative_error(&hg.b, &nb), 1e-5, &mut report)?;
    let nx = numeric_gradient(|v| head(&v.chunks_exact(f).map(<[f64]>::to_vec).collect::<Vec<_>>(), &w, &b), &xs.concat());
    check("head.input", relative_error(&hg.input.concat(), &nx), 1e-5, &mut report)?;

    // multiplicative merge
    let a = random_tensor(&mut rng, [5, 1, 4], 1.0);
    let bt = random_tensor(&mut rng, [5, 1, 4], 1.0);
    let proj = random_vec(&mut rng, 20, 1.0);
    let (ga, gb) = layers::merge_multiply_backward(&a, &bt, &Tensor::from_vec([5, 1, 4], proj.clone()).unwrap());
    let merge = |a: &Tensor, b: &Tensor| dot(layers::merge_multiply(a, b).unwrap().data(), &proj);
    let na = numeric_gradient(|v| merge(&Tensor::from_vec([5, 1, 4], v.to_vec()).unwrap(), &bt), a.data());
    check("merge.a", relative_error(ga.data(), &na), 1e-6, &mut report)?;
    let nb = numeric_gradient(|v| merge(&a, &Tensor::from_vec([5, 1, 4], v.to_vec()).unwrap()), bt.data());
    check("merge.b", relative_error(gb.data(), &nb), 1e-6, &mut report)?;

    // full model on a reduced input size, every parameter group
    let cfg = CbrnnConfig {
        frames: 40,
        mbe_bands: 10,
        pool_time: vec![4, 2],
        pool_freq_mbe: vec![5, 2],
        ..CbrnnConfig::default()
    };
    let model = build_model(cfg.clone(), 5).map_err(|e| e.to_string())?;
    let batch: Vec<FeaturePair> = (0..3)
        .map(|i| {
            FeaturePair::new(
                format!("s{i}"),
                random_tensor(&mut rng, [cfg.frames, cfg.mbe_bands, 1], 2.0),
                random_tensor(&mut rng, [cfg.frames, cfg.domfreq_slots, 2], 2.0),
            )
            .unwrap()
        })
        .collect();
    let refs: Vec<&FeaturePair> = batch.iter().collect();
    let targets = [1.0, 0.0, 1.0];
    let loss = |m: &CbrnnModel| {
        let mut r = ChaCha8Rng::seed_from_u64(33);
        let c = m.forward(&refs, Mode::Train, &mut r).unwrap();
        c.outputs.iter().zip(&targets).map(|(p, y)| (p - y).powi(2)).sum::<f64>() / 3.0
    };
    let mut r = ChaCha8Rng::seed_from_u64(33);
    let cache = model.forward(&refs, Mode::Train, &mut r).map_err(|e| e.to_string())?;
    let dl: Vec<f64> = cache.outputs.iter().zip(&targets).map(|(p, y)| 2.0 * (p - y) / 3.0).collect();
    let grads = model.backward(&cache, &dl).map_err(|e| e.to_string())?;
    let mut worst_model: f64 = 0.0;
    for (gi, group) in model.params().groups.iter().enumerate() {
        let n = numeric_gradient(
            |v| {
                let mut m = model.clone();
                m.params_mut().groups[gi].values.copy_from_slice(v);
                loss(&m)
            },
            &group.values,
        );
        let e = relative_error_with_floor(&grads.groups[gi].values, &n, 1e-6);
        ensure(e <= 1e-4, || format!("model.{}: relative error {e:.3e} > 1e-4", group.name))?;
        worst_model = worst_model.max(e);
    }
    Ok(format!(
        "{} layer checks within tolerance; full model worst group {:.1e} over {} groups",
        report.len(),
        worst_model,
        model.params().groups.len()
    ))
}

// ---------------------------------------------------------------- criterion 2

/// Counts weights from the layer recipe alone.
fn enumerate_parameters(cfg: &CbrnnConfig) -> usize {
    let k2 = cfg.receptive_field * cfg.receptive_field;
    let n = cfg.n_filters;
    let branch = |in_ch: usize| {
        (0..cfg.n_cnn_layers)
            .map(|l| {
                let cin = if l == 0 { in_ch } else { n };
                k2 * cin * n + n + 2 * n
            })
            .sum::<usize>()
    };
    let mut total = 0;
    if cfg.features.uses_mbe() {
        total += branch(1);
    }
    if cfg.features.uses_domfreq() {
        total += branch(2);
    }
    let u = cfg.rnn_units;
    let mut width = n;
    for _ in 0..cfg.rnn_layers {
        total += 2 * 3 * u * (width + u + 1);
        width = 2 * u;
    }
    for _ in 0..cfg.fc_layers {
        total += cfg.fc_units * (width + 1);
        width = cfg.fc_units;
    }
    total + cfg.maxout_pieces * (width + 1)
}

fn parameter_count() -> Outcome {
    let cfg = CbrnnConfig::default();
    ensure(
        cfg.n_cnn_layers == 2 && cfg.n_filters == 8 && cfg.rnn_units == 8 && cfg.fc_units == 8 && cfg.maxout_pieces == 2,
        || format!("default config is not the 2x8 / 8 / 8 / maxout-2 layout: {cfg:?}"),
    )?;
    let model = build_model(cfg.clone(), 0).map_err(|e| e.to_string())?;
    let count = model.parameter_count();
    let expected = enumerate_parameters(&cfg);
    ensure(count == expected, || format!("model reports {count}, enumeration gives {expected}"))?;
    ensure((2300..=2900).contains(&count), || format!("{count} outside [2300, 2900]"))?;
    for features in [FeatureSet::Mbe, FeatureSet::Domfreq] {
        let c = CbrnnConfig { features, ..cfg.clone() };
        let m = build_model(c.clone(), 0).map_err(|e| e.to_string())?;
        ensure(m.parameter_count() == enumerate_parameters(&c), || {
            format!("{features} model count {} != {}", m.parameter_count(), enumerate_parameters(&c))
        })?;
    }
    Ok(format!("default model has {count} trainable parameters (enumeration agrees)"))
}

// ---------------------------------------------------------------- criterion 3

fn run_branch(input: &Tensor, cfg: &CbrnnConfig, pools_f: &[usize], rng: &mut ChaCha8Rng) -> Result<Tensor, String> {
    let mut x = input.clone();
    for (&pt, &pf) in cfg.pool_time.iter().zip(pools_f) {
        let kernel = random_vec(rng, 9 * x.channels() * cfg.n_filters, 0.3);
        let conv = layers::conv2d(&x, &kernel, &vec![0.0; cfg.n_filters], 3).map_err(|e| e.to_string())?;
        x = layers::maxpool2d(&conv, pt, pf).map_err(|e| e.to_string())?.output;
    }
    Ok(x)
}

fn shape_pipeline() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples: Vec<f64> = (0..441_000).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let clip = AudioClip::new("noise", samples, SAMPLE_RATE).map_err(|e| e.to_string())?;
    let pair = extract_features(&clip, &FeatureConfig::default()).map_err(|e| e.to_string())?;
    ensure(pair.mbe.shape() == [500, 40, 1], || format!("mbe shape {:?}", pair.mbe.shape()))?;
    ensure(pair.domfreq.shape() == [500, 3, 2], || format!("domfreq shape {:?}", pair.domfreq.shape()))?;

    let cfg = CbrnnConfig::default();
    let mbe = run_branch(&pair.mbe, &cfg, &cfg.pool_freq_mbe, &mut rng)?;
    let dom = run_branch(&pair.domfreq, &cfg, &cfg.pool_freq_domfreq, &mut rng)?;
    ensure(mbe.shape() == [5, 1, 8], || format!("mbe branch ends at {:?}", mbe.shape()))?;
    ensure(dom.shape() == [5, 1, 8], || format!("domfreq branch ends at {:?}", dom.shape()))?;

    let wide = cfg.clone().with_domfreq_slots(6);
    let dom6 = Tensor::zeros([500, 6, 2]);
    let dom6 = run_branch(&dom6, &wide, &wide.pool_freq_domfreq, &mut rng)?;
    ensure(dom6.shape() == [5, 1, 8], || format!("width-6 branch ends at {:?}", dom6.shape()))?;

    let model = build_model(cfg, 0).map_err(|e| e.to_string())?;
    let trace = model.shape_trace();
    for name in ["mbe.block1", "dom.block1"] {
        let shape = trace.iter().find(|(n, _)| n == name).map(|(_, s)| *s);
        ensure(shape == Some([5, 1, 8]), || format!("shape trace {name} = {shape:?}"))?;
    }
    Ok("10 s clip -> 500 frames; both branches reduce to 5x1x8 (width-6 variant too)".into())
}

// ---------------------------------------------------------------- criterion 4

fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut credit = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                credit += 1.0;
            } else if si == sj {
                credit += 0.5;
            }
        }
    }
    credit / pairs
}

fn auc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let transforms: [fn(f64) -> f64; 4] = [|x| 3.0 * x + 1.0, f64::exp, |x| x * x * x + x, f64::atan];
    let mut worst: f64 = 0.0;
    let mut tie_heavy = 0;
    for instance in 0..1000 {
        let n = rng.gen_range(2..=500);
        let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        labels[0] = true;
        labels[1] = false;
        let scores: Vec<f64> = if instance % 2 == 0 {
            tie_heavy += 1;
            let levels = rng.gen_range(1..=5);
            (0..n).map(|_| rng.gen_range(0..levels) as f64 / 4.0).collect()
        } else {
            (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
        };
        let auc = roc_auc(&scores, &labels).map_err(|e| e.to_string())?.auc;
        let oracle = pairwise_auc(&scores, &labels);
        worst = worst.max((auc - oracle).abs());
        ensure((auc - oracle).abs() <= 1e-12, || {
            format!("instance {instance}: rank AUC {auc} vs pairwise {oracle}")
        })?;
        let t = transforms[instance % transforms.len()];
        let mapped: Vec<f64> = scores.iter().map(|&s| t(s)).collect();
        let auc_t = roc_auc(&mapped, &labels).map_err(|e| e.to_string())?.auc;
        ensure((auc_t - auc).abs() <= 1e-12, || {
            format!("instance {instance}: monotone transform changed AUC {auc} -> {auc_t}")
        })?;
    }
    Ok(format!("1000 instances ({tie_heavy} tie-heavy), max |rank - pairwise| = {worst:.1e}"))
}

// ---------------------------------------------------------------- criterion 5

fn tone_clip(parts: &[(f64, f64)]) -> AudioClip {
    let sr = f64::from(SAMPLE_RATE);
    let samples = (0..441_000)
        .map(|i| {
            let t = i as f64 / sr;
            parts.iter().map(|(f, a)| a * (2.0 * std::f64::consts::PI * f * t).sin()).sum()
        })
        .collect();
    AudioClip::new("tone", samples, SAMPLE_RATE).unwrap()
}

fn dominant_frequency_accuracy() -> Outcome {
    let cfg = FeatureConfig::default();
    let mut worst: f64 = 0.0;
    for f in [600.0, 3000.0, 7900.0] {
        let pair = extract_features(&tone_clip(&[(f, 0.5)]), &cfg).map_err(|e| e.to_string())?;
        for t in 0..pair.frames() {
            let est = pair.domfreq.get(t, 0, 0);
            worst = worst.max((est - f).abs());
            ensure((est - f).abs() <= 5.0, || format!("{f} Hz tone, frame {t}: estimated {est} Hz"))?;
        }
    }
    let silent = AudioClip::new("silence", vec![0.0; 441_000], SAMPLE_RATE).unwrap();
    let pair = extract_features(&silent, &cfg).map_err(|e| e.to_string())?;
    ensure(pair.domfreq.data().iter().all(|&v| v == 0.0), || "silence produced nonzero slots".into())?;

    let pair = extract_features(&tone_clip(&[(2000.0, 0.2), (5000.0, 0.6)]), &cfg).map_err(|e| e.to_string())?;
    for t in 0..pair.frames() {
        let (f0, m0) = (pair.domfreq.get(t, 0, 0), pair.domfreq.get(t, 0, 1));
        let (f1, m1) = (pair.domfreq.get(t, 1, 0), pair.domfreq.get(t, 1, 1));
        ensure((f0 - 5000.0).abs() <= 5.0 && (f1 - 2000.0).abs() <= 5.0 && m0 >= m1, || {
            format!("two-tone frame {t}: slots ({f0}, {m0}), ({f1}, {m1})")
        })?;
    }
    Ok(format!("600/3000/7900 Hz within {worst:.2} Hz on every frame; silence all zero; two-tone ordered"))
}

// ---------------------------------------------------------------- criterion 6

fn tiny_pair(id: &str, rng: &mut ChaCha8Rng) -> FeaturePair {
    FeaturePair::new(id, random_tensor(rng, [10, 4, 1], 1.0), random_tensor(rng, [10, 3, 2], 1.0)).unwrap()
}

fn augmentation_contracts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (la, lb, want) in [
        (Label::Absent, Label::Absent, Label::Absent),
        (Label::Absent, Label::Present, Label::Present),
        (Label::Present, Label::Absent, Label::Present),
        (Label::Present, Label::Present, Label::Present),
    ] {
        let a = LabeledSample::original(tiny_pair("a", &mut rng), la);
        let b = LabeledSample::original(tiny_pair("b", &mut rng), lb);
        let m = blocks_mix(&a, &b).map_err(|e| e.to_string())?;
        ensure(m.label == want, || format!("{la:?} + {lb:?} gave {:?}", m.label))?;
    }

    let train: Vec<LabeledSample> = (0..100)
        .map(|i| {
            let label = if i % 3 == 0 { Label::Present } else { Label::Absent };
            LabeledSample::original(tiny_pair(&format!("t{i}"), &mut rng), label)
        })
        .collect();
    let out = augment_blocks(&train, &mut rng).map_err(|e| e.to_string())?;
    let mixed = out.iter().filter(|s| matches!(s.provenance, Provenance::BlocksMixed { .. })).count();
    ensure(out.len() == 200 && mixed == 100, || format!("blocks mixing gave {} samples, {mixed} mixed", out.len()))?;

    let test: Vec<FeaturePair> = (0..30).map(|i| tiny_pair(&format!("e{i}"), &mut rng)).collect();
    let pos = train.iter().filter(|s| s.label == Label::Present).count();
    let neg = train.len() - pos;
    let adapted = adapt_test_mixing(&train, &test, &mut rng).map_err(|e| e.to_string())?;
    let pos2 = adapted.iter().filter(|s| s.label == Label::Present).count();
    let neg2 = adapted.iter().filter(|s| s.label == Label::Absent).count();
    let test_mixed: Vec<&LabeledSample> = adapted
        .iter()
        .filter(|s| matches!(s.provenance, Provenance::TestMixed { .. }))
        .collect();
    ensure(pos2 == 2 * pos && neg2 == neg, || format!("positives {pos} -> {pos2}, negatives {neg} -> {neg2}"))?;
    ensure(test_mixed.len() == pos, || format!("{} test-mixed for {pos} positives", test_mixed.len()))?;
    let positive_ids: BTreeSet<&str> = train.iter().filter(|s| s.label == Label::Present).map(|s| s.id()).collect();
    for s in &test_mixed {
        let Provenance::TestMixed { train: base, .. } = &s.provenance else { unreachable!() };
        ensure(positive_ids.contains(base.as_str()) && s.label == Label::Present, || {
            format!("test-mixed sample based on `{base}` is not a present-labeled base")
        })?;
    }
    Ok(format!("OR truth table holds; blocks 100 -> 200; test mixing positives {pos} -> {pos2}, negatives unchanged at {neg}"))
}

// ---------------------------------------------------------------- criterion 7

fn synthetic_end_to_end() -> Outcome {
    let started = Instant::now();
    let corpus = synth_corpus(200, 2024, &SynthConfig::default()).map_err(|e| e.to_string())?;
    let feature_cfg = FeatureConfig::default();
    let samples: Vec<LabeledSample> = std::thread::scope(|s| {
        let handles: Vec<_> = corpus
            .chunks(25)
            .map(|chunk| {
                let cfg = &feature_cfg;
                s.spawn(move || {
                    chunk
                        .iter()
                        .map(|(clip, label)| LabeledSample::original(extract_features(clip, cfg).unwrap(), *label))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    let manifest = Manifest {
        entries: samples
            .iter()
            .map(|s| ManifestEntry { clip_id: s.id().to_owned(), label: s.label, path: None })
            .collect(),
    };
    let by_id = |ids: &[String]| -> Vec<LabeledSample> {
        ids.iter().map(|id| samples.iter().find(|s| s.id() == id).unwrap().clone()).collect()
    };
    let folds = stratified_splits(&manifest, &SplitSpec::development(7)).map_err(|e| e.to_string())?;
    let mut aucs = Vec::new();
    let mut max_epochs = 0;
    let mut max_time = Duration::ZERO;
    for (i, fold) in folds.iter().enumerate() {
        let t0 = Instant::now();
        let cfg = TrainConfig { max_epochs: 100, seed: i as u64, ..TrainConfig::default() };
        let model = build_model(CbrnnConfig::default(), 100 + i as u64).map_err(|e| e.to_string())?;
        let (model, history) = train(model, &by_id(&fold.train), &by_id(&fold.val), &cfg).map_err(|e| e.to_string())?;
        let elapsed = t0.elapsed();
        let auc = validation_auc(&model, &by_id(&fold.test)).map_err(|e| e.to_string())?;
        println!(
            "    fold {i}: {} epochs (best {} val {:.4}), test AUC {auc:.4}, {:.1} s",
            history.epochs.len(),
            history.best_epoch,
            history.best_val_auc,
            elapsed.as_secs_f64()
        );
        max_epochs = max_epochs.max(history.epochs.len());
        max_time = max_time.max(elapsed);
        aucs.push(auc);
    }
    let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
    ensure(max_epochs <= 100, || format!("a fold ran {max_epochs} epochs"))?;
    ensure(max_time <= Duration::from_secs(600), || format!("slowest fold took {:.0} s", max_time.as_secs_f64()))?;
    ensure(mean >= 0.95, || format!("mean test AUC {mean:.4} < 0.95 (folds {aucs:.4?})"))?;
    Ok(format!(
        "mean test AUC {mean:.4} over 5 folds, <= {max_epochs} epochs, slowest fold {:.1} s, total {:.1} s",
        max_time.as_secs_f64(),
        started.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- criterion 8

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

fn small_set(n: usize, seed: u64) -> Vec<LabeledSample> {
    let cfg = small_cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let present = i % 2 == 0;
            let shift = if present { 1.0 } else { 0.0 };
            let mbe = random_tensor(&mut rng, [cfg.frames, cfg.mbe_bands, 1], 1.0).map(|v| v + shift);
            let dom = random_tensor(&mut rng, [cfg.frames, cfg.domfreq_slots, 2], 1.0);
            let label = if present { Label::Present } else { Label::Absent };
            LabeledSample::original(FeaturePair::new(format!("x{i}"), mbe, dom).unwrap(), label)
        })
        .collect()
}

fn plateau_run(patience: usize) -> Result<(usize, usize, bool), String> {
    let data = small_set(8, 1);
    let model = build_model(small_cfg(), 2).map_err(|e| e.to_string())?;
    let cfg = TrainConfig { max_epochs: 500, patience, batch_size: 4, ..TrainConfig::default() };
    let mut snapshot = None;
    let (best, history) = train_with_monitor(model, &data, &cfg, |m, epoch| {
        if epoch == 3 {
            snapshot = Some(m.clone());
        }
        Ok(match epoch {
            1 => 0.5,
            2 => 0.6,
            3 => 0.9,
            _ => 0.7,
        })
    })
    .map_err(|e| e.to_string())?;
    Ok((history.epochs.len(), history.best_epoch, Some(best) == snapshot))
}

fn early_stopping() -> Outcome {
    ensure(TrainConfig::default().patience == 50, || "default patience is not 50".into())?;
    for patience in [5, 50] {
        let (ran, best, same) = plateau_run(patience)?;
        ensure(best == 3 && ran == 3 + patience && same, || {
            format!("patience {patience}: ran {ran} epochs, best {best}, snapshot returned: {same}")
        })?;
    }
    Ok("peak at epoch 3 stops at 8 (patience 5) and 53 (patience 50), returning the epoch-3 snapshot".into())
}

// ---------------------------------------------------------------- criterion 9

fn determinism_and_persistence() -> Outcome {
    let train_set = small_set(12, 3);
    let val_set = small_set(6, 4);
    let cfg = TrainConfig { max_epochs: 6, patience: 5, batch_size: 4, seed: 11, ..TrainConfig::default() };
    let run = || train(build_model(small_cfg(), 9).unwrap(), &train_set, &val_set, &cfg).unwrap();
    let (m1, h1) = run();
    let (m2, h2) = run();
    let bits = |m: &CbrnnModel| -> Vec<u64> {
        m.params().groups.iter().flat_map(|g| g.values.iter().map(|v| v.to_bits())).collect()
    };
    ensure(h1 == h2 && bits(&m1) == bits(&m2), || "two seeded runs differ".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.ckpt");
    save_checkpoint(&m1, &path).map_err(|e| e.to_string())?;
    let loaded = load_checkpoint(&path).map_err(|e| e.to_string())?;
    let pairs: Vec<FeaturePair> = val_set.iter().map(|s| s.features.clone()).collect();
    let a: Vec<u64> = m1.predict(&pairs).map_err(|e| e.to_string())?.iter().map(|v| v.to_bits()).collect();
    let b: Vec<u64> = loaded.predict(&pairs).map_err(|e| e.to_string())?.iter().map(|v| v.to_bits()).collect();
    ensure(a == b, || "checkpoint reload changed inference scores".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let clip = birdcall::synth::synth_clip("c", true, &SynthConfig::default(), &mut rng).map_err(|e| e.to_string())?;
    let pair = extract_features(&clip, &FeatureConfig::default()).map_err(|e| e.to_string())?;
    let back = decode_feature_cache(&encode_feature_cache(&pair), std::path::Path::new("mem")).map_err(|e| e.to_string())?;
    let same = back.clip_id == pair.clip_id
        && back.mbe.shape() == pair.mbe.shape()
        && back.domfreq.shape() == pair.domfreq.shape()
        && back.mbe.data().iter().zip(pair.mbe.data()).all(|(x, y)| x.to_bits() == y.to_bits())
        && back.domfreq.data().iter().zip(pair.domfreq.data()).all(|(x, y)| x.to_bits() == y.to_bits());
    ensure(same, || "feature cache round trip is not bitwise".into())?;
    Ok("seeded training bit-identical; checkpoint reload bit-identical; feature cache bitwise".into())
}

// ---------------------------------------------------------------- criterion 10

fn split_protocol() -> Outcome {
    let mut entries = Vec::new();
    for i in 0..15_690 {
        let label = if i < 7710 { Label::Present } else { Label::Absent };
        entries.push(ManifestEntry { clip_id: format!("r{i:05}"), label, path: None });
    }
    let manifest = Manifest { entries };
    let labels = manifest.labels();
    let folds = stratified_splits(&manifest, &SplitSpec::development(1)).map_err(|e| e.to_string())?;
    ensure(folds.len() == 5, || format!("{} folds", folds.len()))?;
    let totals = [7980.0, 7710.0];
    for (i, fold) in folds.iter().enumerate() {
        ensure(fold.val.len().abs_diff(3138) <= 1, || format!("fold {i}: val part has {}", fold.val.len()))?;
        let mut seen = BTreeSet::new();
        for (part, ratio) in fold.parts().iter().zip([0.6, 0.2, 0.2]) {
            for id in part.iter() {
                ensure(seen.insert(id.as_str()), || format!("fold {i}: `{id}` in two parts"))?;
            }
            let pos = part.iter().filter(|id| labels[*id] == Label::Present).count() as f64;
            let neg = part.len() as f64 - pos;
            for (count, total) in [neg, pos].iter().zip(totals) {
                ensure((count - ratio * total).abs() <= 1.0, || {
                    format!("fold {i}: part with ratio {ratio} has {count} of {total}")
                })?;
            }
        }
        ensure(seen.len() == manifest.len(), || format!("fold {i} covers {} of {}", seen.len(), manifest.len()))?;
    }
    Ok(format!("validation part {} clips in every fold; parts disjoint, covering, stratified", folds[0].val.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("gradient correctness", gradient_correctness),
        ("parameter count", parameter_count),
        ("shape pipeline", shape_pipeline),
        ("AUC oracle", auc_oracle),
        ("dominant-frequency accuracy", dominant_frequency_accuracy),
        ("augmentation contracts", augmentation_contracts),
        ("synthetic end-to-end training", synthetic_end_to_end),
        ("early stopping", early_stopping),
        ("determinism and persistence", determinism_and_persistence),
        ("split protocol", split_protocol),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = run();
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail} ({secs:.1} s)", i + 1),
            Err(detail) => {
                println!("[FAIL] criterion {}: {name}: {detail} ({secs:.1} s)", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
