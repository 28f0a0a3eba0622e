//! The stacked convolutional + bidirectional GRU network.
//!
//! ```text
//! mbe (T x 40 x 1) ──[conv3x3 → BN → ReLU → maxpool → dropout] x L──┐
//!                                                                   ├─ multiply → S x N
//! dom (T x K x 2)  ──[conv3x3 → BN → ReLU → maxpool → dropout] x L──┘
//!   → [bi-GRU → dropout] x R → [dense → dropout] x D → mean over time → maxout → sigmoid
//! ```
//!
//! Forward and backward passes run on whole mini-batches because batch
//! normalization couples the samples in training mode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeaturePair;
use crate::tensor::Tensor;

use super::config::CbrnnConfig;
use super::layers::batchnorm::{BN_EPSILON, BN_MOMENTUM};
use super::layers::gru::{BiGruCache, GruParams};
use super::layers::head::HeadCache;
use super::layers::{self, RunningStats};
use super::params::{ParamId, ParamStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

#[derive(Debug, Clone, PartialEq)]
struct ConvBlock {
    kernel: ParamId,
    bias: ParamId,
    gamma: ParamId,
    beta: ParamId,
    bn: usize,
    pool_t: usize,
    pool_f: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Branch {
    name: &'static str,
    blocks: Vec<ConvBlock>,
}

#[derive(Debug, Clone, PartialEq)]
struct BiGruLayer {
    fwd: [ParamId; 3],
    bwd: [ParamId; 3],
    input: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct DenseLayer {
    w: ParamId,
    b: ParamId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CbrnnModel {
    cfg: CbrnnConfig,
    params: ParamStore,
    bn_stats: Vec<RunningStats>,
    mbe: Option<Branch>,
    dom: Option<Branch>,
    rnn: Vec<BiGruLayer>,
    fc: Vec<DenseLayer>,
    head_w: ParamId,
    head_b: ParamId,
}

fn glorot(rng: &mut impl Rng, n: usize, fan_in: usize, fan_out: usize) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.gen_range(-limit..limit)).collect()
}

/// Builds a freshly initialized model: Glorot-uniform weights, zero biases,
/// unit batch-norm scales.
pub fn build_model(cfg: CbrnnConfig, seed: u64) -> Result<CbrnnModel> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ParamStore::default();
    let mut bn_stats = Vec::new();
    let k = cfg.receptive_field;
    let n = cfg.n_filters;

    let mut branch = |name: &'static str, in_ch: usize, pool_f: &[usize], params: &mut ParamStore, rng: &mut ChaCha8Rng| {
        let mut blocks = Vec::new();
        let mut cin = in_ch;
        for layer in 0..cfg.n_cnn_layers {
            let kernel = params.add(
                format!("{name}.conv{layer}.kernel"),
                vec![k, k, cin, n],
                glorot(rng, k * k * cin * n, k * k * cin, k * k * n),
            );
            let bias = params.add(format!("{name}.conv{layer}.bias"), vec![n], vec![0.0; n]);
            let gamma = params.add(format!("{name}.bn{layer}.gamma"), vec![n], vec![1.0; n]);
            let beta = params.add(format!("{name}.bn{layer}.beta"), vec![n], vec![0.0; n]);
            bn_stats.push(RunningStats::new(n));
            blocks.push(ConvBlock {
                kernel,
                bias,
                gamma,
                beta,
                bn: bn_stats.len() - 1,
                pool_t: cfg.pool_time[layer],
                pool_f: pool_f[layer],
            });
            cin = n;
        }
        Branch { name, blocks }
    };
    let mbe = cfg
        .features
        .uses_mbe()
        .then(|| branch("mbe", 1, &cfg.pool_freq_mbe, &mut params, &mut rng));
    let dom = cfg
        .features
        .uses_domfreq()
        .then(|| branch("dom", 2, &cfg.pool_freq_domfreq, &mut params, &mut rng));

    let u = cfg.rnn_units;
    let mut rnn = Vec::new();
    let mut width = n;
    for layer in 0..cfg.rnn_layers {
        let mut dir = |tag: &str| -> [ParamId; 3] {
            let mut w = Vec::with_capacity(3 * u * width);
            let mut r = Vec::with_capacity(3 * u * u);
            for _ in 0..3 {
                w.extend(glorot(&mut rng, u * width, width, u));
                r.extend(glorot(&mut rng, u * u, u, u));
            }
            [
                params.add(format!("gru{layer}.{tag}.w"), vec![3 * u, width], w),
                params.add(format!("gru{layer}.{tag}.u"), vec![3 * u, u], r),
                params.add(format!("gru{layer}.{tag}.b"), vec![3 * u], vec![0.0; 3 * u]),
            ]
        };
        let fwd = dir("fwd");
        let bwd = dir("bwd");
        rnn.push(BiGruLayer { fwd, bwd, input: width });
        width = 2 * u;
    }

    let mut fc = Vec::new();
    for layer in 0..cfg.fc_layers {
        let units = cfg.fc_units;
        let w = params.add(
            format!("fc{layer}.w"),
            vec![units, width],
            glorot(&mut rng, units * width, width, units),
        );
        let b = params.add(format!("fc{layer}.b"), vec![units], vec![0.0; units]);
        fc.push(DenseLayer { w, b });
        width = units;
    }

    let pieces = cfg.maxout_pieces;
    let head_w = params.add("head.w", vec![pieces, width], glorot(&mut rng, pieces * width, width, 1));
    let head_b = params.add("head.b", vec![pieces], vec![0.0; pieces]);

    Ok(CbrnnModel {
        cfg,
        params,
        bn_stats,
        mbe,
        dom,
        rnn,
        fc,
        head_w,
        head_b,
    })
}

struct BlockCache {
    input: Vec<Tensor>,
    bn: Option<layers::BnCache>,
    activated: Vec<Tensor>,
    argmax: Vec<Vec<usize>>,
    masks: Vec<Vec<f64>>,
}

struct BranchCache {
    blocks: Vec<BlockCache>,
}

struct RnnCache {
    input: Vec<Vec<Vec<f64>>>,
    caches: Vec<BiGruCache>,
    masks: Vec<Vec<f64>>,
}

struct FcCache {
    input: Vec<Vec<Vec<f64>>>,
    output: Vec<Vec<Vec<f64>>>,
    masks: Vec<Vec<f64>>,
}

/// Everything the backward pass needs from one batched forward pass.
pub struct ForwardCache {
    mode: Mode,
    batch: usize,
    mbe: Option<(BranchCache, Vec<Tensor>)>,
    dom: Option<(BranchCache, Vec<Tensor>)>,
    rnn: Vec<RnnCache>,
    fc: Vec<FcCache>,
    head_input: Vec<Vec<Vec<f64>>>,
    heads: Vec<HeadCache>,
    pub outputs: Vec<f64>,
}

fn to_sequence(t: &Tensor) -> Vec<Vec<f64>> {
    // (S, 1, N) → S vectors of N
    t.data().chunks_exact(t.channels()).map(<[f64]>::to_vec).collect()
}

fn from_sequence(seq: &[Vec<f64>]) -> Tensor {
    let n = seq[0].len();
    Tensor::from_vec([seq.len(), 1, n], seq.concat()).expect("rectangular sequence")
}

fn apply_masks(rows: &mut [Vec<f64>], rate: f64, mode: Mode, rng: &mut impl Rng) -> Vec<f64> {
    let mut flat: Vec<f64> = rows.concat();
    let mask = layers::dropout(&mut flat, rate, mode == Mode::Train, rng);
    let width = rows[0].len();
    for (row, chunk) in rows.iter_mut().zip(flat.chunks_exact(width)) {
        row.copy_from_slice(chunk);
    }
    mask
}

fn mask_rows(rows: &[Vec<f64>], mask: &[f64]) -> Vec<Vec<f64>> {
    let width = rows[0].len();
    rows.iter()
        .zip(mask.chunks_exact(width))
        .map(|(r, m)| r.iter().zip(m).map(|(a, b)| a * b).collect())
        .collect()
}

impl CbrnnModel {
    pub fn config(&self) -> &CbrnnConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn bn_stats(&self) -> &[RunningStats] {
        &self.bn_stats
    }

    pub(crate) fn from_parts(cfg: CbrnnConfig, params: ParamStore, bn_stats: Vec<RunningStats>) -> Result<Self> {
        let mut model = build_model(cfg, 0)?;
        if params.groups.len() != model.params.groups.len()
            || params
                .groups
                .iter()
                .zip(&model.params.groups)
                .any(|(a, b)| a.name != b.name || a.shape != b.shape)
        {
            return Err(Error::Shape("parameter groups do not match the model config".into()));
        }
        if bn_stats.len() != model.bn_stats.len()
            || bn_stats
                .iter()
                .zip(&model.bn_stats)
                .any(|(a, b)| a.mean.len() != b.mean.len() || a.var.len() != b.var.len())
        {
            return Err(Error::Shape("batch-norm statistics do not match the model config".into()));
        }
        model.params = params;
        model.bn_stats = bn_stats;
        Ok(model)
    }

    pub fn parameter_count(&self) -> usize {
        self.params.count()
    }

    /// Named tensor shapes through the network for one sample, checked
    /// against the config when the model is built.
    pub fn shape_trace(&self) -> Vec<(String, [usize; 3])> {
        let c = &self.cfg;
        let mut trace = Vec::new();
        let mut branch = |name: &str, width: usize, ch: usize, pools: &[usize]| {
            let (mut t, mut f) = (c.frames, width);
            trace.push((format!("{name}.input"), [t, f, ch]));
            for (l, (&pt, &pf)) in c.pool_time.iter().zip(pools).enumerate() {
                t /= pt;
                f /= pf;
                trace.push((format!("{name}.block{l}"), [t, f, c.n_filters]));
            }
        };
        if c.features.uses_mbe() {
            branch("mbe", c.mbe_bands, 1, &c.pool_freq_mbe);
        }
        if c.features.uses_domfreq() {
            branch("dom", c.domfreq_slots, 2, &c.pool_freq_domfreq);
        }
        let s = c.seq_len();
        trace.push(("merged".into(), [s, 1, c.n_filters]));
        for l in 0..c.rnn_layers {
            trace.push((format!("gru{l}"), [s, 2 * c.rnn_units, 1]));
        }
        for l in 0..c.fc_layers {
            trace.push((format!("fc{l}"), [s, c.fc_units, 1]));
        }
        trace.push(("output".into(), [1, 1, 1]));
        trace
    }

    fn check_inputs(&self, batch: &[&FeaturePair]) -> Result<()> {
        let c = &self.cfg;
        for p in batch {
            if c.features.uses_mbe() && p.mbe.shape() != [c.frames, c.mbe_bands, 1] {
                return Err(Error::Shape(format!(
                    "mbe branch expects {:?}, clip `{}` has {:?}",
                    [c.frames, c.mbe_bands, 1],
                    p.clip_id,
                    p.mbe.shape()
                )));
            }
            if c.features.uses_domfreq() && p.domfreq.shape() != [c.frames, c.domfreq_slots, 2] {
                return Err(Error::Shape(format!(
                    "domfreq branch expects {:?}, clip `{}` has {:?}",
                    [c.frames, c.domfreq_slots, 2],
                    p.clip_id,
                    p.domfreq.shape()
                )));
            }
        }
        Ok(())
    }

    fn branch_forward(
        &self,
        branch: &Branch,
        mut xs: Vec<Tensor>,
        mode: Mode,
        rng: &mut impl Rng,
    ) -> Result<(Vec<Tensor>, BranchCache)> {
        let k = self.cfg.receptive_field;
        let mut caches = Vec::with_capacity(branch.blocks.len());
        for block in &branch.blocks {
            let kernel = self.params.get(block.kernel);
            let bias = self.params.get(block.bias);
            let gamma = self.params.get(block.gamma);
            let beta = self.params.get(block.beta);
            let conv: Vec<Tensor> = xs
                .par_iter()
                .map(|x| layers::conv2d(x, kernel, bias, k))
                .collect::<Result<_>>()?;
            let (normed, bn) = match mode {
                Mode::Train => {
                    let (y, cache) = layers::batchnorm_train(&conv, gamma, beta, BN_EPSILON)?;
                    (y, Some(cache))
                }
                Mode::Infer => {
                    let stats = &self.bn_stats[block.bn];
                    let y = conv
                        .iter()
                        .map(|x| layers::batchnorm_infer(x, gamma, beta, stats, BN_EPSILON))
                        .collect::<Result<_>>()?;
                    (y, None)
                }
            };
            let activated: Vec<Tensor> = normed.into_iter().map(|t| t.map(|v| v.max(0.0))).collect();
            let pooled: Vec<layers::pool::Pooled> = activated
                .iter()
                .map(|x| layers::maxpool2d(x, block.pool_t, block.pool_f))
                .collect::<Result<_>>()
                .map_err(|e| Error::Shape(format!("{} branch: {e}", branch.name)))?;
            let mut outs = Vec::with_capacity(pooled.len());
            let mut argmax = Vec::with_capacity(pooled.len());
            let mut masks = Vec::with_capacity(pooled.len());
            for p in pooled {
                let mut out = p.output;
                masks.push(layers::dropout(out.data_mut(), self.cfg.dropout, mode == Mode::Train, rng));
                argmax.push(p.argmax);
                outs.push(out);
            }
            let input = std::mem::replace(&mut xs, outs);
            caches.push(BlockCache {
                input,
                bn,
                activated,
                argmax,
                masks,
            });
        }
        Ok((xs, BranchCache { blocks: caches }))
    }

    fn branch_backward(&self, branch: &Branch, cache: &BranchCache, mut grads: Vec<Tensor>, out: &mut ParamStore) -> Result<()> {
        let k = self.cfg.receptive_field;
        for (layer, (block, bc)) in branch.blocks.iter().zip(&cache.blocks).enumerate().rev() {
            let bn = bc.bn.as_ref().ok_or_else(|| {
                Error::Training("backward requires a forward pass in train mode".into())
            })?;
            let mut pre_bn = Vec::with_capacity(grads.len());
            for (i, g) in grads.iter().enumerate() {
                let mut g = g.clone();
                for (v, m) in g.data_mut().iter_mut().zip(&bc.masks[i]) {
                    *v *= m;
                }
                let mut gp = layers::maxpool2d_backward(bc.activated[i].shape(), &bc.argmax[i], &g);
                for (v, a) in gp.data_mut().iter_mut().zip(bc.activated[i].data()) {
                    if *a <= 0.0 {
                        *v = 0.0;
                    }
                }
                pre_bn.push(gp);
            }
            let gamma = self.params.get(block.gamma);
            let bn_grads = layers::batchnorm_backward(bn, gamma, &pre_bn);
            out.accumulate(block.gamma, &bn_grads.gamma);
            out.accumulate(block.beta, &bn_grads.beta);
            let kernel = self.params.get(block.kernel);
            let conv_grads: Vec<layers::conv::ConvGrads> = bc
                .input
                .par_iter()
                .zip(bn_grads.inputs.par_iter())
                .map(|(x, g)| {
                    if layer == 0 {
                        layers::conv2d_backward_weights(x, kernel, g, k)
                    } else {
                        layers::conv2d_backward(x, kernel, g, k)
                    }
                })
                .collect::<Result<_>>()?;
            grads = Vec::with_capacity(conv_grads.len());
            for cg in conv_grads {
                out.accumulate(block.kernel, &cg.kernel);
                out.accumulate(block.bias, &cg.bias);
                grads.push(cg.input);
            }
        }
        Ok(())
    }

    /// Runs a batch through the network. In train mode, batch norm uses batch
    /// statistics (the batch needs at least 2 samples) and dropout draws from
    /// `rng`; in infer mode `rng` is not used.
    pub fn forward(&self, batch: &[&FeaturePair], mode: Mode, rng: &mut impl Rng) -> Result<ForwardCache> {
        if batch.is_empty() {
            return Err(Error::Shape("empty batch".into()));
        }
        self.check_inputs(batch)?;
        let rate = self.cfg.dropout;

        let mbe = match &self.mbe {
            Some(b) => {
                let xs = batch.iter().map(|p| p.mbe.clone()).collect();
                let (out, cache) = self.branch_forward(b, xs, mode, rng)?;
                Some((cache, out))
            }
            None => None,
        };
        let dom = match &self.dom {
            Some(b) => {
                let xs = batch.iter().map(|p| p.domfreq.clone()).collect();
                let (out, cache) = self.branch_forward(b, xs, mode, rng)?;
                Some((cache, out))
            }
            None => None,
        };
        let mut seqs: Vec<Vec<Vec<f64>>> = match (&mbe, &dom) {
            (Some((_, a)), Some((_, b))) => a
                .iter()
                .zip(b)
                .map(|(x, y)| layers::merge_multiply(x, y).map(|m| to_sequence(&m)))
                .collect::<Result<_>>()?,
            (Some((_, a)), None) | (None, Some((_, a))) => a.iter().map(to_sequence).collect(),
            (None, None) => unreachable!("config validation guarantees one branch"),
        };

        let mut rnn = Vec::with_capacity(self.rnn.len());
        for layer in &self.rnn {
            let (fwd, bwd) = self.gru_params(layer);
            let results: Vec<(Vec<Vec<f64>>, BiGruCache)> = seqs
                .par_iter()
                .map(|x| layers::bigru_forward(x, fwd, bwd))
                .collect::<Result<_>>()?;
            let mut outs = Vec::with_capacity(results.len());
            let mut caches = Vec::with_capacity(results.len());
            let mut masks = Vec::with_capacity(results.len());
            for (mut o, c) in results {
                masks.push(apply_masks(&mut o, rate, mode, rng));
                outs.push(o);
                caches.push(c);
            }
            let input = std::mem::replace(&mut seqs, outs);
            rnn.push(RnnCache { input, caches, masks });
        }

        let mut fc = Vec::with_capacity(self.fc.len());
        for layer in &self.fc {
            let w = self.params.get(layer.w);
            let b = self.params.get(layer.b);
            let output: Vec<Vec<Vec<f64>>> = seqs
                .iter()
                .map(|x| layers::time_distributed_dense(x, w, b, self.cfg.fc_activation))
                .collect::<Result<_>>()?;
            let mut outs = output.clone();
            let masks = outs.iter_mut().map(|o| apply_masks(o, rate, mode, rng)).collect();
            let input = std::mem::replace(&mut seqs, outs);
            fc.push(FcCache { input, output, masks });
        }

        let hw = self.params.get(self.head_w);
        let hb = self.params.get(self.head_b);
        let heads: Vec<HeadCache> = seqs
            .iter()
            .map(|x| layers::maxout_sigmoid_head(x, hw, hb))
            .collect::<Result<_>>()?;
        let outputs = heads.iter().map(|h| h.output).collect();
        Ok(ForwardCache {
            mode,
            batch: batch.len(),
            mbe,
            dom,
            rnn,
            fc,
            head_input: seqs,
            heads,
            outputs,
        })
    }

    fn gru_params(&self, layer: &BiGruLayer) -> (GruParams<'_>, GruParams<'_>) {
        let p = |ids: &[ParamId; 3]| GruParams {
            w: self.params.get(ids[0]),
            u: self.params.get(ids[1]),
            b: self.params.get(ids[2]),
            units: self.cfg.rnn_units,
            input: layer.input,
        };
        (p(&layer.fwd), p(&layer.bwd))
    }

    /// Gradients of a loss w.r.t. every parameter, given `d loss / d output`
    /// for each sample of a train-mode forward pass.
    pub fn backward(&self, cache: &ForwardCache, grad_outputs: &[f64]) -> Result<ParamStore> {
        if cache.mode != Mode::Train {
            return Err(Error::Training("backward requires a forward pass in train mode".into()));
        }
        if grad_outputs.len() != cache.batch {
            return Err(Error::Shape(format!(
                "{} output gradients for a batch of {}",
                grad_outputs.len(),
                cache.batch
            )));
        }
        let mut grads = self.params.zeros_like();
        let hw = self.params.get(self.head_w);
        let pieces = self.cfg.maxout_pieces;
        let mut seq_grads: Vec<Vec<Vec<f64>>> = Vec::with_capacity(cache.batch);
        for ((head, x), &g) in cache.heads.iter().zip(&cache.head_input).zip(grad_outputs) {
            let hg = layers::maxout_sigmoid_head_backward(head, hw, pieces, x.len(), g);
            grads.accumulate(self.head_w, &hg.w);
            grads.accumulate(self.head_b, &hg.b);
            seq_grads.push(hg.input);
        }

        for (layer, fc) in self.fc.iter().zip(&cache.fc).rev() {
            let w = self.params.get(layer.w);
            let mut next = Vec::with_capacity(cache.batch);
            for i in 0..cache.batch {
                let g = mask_rows(&seq_grads[i], &fc.masks[i]);
                let dg = layers::time_distributed_dense_backward(
                    &fc.input[i],
                    &fc.output[i],
                    w,
                    self.cfg.fc_activation,
                    &g,
                );
                grads.accumulate(layer.w, &dg.w);
                grads.accumulate(layer.b, &dg.b);
                next.push(dg.input);
            }
            seq_grads = next;
        }

        for (layer, rc) in self.rnn.iter().zip(&cache.rnn).rev() {
            let (fwd, bwd) = self.gru_params(layer);
            let results: Vec<layers::gru::BiGruGrads> = (0..cache.batch)
                .into_par_iter()
                .map(|i| {
                    let g = mask_rows(&seq_grads[i], &rc.masks[i]);
                    layers::bigru_backward(&rc.input[i], fwd, bwd, &rc.caches[i], &g)
                })
                .collect();
            seq_grads = Vec::with_capacity(cache.batch);
            for r in results {
                grads.accumulate(layer.fwd[0], &r.fwd.w);
                grads.accumulate(layer.fwd[1], &r.fwd.u);
                grads.accumulate(layer.fwd[2], &r.fwd.b);
                grads.accumulate(layer.bwd[0], &r.bwd.w);
                grads.accumulate(layer.bwd[1], &r.bwd.u);
                grads.accumulate(layer.bwd[2], &r.bwd.b);
                seq_grads.push(r.input);
            }
        }

        let merged: Vec<Tensor> = seq_grads.iter().map(|s| from_sequence(s)).collect();
        match (&self.mbe, &cache.mbe, &self.dom, &cache.dom) {
            (Some(mb), Some((mc, mo)), Some(db), Some((dc, dout))) => {
                let mut gm = Vec::with_capacity(cache.batch);
                let mut gd = Vec::with_capacity(cache.batch);
                for i in 0..cache.batch {
                    let (a, b) = layers::merge_multiply_backward(&mo[i], &dout[i], &merged[i]);
                    gm.push(a);
                    gd.push(b);
                }
                self.branch_backward(mb, mc, gm, &mut grads)?;
                self.branch_backward(db, dc, gd, &mut grads)?;
            }
            (Some(b), Some((c, _)), None, None) | (None, None, Some(b), Some((c, _))) => {
                self.branch_backward(b, c, merged, &mut grads)?;
            }
            _ => unreachable!("cache matches model branches"),
        }
        Ok(grads)
    }

    /// Folds the batch statistics of a train-mode pass into the running
    /// averages used at inference.
    pub fn update_running_stats(&mut self, cache: &ForwardCache) {
        let branches = [(&self.mbe, &cache.mbe), (&self.dom, &cache.dom)];
        let mut updates = Vec::new();
        for (branch, bc) in branches {
            if let (Some(b), Some((c, _))) = (branch, bc) {
                for (block, blk) in b.blocks.iter().zip(&c.blocks) {
                    if let Some(bn) = &blk.bn {
                        updates.push((block.bn, bn.mean.clone(), bn.var_unbiased.clone()));
                    }
                }
            }
        }
        for (i, mean, var) in updates {
            self.bn_stats[i].update(&mean, &var, BN_MOMENTUM);
        }
    }

    /// Infer-mode scores for any number of clips.
    pub fn predict(&self, pairs: &[FeaturePair]) -> Result<Vec<f64>> {
        let refs: Vec<&FeaturePair> = pairs.iter().collect();
        self.predict_refs(&refs)
    }

    pub fn predict_refs(&self, pairs: &[&FeaturePair]) -> Result<Vec<f64>> {
        let mut unused = ChaCha8Rng::seed_from_u64(0);
        let mut out = Vec::with_capacity(pairs.len());
        for chunk in pairs.chunks(64) {
            out.extend(self.forward(chunk, Mode::Infer, &mut unused)?.outputs);
        }
        Ok(out)
    }
}
