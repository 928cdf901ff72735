//! Multi-stream speaker-embedding extractor.
//!
//! The flattened layer vector is split into per-unit blocks; each block feeds
//! its own small ReLU layer, the outputs are concatenated and passed through
//! fully connected layers into a softmax over speaker classes. The embedding
//! is read from the layer just below the softmax. The first stage is exactly
//! a block-diagonal dense layer, at 1/n of the parameters.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::nn::{Activation, BatchGradients, LayerSpec, LrSchedule, Network, TrainConfig};
use crate::personalize::{SessionId, SurrogateTopology};
use crate::seed;
use crate::weight_features::{LayerVector, Source};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractorSpec {
    pub target_layer_index: usize,
    pub num_blocks: usize,
    pub block_size: usize,
    pub per_block_units: usize,
    pub fc_units: Vec<usize>,
    pub embedding_dim: usize,
    pub num_classes: usize,
    pub source: Source,
    pub include_bias: bool,
    /// Fraction of training inputs held out for per-epoch accuracy
    /// checkpointing; the returned extractor is the best epoch's snapshot.
    pub holdout_fraction: f64,
    /// Embedding defaults to the pre-activation of the last fc layer; set to
    /// read it post-activation instead.
    pub post_activation_embedding: bool,
}

impl ExtractorSpec {
    /// Spec targeting one surrogate layer, with default head sizes
    /// (32 units per block, fc [256, 100], 20 classes).
    pub fn for_layer(
        topology: &SurrogateTopology,
        layer_index: usize,
        source: Source,
    ) -> Result<ExtractorSpec> {
        let specs = topology.layer_specs();
        if layer_index >= specs.len() {
            return Err(Error::LayerOutOfRange {
                index: layer_index,
                num_layers: specs.len(),
            });
        }
        let layer = specs[layer_index];
        Ok(ExtractorSpec {
            target_layer_index: layer_index,
            num_blocks: layer.units,
            block_size: layer.fan_in + 1,
            per_block_units: 32,
            fc_units: vec![256, 100],
            embedding_dim: 100,
            num_classes: 20,
            source,
            include_bias: true,
            holdout_fraction: 0.1,
            post_activation_embedding: false,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_blocks == 0 || self.block_size == 0 || self.per_block_units == 0 {
            return Err(Error::InvalidConfig(
                "extractor block shape must be non-zero".into(),
            ));
        }
        if self.fc_units.is_empty() {
            return Err(Error::InvalidConfig("extractor needs fc layers".into()));
        }
        if self.embedding_dim != *self.fc_units.last().expect("non-empty") {
            return Err(Error::InvalidConfig(format!(
                "embedding_dim {} must equal the last fc size {}",
                self.embedding_dim,
                self.fc_units.last().expect("non-empty")
            )));
        }
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig("num_classes must be >= 2".into()));
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return Err(Error::InvalidConfig(
                "holdout_fraction must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.num_blocks * self.block_size
    }

    pub fn concat_width(&self) -> usize {
        self.num_blocks * self.per_block_units
    }

    fn trunk_specs(&self) -> Vec<LayerSpec> {
        let mut specs = Vec::with_capacity(self.fc_units.len() + 1);
        let mut fan_in = self.concat_width();
        for &units in &self.fc_units {
            specs.push(LayerSpec::new(fan_in, units, Activation::Relu));
            fan_in = units;
        }
        specs.push(LayerSpec::new(fan_in, self.num_classes, Activation::Softmax));
        specs
    }
}

/// Per-dimension z-score statistics, fitted on the attack-training split
/// only; evaluation inputs are transformed with these frozen values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(vectors: &[&[f64]]) -> Result<Standardizer> {
        if vectors.is_empty() {
            return Err(Error::Empty("standardizer input"));
        }
        let dim = vectors[0].len();
        let n = vectors.len() as f64;
        let mut mean = vec![0.0; dim];
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "standardizer vector length",
                    expected: dim,
                    got: v.len(),
                });
            }
            for (m, x) in mean.iter_mut().zip(*v) {
                *m += x;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut std = vec![0.0; dim];
        for v in vectors {
            for ((s, x), m) in std.iter_mut().zip(*v).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        for s in std.iter_mut() {
            let var = *s / n;
            // Constant dimensions pass through centered but unscaled.
            *s = if var > 1e-24 { var.sqrt() } else { 1.0 };
        }
        Ok(Standardizer { mean, std })
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                context: "standardizer input length",
                expected: self.mean.len(),
                got: v.len(),
            });
        }
        Ok(v.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| (x - m) / s)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerEmbedding {
    pub speaker_id: String,
    pub session_id: SessionId,
    pub layer_index: usize,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extractor {
    pub spec: ExtractorSpec,
    /// One (weights, bias) pair per block; weights are
    /// per_block_units × block_size.
    pub blocks: Vec<(Matrix, Vec<f64>)>,
    /// Fully connected layers plus the softmax head.
    pub trunk: Network,
    /// Fitted during training; `embed` refuses to run without it.
    pub standardizer: Option<Standardizer>,
}

/// Seeded extractor with untrained weights and no standardization stats.
pub fn build_extractor(spec: &ExtractorSpec, init_seed: u64) -> Result<Extractor> {
    spec.validate()?;
    let bound = 1.0 / (spec.block_size as f64).sqrt();
    let blocks = (0..spec.num_blocks)
        .map(|i| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed::mix_str(init_seed, "block", &[i as u64]));
            let mut w = Matrix::zeros(spec.per_block_units, spec.block_size);
            for v in w.data_mut() {
                *v = rng.random_range(-bound..bound);
            }
            (w, vec![0.0; spec.per_block_units])
        })
        .collect();
    let trunk = Network::seeded(spec.trunk_specs(), seed::mix_str(init_seed, "trunk", &[]))?;
    Ok(Extractor {
        spec: spec.clone(),
        blocks,
        trunk,
        standardizer: None,
    })
}

impl Extractor {
    /// Reassembles a trained extractor from persisted parts, validating every
    /// shape against the spec.
    pub fn from_parts(
        spec: ExtractorSpec,
        blocks: Vec<(Matrix, Vec<f64>)>,
        trunk_weights: Vec<Matrix>,
        trunk_biases: Vec<Vec<f64>>,
        standardizer: Option<Standardizer>,
    ) -> Result<Extractor> {
        spec.validate()?;
        if blocks.len() != spec.num_blocks {
            return Err(Error::DimensionMismatch {
                context: "extractor block count",
                expected: spec.num_blocks,
                got: blocks.len(),
            });
        }
        for (w, b) in &blocks {
            if w.rows() != spec.per_block_units || w.cols() != spec.block_size {
                return Err(Error::DimensionMismatch {
                    context: "extractor block shape",
                    expected: spec.per_block_units * spec.block_size,
                    got: w.rows() * w.cols(),
                });
            }
            if b.len() != spec.per_block_units {
                return Err(Error::DimensionMismatch {
                    context: "extractor block bias length",
                    expected: spec.per_block_units,
                    got: b.len(),
                });
            }
        }
        let trunk = Network::from_parts(spec.trunk_specs(), trunk_weights, trunk_biases)?;
        if let Some(s) = &standardizer {
            if s.mean.len() != spec.input_dim() || s.std.len() != spec.input_dim() {
                return Err(Error::DimensionMismatch {
                    context: "standardizer dimension",
                    expected: spec.input_dim(),
                    got: s.mean.len(),
                });
            }
        }
        Ok(Extractor {
            spec,
            blocks,
            trunk,
            standardizer,
        })
    }

    fn standardize(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.standardizer
            .as_ref()
            .ok_or(Error::MissingStandardizer)?
            .apply(values)
    }

    /// First stage on an already-standardized input: per-block affine +
    /// ReLU. Returns the per-block pre-activations and the concatenation of
    /// the block outputs.
    pub fn block_stage(&self, standardized: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        assert_eq!(standardized.len(), self.spec.input_dim(), "block stage input");
        let bs = self.spec.block_size;
        let mut pres = Vec::with_capacity(self.spec.num_blocks);
        let mut concat = Vec::with_capacity(self.spec.concat_width());
        for (i, (w, b)) in self.blocks.iter().enumerate() {
            let x = &standardized[i * bs..(i + 1) * bs];
            let mut pre = b.clone();
            w.matvec_add(x, &mut pre);
            for &v in &pre {
                concat.push(if v > 0.0 { v } else { 0.0 });
            }
            pres.push(pre);
        }
        (pres, concat)
    }

    /// The dense first-stage equivalent: a block-diagonal weight matrix and
    /// the concatenated bias vector.
    pub fn block_diagonal_dense(&self) -> (Matrix, Vec<f64>) {
        let pbu = self.spec.per_block_units;
        let bs = self.spec.block_size;
        let mut w = Matrix::zeros(self.spec.concat_width(), self.spec.input_dim());
        let mut bias = Vec::with_capacity(self.spec.concat_width());
        for (i, (bw, bb)) in self.blocks.iter().enumerate() {
            for u in 0..pbu {
                let row = w.row_mut(i * pbu + u);
                row[i * bs..(i + 1) * bs].copy_from_slice(bw.row(u));
            }
            bias.extend_from_slice(bb);
        }
        (w, bias)
    }

    /// First-stage parameter count (weights + biases).
    pub fn first_stage_params(&self) -> usize {
        self.spec.num_blocks * self.spec.block_size * self.spec.per_block_units
            + self.spec.num_blocks * self.spec.per_block_units
    }

    /// Embedding from raw (unstandardized) layer-vector values.
    pub fn embedding_from_values(&self, values: &[f64]) -> Result<Vec<f64>> {
        let standardized = self.standardize(values)?;
        let (_, concat) = self.block_stage(&standardized);
        let pass = self.trunk.forward(&concat)?;
        let emb_layer = self.spec.fc_units.len() - 1;
        Ok(if self.spec.post_activation_embedding {
            pass.post[emb_layer].clone()
        } else {
            pass.pre[emb_layer].clone()
        })
    }

    pub fn embed(&self, vector: &LayerVector) -> Result<SpeakerEmbedding> {
        if vector.values.len() != self.spec.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "embed input length",
                expected: self.spec.input_dim(),
                got: vector.values.len(),
            });
        }
        Ok(SpeakerEmbedding {
            speaker_id: vector.speaker_id.clone(),
            session_id: vector.session_id,
            layer_index: vector.layer_index,
            vector: self.embedding_from_values(&vector.values)?,
        })
    }

    /// Class posteriors for one raw layer vector.
    pub fn classify(&self, values: &[f64]) -> Result<Vec<f64>> {
        let standardized = self.standardize(values)?;
        let (_, concat) = self.block_stage(&standardized);
        Ok(self.trunk.forward(&concat)?.output().to_vec())
    }

    pub fn class_accuracy(&self, vectors: &[LayerVector], labels: &[usize]) -> Result<f64> {
        if vectors.is_empty() {
            return Err(Error::Empty("accuracy inputs"));
        }
        let mut hits = 0usize;
        for (v, &label) in vectors.iter().zip(labels) {
            let probs = self.classify(&v.values)?;
            if crate::nn::argmax(&probs) == label {
                hits += 1;
            }
        }
        Ok(hits as f64 / vectors.len() as f64)
    }
}

struct StepGrads {
    loss: f64,
    trunk: BatchGradients,
    block_w: Vec<Matrix>,
    block_b: Vec<Vec<f64>>,
}

fn batch_grads(
    ex: &Extractor,
    standardized: &[Vec<f64>],
    idx: &[usize],
    labels: &[usize],
) -> Result<StepGrads> {
    let bs = ex.spec.block_size;
    let pbu = ex.spec.per_block_units;
    let mut concats = Vec::with_capacity(idx.len());
    let mut pres_all = Vec::with_capacity(idx.len());
    for &s in idx {
        let (pres, concat) = ex.block_stage(&standardized[s]);
        pres_all.push(pres);
        concats.push(concat);
    }
    let batch: Vec<(&[f64], usize)> = idx
        .iter()
        .zip(&concats)
        .map(|(&s, c)| (c.as_slice(), labels[s]))
        .collect();
    let trunk = ex.trunk.backward(&batch)?;

    let mut block_w: Vec<Matrix> = ex
        .blocks
        .iter()
        .map(|_| Matrix::zeros(pbu, bs))
        .collect();
    let mut block_b = vec![vec![0.0; pbu]; ex.spec.num_blocks];
    // trunk.inputs are 1/B-scaled per-sample gradients wrt the concat, so
    // plain accumulation below yields batch-mean block gradients.
    for (k, &s) in idx.iter().enumerate() {
        let ginput = &trunk.inputs[k];
        for b in 0..ex.spec.num_blocks {
            let gslice = &ginput[b * pbu..(b + 1) * pbu];
            let pre = &pres_all[k][b];
            let x = &standardized[s][b * bs..(b + 1) * bs];
            let gw = block_w[b].data_mut();
            for u in 0..pbu {
                if pre[u] > 0.0 && gslice[u] != 0.0 {
                    let d = gslice[u];
                    for (g, xv) in gw[u * bs..(u + 1) * bs].iter_mut().zip(x) {
                        *g += d * xv;
                    }
                    block_b[b][u] += d;
                }
            }
        }
    }
    Ok(StepGrads {
        loss: trunk.mean_loss,
        trunk,
        block_w,
        block_b,
    })
}

#[cfg(test)]
fn batch_loss(
    ex: &Extractor,
    standardized: &[Vec<f64>],
    idx: &[usize],
    labels: &[usize],
) -> Result<f64> {
    let mut total = 0.0;
    for &s in idx {
        let (_, concat) = ex.block_stage(&standardized[s]);
        let pass = ex.trunk.forward(&concat)?;
        total += -(pass.output()[labels[s]].max(1e-300)).ln();
    }
    Ok(total / idx.len() as f64)
}

fn apply_step(ex: &mut Extractor, grads: &StepGrads, lr: f64) {
    ex.trunk.apply_gradients(&grads.trunk, lr);
    for (b, (w, bias)) in ex.blocks.iter_mut().enumerate() {
        for (wv, g) in w.data_mut().iter_mut().zip(grads.block_w[b].data()) {
            *wv -= lr * g;
        }
        for (bv, g) in bias.iter_mut().zip(&grads.block_b[b]) {
            *bv -= lr * g;
        }
    }
}

/// Trains the extractor on standardized layer vectors with speaker-class
/// labels. Returns the best-checkpoint extractor (by held-out class
/// accuracy) and the per-epoch accuracy trace.
pub fn train_extractor(
    vectors: &[LayerVector],
    labels: &[usize],
    spec: &ExtractorSpec,
    cfg: &TrainConfig,
) -> Result<(Extractor, Vec<f64>)> {
    spec.validate()?;
    cfg.validate()?;
    if vectors.is_empty() {
        return Err(Error::Empty("extractor training inputs"));
    }
    if labels.len() != vectors.len() {
        return Err(Error::DimensionMismatch {
            context: "extractor label count",
            expected: vectors.len(),
            got: labels.len(),
        });
    }
    for v in vectors {
        if v.values.len() != spec.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "extractor input length",
                expected: spec.input_dim(),
                got: v.values.len(),
            });
        }
    }
    for &l in labels {
        if l >= spec.num_classes {
            return Err(Error::LabelOutOfRange {
                label: l,
                num_classes: spec.num_classes,
            });
        }
    }
    let distinct: BTreeSet<usize> = labels.iter().copied().collect();
    if distinct.len() < 2 {
        return Err(Error::InvalidConfig(
            "extractor training needs at least two distinct classes".into(),
        ));
    }

    // Stats are sealed here, before any evaluation input exists.
    let raw: Vec<&[f64]> = vectors.iter().map(|v| v.values.as_slice()).collect();
    let standardizer = Standardizer::fit(&raw)?;
    let standardized: Vec<Vec<f64>> = raw
        .iter()
        .map(|v| standardizer.apply(v))
        .collect::<Result<_>>()?;

    let mut ex = build_extractor(spec, seed::mix_str(cfg.seed, "extractor-init", &[]))?;
    ex.standardizer = Some(standardizer);

    let n = vectors.len();
    let holdout_count = (n as f64 * spec.holdout_fraction).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed::mix_str(
        cfg.seed,
        "extractor-holdout",
        &[],
    )));
    let (holdout_idx, train_idx) = order.split_at(holdout_count);
    let eval_idx: &[usize] = if holdout_idx.is_empty() {
        train_idx
    } else {
        holdout_idx
    };

    let batches_per_epoch = train_idx.len().div_ceil(cfg.batch_size);
    let total_updates = cfg.epochs * batches_per_epoch;
    let schedule = LrSchedule::new(
        cfg.initial_lr,
        cfg.final_lr,
        total_updates.saturating_sub(1),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut idx = train_idx.to_vec();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, Extractor)> = None;
    let mut update = 0usize;

    for epoch in 0..cfg.epochs {
        idx.shuffle(&mut rng);
        for (step, chunk) in idx.chunks(cfg.batch_size).enumerate() {
            let grads = batch_grads(&ex, &standardized, chunk, labels)?;
            if !grads.loss.is_finite() {
                return Err(Error::Diverged { epoch, step });
            }
            let lr = schedule.lr_at(update);
            update += 1;
            if lr != 0.0 {
                apply_step(&mut ex, &grads, lr);
            }
        }
        let acc = eval_accuracy(&ex, &standardized, eval_idx, labels)?;
        trace.push(acc);
        if best.as_ref().is_none_or(|(b, _)| acc > *b) {
            best = Some((acc, ex.clone()));
        }
    }

    let trained = best.map(|(_, e)| e).unwrap_or(ex);
    Ok((trained, trace))
}

fn eval_accuracy(
    ex: &Extractor,
    standardized: &[Vec<f64>],
    idx: &[usize],
    labels: &[usize],
) -> Result<f64> {
    let mut hits = 0usize;
    for &s in idx {
        let (_, concat) = ex.block_stage(&standardized[s]);
        let pass = ex.trunk.forward(&concat)?;
        if crate::nn::argmax(pass.output()) == labels[s] {
            hits += 1;
        }
    }
    Ok(hits as f64 / idx.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> ExtractorSpec {
        ExtractorSpec {
            target_layer_index: 0,
            num_blocks: 3,
            block_size: 4,
            per_block_units: 3,
            fc_units: vec![5, 4],
            embedding_dim: 4,
            num_classes: 3,
            source: Source::Delta,
            include_bias: true,
            holdout_fraction: 0.0,
            post_activation_embedding: false,
        }
    }

    fn tiny_vectors(count: usize, dim: usize, seed: u64) -> Vec<LayerVector> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|i| LayerVector {
                speaker_id: format!("spk{i}"),
                session_id: SessionId::S1,
                layer_index: 0,
                values: (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
                source: Source::Delta,
            })
            .collect()
    }

    #[test]
    fn concat_width_matches_shape_arithmetic() {
        let spec = ExtractorSpec {
            num_blocks: 8,
            block_size: 17,
            per_block_units: 4,
            ..tiny_spec()
        };
        assert_eq!(spec.concat_width(), 32);
        assert_eq!(spec.input_dim(), 136);
    }

    #[test]
    fn first_stage_params_beat_dense_layer() {
        let ex = build_extractor(&tiny_spec(), 1).unwrap();
        let spec = &ex.spec;
        let dense = (spec.num_blocks * spec.block_size) * (spec.num_blocks * spec.per_block_units);
        assert_eq!(
            ex.first_stage_params(),
            spec.num_blocks * spec.block_size * spec.per_block_units
                + spec.num_blocks * spec.per_block_units
        );
        assert!(ex.first_stage_params() < dense);
    }

    #[test]
    fn block_stage_equals_block_diagonal_dense() {
        let ex = build_extractor(&tiny_spec(), 42).unwrap();
        let (dense_w, dense_b) = ex.block_diagonal_dense();
        let x: Vec<f64> = (0..ex.spec.input_dim())
            .map(|i| (i as f64 * 0.613).sin() * 2.0)
            .collect();
        let (_, concat) = ex.block_stage(&x);
        let mut pre = dense_b.clone();
        dense_w.matvec_add(&x, &mut pre);
        let dense_out: Vec<f64> = pre.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
        for (a, b) in concat.iter().zip(&dense_out) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let spec = tiny_spec();
        let mut ex = build_extractor(&spec, 9).unwrap();
        let vectors = tiny_vectors(6, spec.input_dim(), 33);
        let standardized: Vec<Vec<f64>> = vectors.iter().map(|v| v.values.clone()).collect();
        let labels = vec![0, 1, 2, 0, 1, 2];
        let idx: Vec<usize> = (0..6).collect();
        let grads = batch_grads(&ex, &standardized, &idx, &labels).unwrap();

        let eps = 1e-5;
        let mut checked = 0usize;
        for b in 0..spec.num_blocks {
            for i in 0..spec.per_block_units * spec.block_size {
                let orig = ex.blocks[b].0.data()[i];
                ex.blocks[b].0.data_mut()[i] = orig + eps;
                let lp = batch_loss(&ex, &standardized, &idx, &labels).unwrap();
                ex.blocks[b].0.data_mut()[i] = orig - eps;
                let lm = batch_loss(&ex, &standardized, &idx, &labels).unwrap();
                ex.blocks[b].0.data_mut()[i] = orig;
                let fd = (lp - lm) / (2.0 * eps);
                let an = grads.block_w[b].data()[i];
                let denom = an.abs().max(fd.abs()).max(1e-8);
                assert!(
                    ((an - fd) / denom).abs() < 1e-4,
                    "block {b} weight {i}: analytic {an}, fd {fd}"
                );
                checked += 1;
            }
            for u in 0..spec.per_block_units {
                let orig = ex.blocks[b].1[u];
                ex.blocks[b].1[u] = orig + eps;
                let lp = batch_loss(&ex, &standardized, &idx, &labels).unwrap();
                ex.blocks[b].1[u] = orig - eps;
                let lm = batch_loss(&ex, &standardized, &idx, &labels).unwrap();
                ex.blocks[b].1[u] = orig;
                let fd = (lp - lm) / (2.0 * eps);
                let an = grads.block_b[b][u];
                let denom = an.abs().max(fd.abs()).max(1e-8);
                assert!(((an - fd) / denom).abs() < 1e-4);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn training_improves_over_chance_and_is_deterministic() {
        let spec = tiny_spec();
        // Class-separated synthetic vectors so three classes are learnable.
        let mut vectors = tiny_vectors(30, spec.input_dim(), 5);
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        for (v, &l) in vectors.iter_mut().zip(&labels) {
            for x in v.values.iter_mut() {
                *x += l as f64 * 2.0;
            }
        }
        let cfg = TrainConfig {
            initial_lr: 0.05,
            final_lr: 0.01,
            epochs: 40,
            batch_size: 5,
            seed: 77,
        };
        let (ex1, trace1) = train_extractor(&vectors, &labels, &spec, &cfg).unwrap();
        let (ex2, trace2) = train_extractor(&vectors, &labels, &spec, &cfg).unwrap();
        assert_eq!(ex1, ex2);
        assert_eq!(trace1, trace2);
        let acc = ex1.class_accuracy(&vectors, &labels).unwrap();
        assert!(acc > 0.9, "training accuracy {acc}");
    }

    #[test]
    fn single_class_training_is_rejected() {
        let spec = tiny_spec();
        let vectors = tiny_vectors(6, spec.input_dim(), 2);
        let labels = vec![1; 6];
        let cfg = TrainConfig {
            initial_lr: 0.01,
            final_lr: 0.01,
            epochs: 1,
            batch_size: 2,
            seed: 0,
        };
        assert!(matches!(
            train_extractor(&vectors, &labels, &spec, &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn embed_without_stats_is_rejected() {
        let ex = build_extractor(&tiny_spec(), 3).unwrap();
        let v = &tiny_vectors(1, ex.spec.input_dim(), 4)[0];
        assert!(matches!(ex.embed(v), Err(Error::MissingStandardizer)));
    }

    #[test]
    fn embedding_has_spec_dimension_and_is_deterministic() {
        let spec = tiny_spec();
        let vectors = tiny_vectors(12, spec.input_dim(), 6);
        let labels: Vec<usize> = (0..12).map(|i| i % 3).collect();
        let cfg = TrainConfig {
            initial_lr: 0.02,
            final_lr: 0.02,
            epochs: 5,
            batch_size: 4,
            seed: 21,
        };
        let (ex, _) = train_extractor(&vectors, &labels, &spec, &cfg).unwrap();
        let e1 = ex.embed(&vectors[0]).unwrap();
        let e2 = ex.embed(&vectors[0]).unwrap();
        assert_eq!(e1.vector.len(), spec.embedding_dim);
        assert_eq!(e1, e2);
    }

    #[test]
    fn embedding_ignores_softmax_head_weights() {
        let spec = tiny_spec();
        let vectors = tiny_vectors(12, spec.input_dim(), 8);
        let labels: Vec<usize> = (0..12).map(|i| i % 3).collect();
        let cfg = TrainConfig {
            initial_lr: 0.02,
            final_lr: 0.02,
            epochs: 3,
            batch_size: 4,
            seed: 13,
        };
        let (ex, _) = train_extractor(&vectors, &labels, &spec, &cfg).unwrap();
        let emb = ex.embed(&vectors[0]).unwrap();

        // Rebuild the trunk with a rescaled softmax head.
        let specs = ex.trunk.specs().to_vec();
        let mut weights = ex.trunk.weights().to_vec();
        let mut biases = ex.trunk.biases().to_vec();
        let last = weights.len() - 1;
        for v in weights[last].data_mut() {
            *v *= -3.0;
        }
        for v in biases[last].iter_mut() {
            *v += 1.0;
        }
        let mut altered = ex.clone();
        altered.trunk = Network::from_parts(specs, weights, biases).unwrap();
        let emb2 = altered.embed(&vectors[0]).unwrap();
        assert_eq!(emb.vector, emb2.vector);
    }
}
