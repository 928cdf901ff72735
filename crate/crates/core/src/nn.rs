//! Dense feed-forward networks with backpropagation and scheduled-rate SGD.
//!
//! Everything is driven by explicit seeds and fixed iteration order, so a
//! trained network is a pure function of (topology, seed, config, data).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::{Error, Result};

/// Cross-entropy probability floor; keeps the loss finite without
/// perturbing any gradient that matters.
const PROB_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Relu,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub fan_in: usize,
    pub units: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(fan_in: usize, units: usize, activation: Activation) -> LayerSpec {
        LayerSpec {
            fan_in,
            units,
            activation,
        }
    }
}

/// Geometric (log-linear) interpolation between two learning rates.
///
/// `lr_at(0)` is exactly `initial_lr` and `lr_at(total_steps)` is exactly
/// `final_lr`; in between the rate decays exponentially. With
/// `total_steps == 0` every step uses `initial_lr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub initial_lr: f64,
    pub final_lr: f64,
    pub total_steps: usize,
}

impl LrSchedule {
    pub fn new(initial_lr: f64, final_lr: f64, total_steps: usize) -> Result<LrSchedule> {
        if !initial_lr.is_finite() || !final_lr.is_finite() || initial_lr < 0.0 || final_lr < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "learning rates must be finite and >= 0, got {initial_lr} -> {final_lr}"
            )));
        }
        // Geometric interpolation cannot pass through zero from one side only.
        if (initial_lr == 0.0) != (final_lr == 0.0) {
            return Err(Error::InvalidConfig(
                "learning rates must be both zero or both positive".into(),
            ));
        }
        Ok(LrSchedule {
            initial_lr,
            final_lr,
            total_steps,
        })
    }

    pub fn lr_at(&self, step: usize) -> f64 {
        if step == 0 {
            return self.initial_lr;
        }
        if step >= self.total_steps {
            return self.final_lr;
        }
        if self.initial_lr == self.final_lr {
            return self.initial_lr;
        }
        let t = step as f64 / self.total_steps as f64;
        (self.initial_lr.ln() * (1.0 - t) + self.final_lr.ln() * t).exp()
    }
}

/// Cross-entropy SGD settings. The schedule endpoints are spanned over the
/// run's update count so the first update uses `initial_lr` and the last
/// uses `final_lr` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub initial_lr: f64,
    pub final_lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        LrSchedule::new(self.initial_lr, self.final_lr, 0)?;
        Ok(())
    }
}

/// Per-layer activations of one forward pass. `pre` holds the affine output
/// of each layer, `post` the activation applied to it.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
}

impl ForwardPass {
    pub fn output(&self) -> &[f64] {
        self.post.last().expect("forward pass has at least one layer")
    }
}

/// Mean gradients over one batch, shaped like the network, plus the
/// per-sample gradients with respect to the network input (each already
/// carrying the 1/batch factor so they compose with the weight gradients).
#[derive(Debug, Clone)]
pub struct BatchGradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
    pub mean_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    specs: Vec<LayerSpec>,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

fn validate_specs(specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::Empty("network layer list"));
    }
    for (i, s) in specs.iter().enumerate() {
        if s.fan_in == 0 || s.units == 0 {
            return Err(Error::InvalidConfig(format!(
                "layer {i} has zero fan_in or units"
            )));
        }
        if s.activation == Activation::Softmax && i + 1 != specs.len() {
            return Err(Error::InvalidConfig(format!(
                "softmax on layer {i} but only the final layer may be softmax"
            )));
        }
        if i > 0 && s.fan_in != specs[i - 1].units {
            return Err(Error::DimensionMismatch {
                context: "adjacent layer widths",
                expected: specs[i - 1].units,
                got: s.fan_in,
            });
        }
    }
    Ok(())
}

impl Network {
    /// Seeded initialization: weights uniform in ±1/√fan_in, biases zero.
    pub fn seeded(specs: Vec<LayerSpec>, seed: u64) -> Result<Network> {
        validate_specs(&specs)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(specs.len());
        let mut biases = Vec::with_capacity(specs.len());
        for s in &specs {
            let bound = 1.0 / (s.fan_in as f64).sqrt();
            let mut m = Matrix::zeros(s.units, s.fan_in);
            for v in m.data_mut() {
                *v = rng.random_range(-bound..bound);
            }
            weights.push(m);
            biases.push(vec![0.0; s.units]);
        }
        Ok(Network {
            specs,
            weights,
            biases,
        })
    }

    pub fn from_parts(
        specs: Vec<LayerSpec>,
        weights: Vec<Matrix>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Network> {
        validate_specs(&specs)?;
        if weights.len() != specs.len() || biases.len() != specs.len() {
            return Err(Error::DimensionMismatch {
                context: "layer parameter count",
                expected: specs.len(),
                got: weights.len().min(biases.len()),
            });
        }
        for (i, s) in specs.iter().enumerate() {
            if weights[i].rows() != s.units || weights[i].cols() != s.fan_in {
                return Err(Error::TopologyMismatch(format!(
                    "layer {i}: weight shape {}x{} does not match spec {}x{}",
                    weights[i].rows(),
                    weights[i].cols(),
                    s.units,
                    s.fan_in
                )));
            }
            if biases[i].len() != s.units {
                return Err(Error::DimensionMismatch {
                    context: "bias length",
                    expected: s.units,
                    got: biases[i].len(),
                });
            }
            if !weights[i].is_finite() || !biases[i].iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("network parameters"));
            }
        }
        Ok(Network {
            specs,
            weights,
            biases,
        })
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn num_layers(&self) -> usize {
        self.specs.len()
    }

    pub fn input_dim(&self) -> usize {
        self.specs[0].fan_in
    }

    pub fn output_dim(&self) -> usize {
        self.specs.last().expect("non-empty").units
    }

    pub fn layer(&self, index: usize) -> Result<(&Matrix, &[f64])> {
        if index >= self.specs.len() {
            return Err(Error::LayerOutOfRange {
                index,
                num_layers: self.specs.len(),
            });
        }
        Ok((&self.weights[index], &self.biases[index]))
    }

    pub fn forward(&self, input: &[f64]) -> Result<ForwardPass> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "forward input length",
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        if !input.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("forward input"));
        }
        let mut pre = Vec::with_capacity(self.specs.len());
        let mut post = Vec::with_capacity(self.specs.len());
        let mut x: &[f64] = input;
        for (i, s) in self.specs.iter().enumerate() {
            let mut z = self.biases[i].clone();
            self.weights[i].matvec_add(x, &mut z);
            let a = apply_activation(s.activation, &z);
            pre.push(z);
            post.push(a);
            x = post.last().expect("just pushed").as_slice();
        }
        Ok(ForwardPass { pre, post })
    }

    /// Mean cross-entropy gradients over a batch. Requires a softmax output
    /// layer; labels index its units.
    pub fn backward(&self, batch: &[(&[f64], usize)]) -> Result<BatchGradients> {
        if batch.is_empty() {
            return Err(Error::Empty("gradient batch"));
        }
        if self.specs.last().expect("non-empty").activation != Activation::Softmax {
            return Err(Error::InvalidConfig(
                "cross-entropy backward requires a softmax output layer".into(),
            ));
        }
        let num_classes = self.output_dim();
        let num_layers = self.specs.len();
        let mut gw: Vec<Matrix> = self
            .specs
            .iter()
            .map(|s| Matrix::zeros(s.units, s.fan_in))
            .collect();
        let mut gb: Vec<Vec<f64>> = self.specs.iter().map(|s| vec![0.0; s.units]).collect();
        let mut ginputs = Vec::with_capacity(batch.len());
        let inv_b = 1.0 / batch.len() as f64;
        let mut total_loss = 0.0;

        for &(input, label) in batch {
            if label >= num_classes {
                return Err(Error::LabelOutOfRange {
                    label,
                    num_classes,
                });
            }
            let pass = self.forward(input)?;
            let probs = pass.output();
            total_loss += -(probs[label].max(PROB_FLOOR)).ln();

            // Softmax + cross-entropy collapses to probs - onehot.
            let mut delta: Vec<f64> = probs.to_vec();
            delta[label] -= 1.0;

            for l in (0..num_layers).rev() {
                let layer_input: &[f64] = if l == 0 { input } else { &pass.post[l - 1] };
                {
                    let cols = self.specs[l].fan_in;
                    let gwd = gw[l].data_mut();
                    for (u, d) in delta.iter().enumerate() {
                        let row = &mut gwd[u * cols..(u + 1) * cols];
                        for (g, xv) in row.iter_mut().zip(layer_input) {
                            *g += d * xv;
                        }
                    }
                }
                for (g, d) in gb[l].iter_mut().zip(&delta) {
                    *g += d;
                }
                let mut prev = vec![0.0; self.specs[l].fan_in];
                self.weights[l].matvec_transposed_add(&delta, &mut prev);
                if l > 0 {
                    match self.specs[l - 1].activation {
                        Activation::Relu => {
                            for (p, z) in prev.iter_mut().zip(&pass.pre[l - 1]) {
                                if *z <= 0.0 {
                                    *p = 0.0;
                                }
                            }
                        }
                        Activation::Identity => {}
                        Activation::Softmax => unreachable!("softmax only on final layer"),
                    }
                    delta = prev;
                } else {
                    for p in prev.iter_mut() {
                        *p *= inv_b;
                    }
                    ginputs.push(prev);
                }
            }
        }

        for m in gw.iter_mut() {
            for v in m.data_mut() {
                *v *= inv_b;
            }
        }
        for b in gb.iter_mut() {
            for v in b.iter_mut() {
                *v *= inv_b;
            }
        }
        Ok(BatchGradients {
            weights: gw,
            biases: gb,
            inputs: ginputs,
            mean_loss: total_loss * inv_b,
        })
    }

    /// In-place scheduled-LR SGD; returns the mean loss per epoch.
    ///
    /// The schedule is spanned per `planned_schedule`, so the first update
    /// uses `initial_lr` and the final update uses `final_lr` exactly. A
    /// zero learning rate skips the update entirely, leaving weights
    /// bit-identical.
    pub fn sgd_train(&mut self, dataset: &[(Vec<f64>, usize)], cfg: &TrainConfig) -> Result<Vec<f64>> {
        cfg.validate()?;
        if dataset.is_empty() {
            return Err(Error::Empty("training dataset"));
        }
        let n = dataset.len();
        let schedule = planned_schedule(n, cfg)?;

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut indices: Vec<usize> = (0..n).collect();
        let mut trace = Vec::with_capacity(cfg.epochs);
        let mut update = 0usize;

        for epoch in 0..cfg.epochs {
            indices.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for (step, chunk) in indices.chunks(cfg.batch_size).enumerate() {
                let batch: Vec<(&[f64], usize)> = chunk
                    .iter()
                    .map(|&i| (dataset[i].0.as_slice(), dataset[i].1))
                    .collect();
                let grads = self.backward(&batch)?;
                if !grads.mean_loss.is_finite() {
                    return Err(Error::Diverged { epoch, step });
                }
                epoch_loss += grads.mean_loss * chunk.len() as f64;
                let lr = schedule.lr_at(update);
                update += 1;
                if lr != 0.0 {
                    self.apply_gradients(&grads, lr);
                }
            }
            trace.push(epoch_loss / n as f64);
        }
        Ok(trace)
    }

    pub fn apply_gradients(&mut self, grads: &BatchGradients, lr: f64) {
        for l in 0..self.specs.len() {
            let gwd = grads.weights[l].data();
            for (w, g) in self.weights[l].data_mut().iter_mut().zip(gwd) {
                *w -= lr * g;
            }
            for (b, g) in self.biases[l].iter_mut().zip(&grads.biases[l]) {
                *b -= lr * g;
            }
        }
    }

    pub fn dataset_loss(&self, dataset: &[(Vec<f64>, usize)]) -> Result<f64> {
        if dataset.is_empty() {
            return Err(Error::Empty("loss dataset"));
        }
        let mut total = 0.0;
        for (x, label) in dataset {
            if *label >= self.output_dim() {
                return Err(Error::LabelOutOfRange {
                    label: *label,
                    num_classes: self.output_dim(),
                });
            }
            let pass = self.forward(x)?;
            total += -(pass.output()[*label].max(PROB_FLOOR)).ln();
        }
        Ok(total / dataset.len() as f64)
    }

    pub fn dataset_accuracy(&self, dataset: &[(Vec<f64>, usize)]) -> Result<f64> {
        if dataset.is_empty() {
            return Err(Error::Empty("accuracy dataset"));
        }
        let mut hits = 0usize;
        for (x, label) in dataset {
            let pass = self.forward(x)?;
            if argmax(pass.output()) == *label {
                hits += 1;
            }
        }
        Ok(hits as f64 / dataset.len() as f64)
    }
}

/// The schedule `sgd_train` runs for a dataset of the given size: spanned
/// over `epochs * ceil(n / batch_size) − 1` steps, so step 0 uses
/// `initial_lr` and the last update uses `final_lr` exactly.
pub fn planned_schedule(dataset_len: usize, cfg: &TrainConfig) -> Result<LrSchedule> {
    let batches_per_epoch = dataset_len.div_ceil(cfg.batch_size);
    LrSchedule::new(
        cfg.initial_lr,
        cfg.final_lr,
        (cfg.epochs * batches_per_epoch).saturating_sub(1),
    )
}

/// First index of the maximum value; ties resolve to the earliest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn apply_activation(activation: Activation, z: &[f64]) -> Vec<f64> {
    match activation {
        Activation::Identity => z.to_vec(),
        // Explicit comparison rather than f64::max: keeps -0.0 inputs from
        // leaking platform-dependent sign bits into stored weights.
        Activation::Relu => z.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect(),
        Activation::Softmax => softmax(z),
    }
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn softmax_net(seed: u64) -> Network {
        Network::seeded(
            vec![
                LayerSpec::new(4, 6, Activation::Relu),
                LayerSpec::new(6, 5, Activation::Relu),
                LayerSpec::new(5, 3, Activation::Softmax),
            ],
            seed,
        )
        .unwrap()
    }

    #[test]
    fn identity_layer_with_identity_weights_passes_input_through() {
        let net = Network::from_parts(
            vec![LayerSpec::new(3, 3, Activation::Identity)],
            vec![Matrix::identity(3)],
            vec![vec![0.0; 3]],
        )
        .unwrap();
        let v = [0.5, -1.25, 3.0];
        let out = net.forward(&v).unwrap();
        assert_eq!(out.output(), &v);
    }

    #[test]
    fn softmax_of_equal_logits_is_uniform() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn softmax_sums_to_one() {
        let net = softmax_net(7);
        for k in 0..50 {
            let x: Vec<f64> = (0..4).map(|i| ((k * 4 + i) as f64).sin() * 3.0).collect();
            let out = net.forward(&x).unwrap();
            let sum: f64 = out.output().iter().sum();
            assert!((sum - 1.0).abs() < 1e-6, "sum {sum}");
        }
    }

    #[test]
    fn zero_weight_net_has_uniform_loss() {
        let specs = vec![LayerSpec::new(2, 4, Activation::Softmax)];
        let net = Network::from_parts(specs, vec![Matrix::zeros(4, 2)], vec![vec![0.0; 4]]).unwrap();
        let x = [1.0, -2.0];
        let grads = net.backward(&[(&x, 1)]).unwrap();
        assert!((grads.mean_loss - 4.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn duplicated_batch_has_identical_gradients() {
        let net = softmax_net(11);
        let x = [0.3, -0.7, 1.1, 0.2];
        let single = net.backward(&[(&x, 2)]).unwrap();
        let double = net.backward(&[(&x, 2), (&x, 2)]).unwrap();
        assert_eq!(single.weights, double.weights);
        assert_eq!(single.biases, double.biases);
        assert_eq!(single.mean_loss, double.mean_loss);
    }

    #[test]
    fn schedule_hits_both_endpoints_exactly() {
        let s = LrSchedule::new(0.00025, 0.000025, 40).unwrap();
        assert_eq!(s.lr_at(0), 0.00025);
        assert_eq!(s.lr_at(40), 0.000025);
        for step in 1..40 {
            assert!(s.lr_at(step) < s.lr_at(step - 1));
            assert!(s.lr_at(step) > 0.000025);
        }
    }

    #[test]
    fn schedule_rejects_mixed_zero() {
        assert!(LrSchedule::new(0.1, 0.0, 10).is_err());
        assert!(LrSchedule::new(0.0, 0.0, 10).is_ok());
    }

    #[test]
    fn zero_lr_training_is_identity_on_weights() {
        let mut net = softmax_net(3);
        let before = net.clone();
        let data: Vec<(Vec<f64>, usize)> = (0..10)
            .map(|i| {
                let x: Vec<f64> = (0..4).map(|j| ((i * 4 + j) as f64).cos()).collect();
                (x, i % 3)
            })
            .collect();
        let cfg = TrainConfig {
            initial_lr: 0.0,
            final_lr: 0.0,
            epochs: 3,
            batch_size: 4,
            seed: 99,
        };
        net.sgd_train(&data, &cfg).unwrap();
        assert_eq!(net, before);
    }

    #[test]
    fn training_is_deterministic_by_seed() {
        let data: Vec<(Vec<f64>, usize)> = (0..24)
            .map(|i| {
                let x: Vec<f64> = (0..4).map(|j| ((i * 7 + j) as f64).sin()).collect();
                (x, i % 3)
            })
            .collect();
        let cfg = TrainConfig {
            initial_lr: 0.01,
            final_lr: 0.001,
            epochs: 5,
            batch_size: 5,
            seed: 42,
        };
        let mut a = softmax_net(1);
        let mut b = softmax_net(1);
        let ta = a.sgd_train(&data, &cfg).unwrap();
        let tb = b.sgd_train(&data, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
    }

    #[test]
    fn label_out_of_range_is_rejected() {
        let net = softmax_net(5);
        let x = [0.0; 4];
        assert!(matches!(
            net.backward(&[(&x, 3)]),
            Err(Error::LabelOutOfRange { .. })
        ));
    }
}
