//! Network correctness against independent oracles: a straight-line
//! matrix-product forward pass, central finite differences, and an
//! analytically separable training set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wleak_core::nn::{
    planned_schedule, Activation, LayerSpec, Network, TrainConfig,
};

fn three_layer_specs() -> Vec<LayerSpec> {
    vec![
        LayerSpec::new(4, 6, Activation::Relu),
        LayerSpec::new(6, 5, Activation::Relu),
        LayerSpec::new(5, 3, Activation::Softmax),
    ]
}

/// Column-major accumulation, double-precision softmax: a deliberately
/// different arithmetic path from the production forward pass.
fn oracle_forward(net: &Network, input: &[f64]) -> Vec<f64> {
    let mut x = input.to_vec();
    for (l, spec) in net.specs().iter().enumerate() {
        let w = &net.weights()[l];
        let b = &net.biases()[l];
        let mut z = vec![0.0f64; spec.units];
        for c in 0..spec.fan_in {
            for (u, zu) in z.iter_mut().enumerate() {
                *zu += w.get(u, c) * x[c];
            }
        }
        for (zu, bu) in z.iter_mut().zip(b) {
            *zu += bu;
        }
        x = match spec.activation {
            Activation::Identity => z,
            Activation::Relu => z.iter().map(|&v| v.max(0.0)).collect(),
            Activation::Softmax => {
                let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = z.iter().map(|&v| (v - m).exp()).collect();
                let s: f64 = e.iter().sum();
                e.iter().map(|&v| v / s).collect()
            }
        };
    }
    x
}

#[test]
fn forward_matches_matrix_product_oracle() {
    let net = Network::seeded(three_layer_specs(), 2024).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let input: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
        let got = net.forward(&input).unwrap();
        let expected = oracle_forward(&net, &input);
        for (a, b) in got.output().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

fn perturbed(net: &Network, layer: usize, coord: usize, is_bias: bool, eps: f64) -> Network {
    let specs = net.specs().to_vec();
    let mut weights = net.weights().to_vec();
    let mut biases = net.biases().to_vec();
    if is_bias {
        biases[layer][coord] += eps;
    } else {
        weights[layer].data_mut()[coord] += eps;
    }
    Network::from_parts(specs, weights, biases).unwrap()
}

#[test]
fn every_gradient_matches_central_finite_differences() {
    let net = Network::seeded(three_layer_specs(), 7177).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let dataset: Vec<(Vec<f64>, usize)> = (0..5)
        .map(|i| {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            (x, i % 3)
        })
        .collect();
    let batch: Vec<(&[f64], usize)> = dataset.iter().map(|(x, l)| (x.as_slice(), *l)).collect();
    let grads = net.backward(&batch).unwrap();

    let eps = 1e-5;
    let mut max_rel = 0.0f64;
    for l in 0..net.num_layers() {
        let n_weights = net.weights()[l].data().len();
        for coord in 0..n_weights {
            let lp = perturbed(&net, l, coord, false, eps)
                .dataset_loss(&dataset)
                .unwrap();
            let lm = perturbed(&net, l, coord, false, -eps)
                .dataset_loss(&dataset)
                .unwrap();
            let fd = (lp - lm) / (2.0 * eps);
            let an = grads.weights[l].data()[coord];
            let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-8);
            max_rel = max_rel.max(rel);
            assert!(rel < 1e-4, "layer {l} weight {coord}: {an} vs fd {fd}");
        }
        for coord in 0..net.biases()[l].len() {
            let lp = perturbed(&net, l, coord, true, eps)
                .dataset_loss(&dataset)
                .unwrap();
            let lm = perturbed(&net, l, coord, true, -eps)
                .dataset_loss(&dataset)
                .unwrap();
            let fd = (lp - lm) / (2.0 * eps);
            let an = grads.biases[l][coord];
            let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-8);
            max_rel = max_rel.max(rel);
            assert!(rel < 1e-4, "layer {l} bias {coord}: {an} vs fd {fd}");
        }
    }
    assert!(max_rel < 1e-4);
}

#[test]
fn input_gradients_match_finite_differences() {
    let net = Network::seeded(three_layer_specs(), 515).unwrap();
    let x = vec![0.4, -1.1, 0.9, 0.3];
    let grads = net.backward(&[(&x, 1)]).unwrap();
    let eps = 1e-5;
    for d in 0..4 {
        let mut xp = x.clone();
        xp[d] += eps;
        let mut xm = x.clone();
        xm[d] -= eps;
        let lp = net.dataset_loss(&[(xp, 1)]).unwrap();
        let lm = net.dataset_loss(&[(xm, 1)]).unwrap();
        let fd = (lp - lm) / (2.0 * eps);
        let an = grads.inputs[0][d];
        let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-8);
        assert!(rel < 1e-4, "input dim {d}: {an} vs fd {fd}");
    }
}

#[test]
fn scheduled_rates_span_training_with_exact_endpoints() {
    let generic = TrainConfig {
        initial_lr: 0.00025,
        final_lr: 0.000025,
        epochs: 8,
        batch_size: 32,
        seed: 0,
    };
    let s = planned_schedule(1000, &generic).unwrap();
    assert_eq!(s.lr_at(0), 0.00025);
    assert_eq!(s.lr_at(s.total_steps), 0.000025);

    let fine_tune = TrainConfig {
        initial_lr: 0.000025,
        final_lr: 0.000015,
        epochs: 3,
        batch_size: 32,
        seed: 0,
    };
    let s = planned_schedule(3000, &fine_tune).unwrap();
    assert_eq!(s.lr_at(0), 0.000025);
    assert_eq!(s.lr_at(s.total_steps), 0.000015);
    for step in 1..=s.total_steps {
        assert!(s.lr_at(step) <= s.lr_at(step - 1));
    }
}

#[test]
fn separable_two_class_set_reaches_full_accuracy() {
    // Classes sit at x0 = ±2 with bounded jitter elsewhere: linearly
    // separable by construction.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let dataset: Vec<(Vec<f64>, usize)> = (0..60)
        .map(|i| {
            let class = i % 2;
            let x0 = if class == 0 { -2.0 } else { 2.0 };
            let mut x = vec![x0];
            for _ in 0..3 {
                x.push(rng.random_range(-0.5..0.5));
            }
            (x, class)
        })
        .collect();
    let mut net = Network::seeded(
        vec![
            LayerSpec::new(4, 8, Activation::Relu),
            LayerSpec::new(8, 2, Activation::Softmax),
        ],
        3,
    )
    .unwrap();
    let cfg = TrainConfig {
        initial_lr: 0.05,
        final_lr: 0.01,
        epochs: 50,
        batch_size: 8,
        seed: 123,
    };
    let trace = net.sgd_train(&dataset, &cfg).unwrap();
    assert_eq!(trace.len(), 50);
    assert!(trace.iter().all(|l| l.is_finite()));
    assert_eq!(net.dataset_accuracy(&dataset).unwrap(), 1.0);
}
