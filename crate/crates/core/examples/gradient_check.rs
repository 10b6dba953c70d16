//! Compare backprop against central differences on a scaled-down LEARNet.
//!
//! `cargo run --release --example gradient_check [SEED]`

use learnet::graph::{build_learnet_with, LearnetDims, Mode, Network};
use learnet::ops::softmax_cross_entropy;
use learnet::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-3;

/// Returns the worst relative error over a few probes per parameter tensor.
pub fn run(seed: u64) -> learnet::Result<f64> {
    let dims = LearnetDims {
        input_size: 64,
        stem_filters: 4,
        path_filters: [2, 3, 4],
        conv5_filters: 6,
        fc_features: 8,
        ..LearnetDims::default_for(3)
    };
    let net = Network::new(build_learnet_with(&dims)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = net.init_params(seed)?;
    // Positive biases keep most units away from the ReLU kink.
    for (key, t) in params.iter_mut() {
        if key.ends_with(".bias") || key.ends_with(".shift") {
            t.data_mut()
                .iter_mut()
                .for_each(|v| *v = rng.gen_range(0.1..0.4));
        }
    }
    let pixels = (0..2 * 3 * 64 * 64)
        .map(|_| rng.gen_range(0.0..1.0))
        .collect();
    let batch = Tensor::new(vec![2, 3, 64, 64], pixels)?;
    let labels = [0, 2];

    let loss = |p: &learnet::graph::ModelParams| -> learnet::Result<f64> {
        let (logits, _) = net.forward(p, &batch, Mode::Train, seed)?;
        Ok(softmax_cross_entropy(&logits, &labels)?.0)
    };
    let (logits, trace) = net.forward(&params, &batch, Mode::Train, seed)?;
    let (base, grad) = softmax_cross_entropy(&logits, &labels)?;
    let grads = net.backward(&params, &trace, &grad)?;

    let mut worst: f64 = 0.0;
    for (key, g) in &grads.params {
        let (mut num, mut ana) = (Vec::new(), Vec::new());
        for _ in 0..24 {
            if num.len() == 3 {
                break;
            }
            let i = rng.gen_range(0..g.len());
            let orig = params.tensor(key).unwrap().data()[i];
            let mut p = params.clone();
            p.tensor_mut(key).unwrap().data_mut()[i] = (orig as f64 + STEP) as f32;
            let up = loss(&p)?;
            p.tensor_mut(key).unwrap().data_mut()[i] = (orig as f64 - STEP) as f32;
            let down = loss(&p)?;
            // One-sided slopes that disagree mean a ReLU kink sits inside the step.
            let (fwd, bwd) = ((up - base) / STEP, (base - down) / STEP);
            if (fwd - bwd).abs() > 0.05 * fwd.abs().max(bwd.abs()) + 1e-6 {
                continue;
            }
            num.push((up - down) / (2.0 * STEP));
            ana.push(g.data()[i] as f64);
        }
        if num.is_empty() {
            continue;
        }
        let diff = num
            .iter()
            .zip(&ana)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = num
            .iter()
            .chain(&ana)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
            .max(1e-4);
        let err = diff / scale;
        println!("{key:<16} relative error {err:.2e}");
        worst = worst.max(err);
    }
    println!("worst {worst:.2e}");
    Ok(worst)
}

fn main() -> learnet::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("SEED must be an integer"));
    run(seed).map(|_| ())
}
