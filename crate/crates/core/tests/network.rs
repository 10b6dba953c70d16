mod common;

use common::*;
use learnet::graph::{
    build_learnet, build_learnet_reduced, param_count, GraphSpec, Mode, ModelParams, Network,
};
use learnet::ops::{channel_slice, softmax};
use learnet::Tensor;
use proptest::prelude::*;

fn full_network() -> Network {
    Network::new(build_learnet(3).unwrap()).unwrap()
}

fn batch(seed: u64, n: usize, size: usize) -> Tensor {
    uniform(&mut rng(seed), &[n, 3, size, size], 0.0, 1.0)
}

#[test]
fn shape_walk_matches_configuration_table() {
    let net = full_network();
    let params = net.init_params(1).unwrap();
    let (logits, trace) = net
        .forward(&params, &batch(2, 2, 112), Mode::Train, 0)
        .unwrap();
    assert_eq!(logits.shape(), &[2, 3]);
    for (name, shape) in layer_shape_oracle() {
        let out = trace
            .output(name)
            .unwrap_or_else(|| panic!("no node {name}"));
        assert_eq!(&out.shape()[1..], &shape[..], "{name}");
    }
}

#[test]
fn parameter_counts_match_configuration_table() {
    let report = param_count(&build_learnet(3).unwrap()).unwrap();
    for (name, weights, biases) in layer_param_oracle() {
        let n = report.per_node.iter().find(|n| n.node == name).unwrap();
        assert_eq!((n.weights, n.biases), (weights, biases), "{name}");
    }
    let reduced = param_count(&build_learnet_reduced(3).unwrap()).unwrap();
    assert_eq!(reduced.backbone, REDUCED_BACKBONE);
    let fc = reduced.per_node.iter().find(|n| n.node == "fc").unwrap();
    assert_eq!((fc.weights, fc.biases), (589_824, 256));
}

#[test]
fn shipped_configs_match_builders() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    assert_eq!(
        GraphSpec::load(&dir.join("default.graph")).unwrap(),
        build_learnet(3).unwrap()
    );
    assert_eq!(
        GraphSpec::load(&dir.join("reduced.graph")).unwrap(),
        build_learnet_reduced(3).unwrap()
    );
    assert_ne!(
        build_learnet(3).unwrap().digest(),
        build_learnet_reduced(3).unwrap().digest()
    );
}

/// Concat channel block of each pathway.
fn path_blocks(trace: &learnet::graph::ForwardTrace) -> Vec<Tensor> {
    let concat = trace.output("concat").unwrap();
    (0..4)
        .map(|p| channel_slice(concat, p * 64, 64).unwrap())
        .collect()
}

#[test]
fn pathway_ablation_changes_only_reachable_blocks() {
    let net = full_network();
    let params = net.init_params(3).unwrap();
    let x = batch(4, 2, 112);
    let (_, base) = net.forward(&params, &x, Mode::Eval, 0).unwrap();
    let base = path_blocks(&base);
    // Accretion wiring: add1.1 (paths 1, 2) feeds conv3.3, add1.2 (3, 4)
    // feeds conv3.4, add2.1 (1, 2) feeds conv4.3, add2.2 (3, 4) feeds
    // conv4.4. Paths 1 and 2 therefore reach blocks 3 and 4 through
    // conv3.3 -> add2.2; path 4 reaches nothing but itself.
    let expected: [&[usize]; 4] = [&[0, 2, 3], &[1, 2, 3], &[2, 3], &[3]];
    for (p, changed) in expected.iter().enumerate() {
        let mut ablated = params.clone();
        for layer in 2..=4 {
            ablated.zero_node(&format!("conv{layer}.{}", p + 1));
        }
        let (_, trace) = net.forward(&ablated, &x, Mode::Eval, 0).unwrap();
        for (q, block) in path_blocks(&trace).iter().enumerate() {
            let same = block == &base[q];
            assert_eq!(
                !same,
                changed.contains(&q),
                "ablating path {} block {}",
                p + 1,
                q + 1
            );
        }
    }
}

#[test]
fn accretion_with_zero_parent_is_identity() {
    let net = full_network();
    let mut params = net.init_params(5).unwrap();
    params.zero_node("conv2.2");
    params.zero_node("conv3.4");
    let (_, trace) = net
        .forward(&params, &batch(6, 2, 112), Mode::Train, 9)
        .unwrap();
    assert!(trace
        .output("relu2.2")
        .unwrap()
        .data()
        .iter()
        .all(|&v| v == 0.0));
    assert_eq!(
        trace.output("add1.1").unwrap(),
        trace.output("relu2.1").unwrap()
    );
    assert_eq!(
        trace.output("add2.2").unwrap(),
        trace.output("relu3.3").unwrap()
    );
}

#[test]
fn norm_output_statistics_follow_scale_and_shift() {
    let net = full_network();
    let mut params = net.init_params(7).unwrap();
    let mut r = rng(8);
    *params.get_mut("norm", "scale").unwrap() = uniform(&mut r, &[256], -2.0, 2.0);
    *params.get_mut("norm", "shift").unwrap() = uniform(&mut r, &[256], -1.0, 1.0);
    let (_, trace) = net
        .forward(&params, &batch(9, 4, 112), Mode::Train, 0)
        .unwrap();
    let y = trace.output("norm").unwrap();
    let cache = trace.norm_cache("norm").unwrap();
    let (n, c, h, w) = y.dims4().unwrap();
    for ch in 0..c {
        if cache.batch_var[ch] < 1e-2 {
            continue; // only channels where eps is negligible
        }
        let vals: Vec<f64> = (0..n)
            .flat_map(|s| {
                y.sample(s)[ch * h * w..(ch + 1) * h * w]
                    .iter()
                    .map(|&v| v as f64)
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
        let scale = params.get("norm", "scale").unwrap().data()[ch] as f64;
        let shift = params.get("norm", "shift").unwrap().data()[ch] as f64;
        assert!(
            (mean - shift).abs() < 1e-4,
            "channel {ch}: mean {mean} vs {shift}"
        );
        assert!(
            (sd - scale.abs()).abs() < 1e-2,
            "channel {ch}: sd {sd} vs {scale}"
        );
    }
}

#[test]
fn eval_forward_is_pure_across_thread_counts() {
    let net = full_network();
    let params = net.init_params(10).unwrap();
    let x = batch(11, 3, 112);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| net.predict(&params, &x).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(1));
    assert_eq!(one, run(4));
}

#[test]
fn train_backward_is_identical_across_thread_counts() {
    let net = tiny_network();
    let params = net.init_params(12).unwrap();
    let x = batch(13, 5, 64);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let (logits, trace) = net.forward(&params, &x, Mode::Train, 77).unwrap();
                let (_, g) =
                    learnet::ops::softmax_cross_entropy(&logits, &[0, 1, 2, 0, 1]).unwrap();
                net.backward(&params, &trace, &g).unwrap().params
            })
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn running_statistics_follow_batch_statistics() {
    let net = tiny_network();
    let mut params = net.init_params(14).unwrap();
    let (_, trace) = net
        .forward(&params, &batch(15, 4, 64), Mode::Train, 0)
        .unwrap();
    net.update_running_stats(&mut params, &trace).unwrap();
    let cache = trace.norm_cache("norm").unwrap();
    let mean = params.get("norm", "running_mean").unwrap();
    let var = params.get("norm", "running_var").unwrap();
    for c in 0..mean.len() {
        let want_mean = 0.1 * cache.batch_mean[c];
        let want_var = 0.9 + 0.1 * cache.batch_var[c];
        assert!((mean.data()[c] as f64 - want_mean).abs() < 1e-6);
        assert!((var.data()[c] as f64 - want_var).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn softmax_head_rows_sum_to_one(seed in any::<u64>(), scale in 0.1f32..50.0) {
        let net = tiny_network();
        let mut params: ModelParams = net.init_params(seed).unwrap();
        for (_, t) in params.iter_mut() {
            *t = t.map(|v| v * scale);
        }
        let logits = net.predict(&params, &batch(seed, 3, 64)).unwrap();
        let probs = softmax(&logits).unwrap();
        prop_assert!(probs.all_finite());
        for row in probs.data().chunks(3) {
            let s: f64 = row.iter().map(|&v| v as f64).sum();
            prop_assert!((s - 1.0).abs() <= 1e-5, "row sum {}", s);
        }
    }
}
