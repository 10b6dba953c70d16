//! Oracles shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use learnet::graph::{
    build_learnet_with, norm_backward, norm_forward, LearnetDims, Mode, ModelParams, Network,
    NormStatistics, NORM_EPS,
};
use learnet::ops::{
    affine_backward, affine_forward, channel_concat, channel_slice, conv2d_backward,
    conv2d_forward, elementwise_add, relu, relu_backward, softmax_cross_entropy, AffineParams,
    ConvParams,
};
use learnet::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-3;
pub const PRIMITIVE_TOL: f64 = 1e-2;
pub const NETWORK_TOL: f64 = 2e-2;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, shape: &[usize], lo: f32, hi: f32) -> Tensor {
    Tensor::from_fn(shape, |_| rng.gen_range(lo..hi))
}

/// Uniform values with magnitude at least `gap`, random sign.
pub fn away_from_zero(rng: &mut ChaCha8Rng, shape: &[usize], gap: f32) -> Tensor {
    Tensor::from_fn(shape, |_| {
        let v = rng.gen_range(gap..1.0);
        if rng.gen_bool(0.5) {
            v
        } else {
            -v
        }
    })
}

/// Σ y·w accumulated in f64; its gradient with respect to y is w.
pub fn project(y: &Tensor, w: &Tensor) -> f64 {
    assert_eq!(y.shape(), w.shape());
    y.data()
        .iter()
        .zip(w.data())
        .map(|(&a, &b)| a as f64 * b as f64)
        .sum()
}

/// Central-difference gradient of `f` at `x`. Each coordinate is moved by
/// the step actually representable in f32.
pub fn fd_gradient(x: &Tensor, f: impl FnMut(&Tensor) -> f64) -> Vec<f64> {
    fd_gradient_at(x, &(0..x.len()).collect::<Vec<_>>(), f)
}

/// Central differences at the listed coordinates only.
pub fn fd_gradient_at(x: &Tensor, coords: &[usize], mut f: impl FnMut(&Tensor) -> f64) -> Vec<f64> {
    let mut probe = x.clone();
    coords
        .iter()
        .map(|&i| {
            let orig = x.data()[i];
            let plus = (orig as f64 + FD_STEP) as f32;
            let minus = (orig as f64 - FD_STEP) as f32;
            probe.data_mut()[i] = plus;
            let fp = f(&probe);
            probe.data_mut()[i] = minus;
            let fm = f(&probe);
            probe.data_mut()[i] = orig;
            (fp - fm) / (plus as f64 - minus as f64)
        })
        .collect()
}

/// ‖a − b‖ / max(‖a‖, ‖b‖), zero when both vanish.
pub fn rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = norm(analytic).max(norm(numeric));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn as_f64(t: &Tensor) -> Vec<f64> {
    t.data().iter().map(|&v| v as f64).collect()
}

fn worst(errors: impl IntoIterator<Item = f64>) -> f64 {
    errors.into_iter().fold(0.0, f64::max)
}

pub fn conv_case(seed: u64) -> f64 {
    let mut r = rng(seed);
    let input = uniform(&mut r, &[1, 2, 6, 6], -1.0, 1.0);
    let w = uniform(&mut r, &[3, 2, 3, 3], -1.0, 1.0);
    let b = uniform(&mut r, &[3], -1.0, 1.0);
    let params = ConvParams::new(w.clone(), b.clone(), 2, 1).unwrap();
    let out = conv2d_forward(&input, &params).unwrap();
    let g = uniform(&mut r, out.shape(), -1.0, 1.0);
    let grads = conv2d_backward(&input, &params, &g).unwrap();
    let loss = |x: &Tensor, w: &Tensor, b: &Tensor| {
        let p = ConvParams::new(w.clone(), b.clone(), 2, 1).unwrap();
        project(&conv2d_forward(x, &p).unwrap(), &g)
    };
    worst([
        rel_error(
            &as_f64(&grads.input),
            &fd_gradient(&input, |x| loss(x, &w, &b)),
        ),
        rel_error(
            &as_f64(&grads.weights),
            &fd_gradient(&w, |w| loss(&input, w, &b)),
        ),
        rel_error(
            &as_f64(&grads.bias),
            &fd_gradient(&b, |b| loss(&input, &w, b)),
        ),
    ])
}

pub fn relu_case(seed: u64) -> f64 {
    let mut r = rng(seed);
    let x = away_from_zero(&mut r, &[2, 3, 4, 4], 0.01);
    let g = uniform(&mut r, x.shape(), -1.0, 1.0);
    let analytic = relu_backward(&x, &g).unwrap();
    rel_error(
        &as_f64(&analytic),
        &fd_gradient(&x, |x| project(&relu(x), &g)),
    )
}

pub fn add_case(seed: u64) -> f64 {
    let mut r = rng(seed);
    let a = uniform(&mut r, &[2, 3, 3, 3], -1.0, 1.0);
    let b = uniform(&mut r, &[2, 3, 3, 3], -1.0, 1.0);
    let g = uniform(&mut r, a.shape(), -1.0, 1.0);
    // The sum passes the upstream gradient to both operands.
    let ga = fd_gradient(&a, |a| project(&elementwise_add(a, &b).unwrap(), &g));
    let gb = fd_gradient(&b, |b| project(&elementwise_add(&a, b).unwrap(), &g));
    worst([rel_error(&as_f64(&g), &ga), rel_error(&as_f64(&g), &gb)])
}

pub fn concat_case(seed: u64) -> f64 {
    let mut r = rng(seed);
    let a = uniform(&mut r, &[2, 2, 3, 3], -1.0, 1.0);
    let b = uniform(&mut r, &[2, 3, 3, 3], -1.0, 1.0);
    let g = uniform(&mut r, &[2, 5, 3, 3], -1.0, 1.0);
    let ga = fd_gradient(&a, |a| project(&channel_concat(&[a, &b]).unwrap(), &g));
    let gb = fd_gradient(&b, |b| project(&channel_concat(&[&a, b]).unwrap(), &g));
    worst([
        rel_error(&as_f64(&channel_slice(&g, 0, 2).unwrap()), &ga),
        rel_error(&as_f64(&channel_slice(&g, 2, 3).unwrap()), &gb),
    ])
}

pub fn affine_case(seed: u64) -> f64 {
    let mut r = rng(seed);
    let x = uniform(&mut r, &[3, 5], -1.0, 1.0);
    let w = uniform(&mut r, &[4, 5], -1.0, 1.0);
    let b = uniform(&mut r, &[4], -1.0, 1.0);
    let g = uniform(&mut r, &[3, 4], -1.0, 1.0);
    let params = AffineParams::new(w.clone(), b.clone()).unwrap();
    let grads = affine_backward(&x, &params, &g).unwrap();
    let loss = |x: &Tensor, w: &Tensor, b: &Tensor| {
        let p = AffineParams::new(w.clone(), b.clone()).unwrap();
        project(&affine_forward(x, &p).unwrap(), &g)
    };
    worst([
        rel_error(&as_f64(&grads.input), &fd_gradient(&x, |x| loss(x, &w, &b))),
        rel_error(
            &as_f64(&grads.weights),
            &fd_gradient(&w, |w| loss(&x, w, &b)),
        ),
        rel_error(&as_f64(&grads.bias), &fd_gradient(&b, |b| loss(&x, &w, b))),
    ])
}

pub fn softmax_ce_case(seed: u64) -> f64 {
    let mut r = rng(seed);
    let logits = uniform(&mut r, &[4, 5], -3.0, 3.0);
    let labels: Vec<usize> = (0..4).map(|_| r.gen_range(0..5)).collect();
    let (_, grad) = softmax_cross_entropy(&logits, &labels).unwrap();
    let numeric = fd_gradient(&logits, |l| softmax_cross_entropy(l, &labels).unwrap().0);
    rel_error(&as_f64(&grad), &numeric)
}

pub fn norm_case(seed: u64) -> f64 {
    let mut r = rng(seed);
    let x = uniform(&mut r, &[3, 2, 3, 3], -2.0, 2.0);
    let scale = uniform(&mut r, &[2], 0.5, 1.5);
    let shift = uniform(&mut r, &[2], -0.5, 0.5);
    let g = uniform(&mut r, x.shape(), -1.0, 1.0);
    let loss = |x: &Tensor, s: &Tensor, b: &Tensor| {
        project(
            &norm_forward(x, s, b, NORM_EPS, NormStatistics::Batch)
                .unwrap()
                .0,
            &g,
        )
    };
    let (_, cache) = norm_forward(&x, &scale, &shift, NORM_EPS, NormStatistics::Batch).unwrap();
    let grads = norm_backward(&cache.unwrap(), &scale, &g).unwrap();
    worst([
        rel_error(
            &as_f64(&grads.input),
            &fd_gradient(&x, |x| loss(x, &scale, &shift)),
        ),
        rel_error(
            &as_f64(&grads.scale),
            &fd_gradient(&scale, |s| loss(&x, s, &shift)),
        ),
        rel_error(
            &as_f64(&grads.shift),
            &fd_gradient(&shift, |b| loss(&x, &scale, b)),
        ),
    ])
}

/// LEARNet topology at toy size: 64×64 input, few channels.
pub fn tiny_dims(classes: usize) -> LearnetDims {
    LearnetDims {
        input_size: 64,
        input_channels: 3,
        stem_filters: 4,
        path_filters: [2, 3, 4],
        conv5_filters: 6,
        conv5_pad: 1,
        fc_features: 8,
        dropout: 0.5,
        classes,
    }
}

pub fn tiny_network() -> Network {
    Network::new(build_learnet_with(&tiny_dims(3)).unwrap()).unwrap()
}

/// Coordinates probed per parameter tensor in the whole-network check.
pub const NETWORK_PROBES: usize = 16;

/// Relative disagreement of one-sided differences that marks a kink.
pub const KINK_TOL: f64 = 0.05;

/// Whole-network check: analytic gradients of the batch cross-entropy for
/// every trainable tensor against central differences at a seeded sample
/// of coordinates, pooled into one relative error.
///
/// Central differences are only meaningful where the loss is smooth over
/// the whole step. A probe whose forward and backward one-sided
/// differences disagree by more than [`KINK_TOL`] straddles a ReLU kink;
/// it is discarded and another coordinate drawn. Biases get small positive
/// values so few units sit near a kink to begin with.
pub fn network_case(seed: u64) -> f64 {
    let net = tiny_network();
    let mut params = net.init_params(seed).unwrap();
    let mut r = rng(seed ^ 0x5eed);
    for (key, t) in params.iter_mut() {
        if key.ends_with(".bias") || key.ends_with(".shift") {
            *t = uniform(&mut r, t.shape(), 0.1, 0.4);
        }
    }
    let batch = uniform(&mut r, &[4, 3, 64, 64], 0.0, 1.0);
    let labels: Vec<usize> = (0..4).map(|_| r.gen_range(0..3)).collect();
    let dropout_seed = seed.wrapping_mul(31);

    let eval = |p: &ModelParams| {
        let (logits, _) = net.forward(p, &batch, Mode::Train, dropout_seed).unwrap();
        softmax_cross_entropy(&logits, &labels).unwrap().0
    };
    let (logits, trace) = net
        .forward(&params, &batch, Mode::Train, dropout_seed)
        .unwrap();
    let (f0, grad) = softmax_cross_entropy(&logits, &labels).unwrap();
    let grads = net.backward(&params, &trace, &grad).unwrap();

    let mut analytic = Vec::new();
    let mut numeric = Vec::new();
    let mut total_wanted = 0;
    for (key, g) in &grads.params {
        let base = params.tensor(key).unwrap().clone();
        let wanted = NETWORK_PROBES.min(base.len());
        let mut accepted = 0;
        for attempt in 0..wanted * 8 {
            if accepted == wanted {
                break;
            }
            let i = if attempt < wanted && base.len() <= NETWORK_PROBES {
                attempt
            } else {
                r.gen_range(0..base.len())
            };
            let orig = base.data()[i];
            let plus = (orig as f64 + FD_STEP) as f32;
            let minus = (orig as f64 - FD_STEP) as f32;
            let mut p = params.clone();
            p.tensor_mut(key).unwrap().data_mut()[i] = plus;
            let fp = eval(&p);
            p.tensor_mut(key).unwrap().data_mut()[i] = minus;
            let fm = eval(&p);
            let forward = (fp - f0) / (plus as f64 - orig as f64);
            let backward = (f0 - fm) / (orig as f64 - minus as f64);
            if (forward - backward).abs() > KINK_TOL * forward.abs().max(backward.abs()) + 1e-6 {
                continue;
            }
            analytic.push(g.data()[i] as f64);
            numeric.push((fp - fm) / (plus as f64 - minus as f64));
            accepted += 1;
        }
        total_wanted += wanted;
    }
    assert!(
        analytic.len() * 2 >= total_wanted,
        "only {} of {total_wanted} probes were smooth",
        analytic.len()
    );
    rel_error(&analytic, &numeric)
}

pub const GRADIENT_SEEDS: u64 = 20;

/// Worst relative error per primitive over the seeded instances.
pub fn primitive_suite() -> Vec<(&'static str, f64)> {
    type Case = (&'static str, fn(u64) -> f64);
    let cases: [Case; 7] = [
        ("conv2d", conv_case),
        ("relu", relu_case),
        ("add", add_case),
        ("concat", concat_case),
        ("affine", affine_case),
        ("softmax_ce", softmax_ce_case),
        ("norm", norm_case),
    ];
    cases
        .iter()
        .map(|(name, f)| (*name, worst((0..GRADIENT_SEEDS).map(f))))
        .collect()
}

pub fn network_suite() -> f64 {
    worst((0..GRADIENT_SEEDS).map(network_case))
}

/// Minimizes the scalar rank-pooling energy over a fine grid around the
/// origin and refines around the best cell.
pub fn grid_search_scalar(energy: impl Fn(f64) -> f64) -> f64 {
    let mut lo = -5.0;
    let mut hi = 5.0;
    let mut best = 0.0;
    for _ in 0..6 {
        let n = 2000;
        let step = (hi - lo) / n as f64;
        let mut best_e = f64::INFINITY;
        for i in 0..=n {
            let d = lo + i as f64 * step;
            let e = energy(d);
            if e < best_e {
                best_e = e;
                best = d;
            }
        }
        lo = best - 2.0 * step;
        hi = best + 2.0 * step;
    }
    best
}

/// Rank-pooling energy of a scalar sequence written out from the
/// definition: time averages, then the regularized pairwise hinge.
pub fn scalar_energy(values: &[f64], delta: f64, d: f64) -> f64 {
    let t = values.len();
    let phi: Vec<f64> = (1..=t)
        .map(|k| values[..k].iter().sum::<f64>() / k as f64)
        .collect();
    let mut hinge = 0.0;
    for later in 0..t {
        for earlier in 0..later {
            hinge += (1.0 - d * phi[later] + d * phi[earlier]).max(0.0);
        }
    }
    delta / 2.0 * d * d + 2.0 / (t * (t - 1)) as f64 * hinge
}

/// Nested-loop cross-correlation.
pub fn brute_force_conv(
    input: &Tensor,
    w: &Tensor,
    b: &Tensor,
    stride: usize,
    pad: usize,
) -> Tensor {
    let (n, c, h, wd) = input.dims4().unwrap();
    let (o, _, k, _) = w.dims4().unwrap();
    let ho = (h + 2 * pad - k) / stride + 1;
    let wo = (wd + 2 * pad - k) / stride + 1;
    let mut out = Tensor::zeros(&[n, o, ho, wo]);
    for s in 0..n {
        for oc in 0..o {
            for y in 0..ho {
                for x in 0..wo {
                    let mut acc = b.data()[oc] as f64;
                    for ic in 0..c {
                        for ky in 0..k {
                            for kx in 0..k {
                                let iy = (y * stride + ky) as isize - pad as isize;
                                let ix = (x * stride + kx) as isize - pad as isize;
                                if iy < 0 || ix < 0 || iy >= h as isize || ix >= wd as isize {
                                    continue;
                                }
                                let iv = input.data()
                                    [((s * c + ic) * h + iy as usize) * wd + ix as usize];
                                let wv = w.data()[((oc * c + ic) * k + ky) * k + kx];
                                acc += iv as f64 * wv as f64;
                            }
                        }
                    }
                    out.data_mut()[((s * o + oc) * ho + y) * wo + x] = acc as f32;
                }
            }
        }
    }
    out
}

/// Per-sample output shapes from the LEARNet configuration table, as
/// `[C, H, W]` (or `[F]` for the fully connected layer).
pub fn layer_shape_oracle() -> Vec<(&'static str, Vec<usize>)> {
    let mut v: Vec<(&'static str, Vec<usize>)> =
        vec![("input", vec![3, 112, 112]), ("conv1", vec![16, 56, 56])];
    for n in [
        "conv2.1", "conv2.2", "conv2.3", "conv2.4", "add1.1", "add1.2",
    ] {
        v.push((n, vec![16, 28, 28]));
    }
    for n in [
        "conv3.1", "conv3.2", "conv3.3", "conv3.4", "add2.1", "add2.2",
    ] {
        v.push((n, vec![32, 14, 14]));
    }
    for n in ["conv4.1", "conv4.2", "conv4.3", "conv4.4"] {
        v.push((n, vec![64, 7, 7]));
    }
    v.push(("concat", vec![256, 7, 7]));
    v.push(("norm", vec![256, 7, 7]));
    v.push(("conv5", vec![256, 4, 4]));
    v.push(("fc", vec![256]));
    v
}

/// Per-node weight and bias counts from the configuration table.
pub fn layer_param_oracle() -> Vec<(&'static str, usize, usize)> {
    let mut v = vec![("conv1", 432, 16)];
    for p in 1..=4 {
        v.push((["conv2.1", "conv2.2", "conv2.3", "conv2.4"][p - 1], 256, 16));
    }
    for p in 1..=4 {
        v.push((
            ["conv3.1", "conv3.2", "conv3.3", "conv3.4"][p - 1],
            4608,
            32,
        ));
    }
    for p in 1..=4 {
        v.push((
            ["conv4.1", "conv4.2", "conv4.3", "conv4.4"][p - 1],
            51200,
            64,
        ));
    }
    v.push(("norm", 256, 256));
    v.push(("conv5", 589824, 256));
    v
}

pub const REDUCED_BACKBONE: usize = 1_405_824;

/// Split protocol over `manifests` random label lists: set sizes follow
/// 80:20 then 70:30 (nearest-integer), sets are disjoint and cover every
/// index, and repeats with equal seeds agree.
pub fn split_protocol_check(manifests: u64) -> Result<(), String> {
    use learnet::train::{split_dataset, SplitPlan};
    use std::collections::HashSet;
    for m in 0..manifests {
        let mut r = rng(1000 + m);
        let classes = r.gen_range(2..6);
        let n = r.gen_range(classes.max(5)..300);
        let mut labels: Vec<usize> = (0..n).map(|_| r.gen_range(0..classes)).collect();
        labels[..classes].copy_from_slice(&(0..classes).collect::<Vec<_>>());
        let plan = SplitPlan::new(r.gen_range(1..6), r.gen());
        let splits = split_dataset(&labels, classes, &plan).map_err(|e| e.to_string())?;
        if splits != split_dataset(&labels, classes, &plan).unwrap() {
            return Err(format!("manifest {m}: split is not reproducible"));
        }
        let kept = (0.8 * n as f64).round() as usize;
        let val = (0.3 * kept as f64).round() as usize;
        for s in &splits {
            if (s.train.len(), s.val.len(), s.test.len()) != (kept - val, val, n - kept) {
                return Err(format!(
                    "manifest {m} (n = {n}): sizes {}/{}/{}",
                    s.train.len(),
                    s.val.len(),
                    s.test.len()
                ));
            }
            let train: HashSet<_> = s.train.iter().collect();
            let val: HashSet<_> = s.val.iter().collect();
            let test: HashSet<_> = s.test.iter().collect();
            if !train.is_disjoint(&test) || !val.is_disjoint(&test) || !train.is_disjoint(&val) {
                return Err(format!("manifest {m}: overlapping sets"));
            }
            if train.len() + val.len() + test.len() != n
                || s.train.iter().chain(&s.val).chain(&s.test).any(|&i| i >= n)
            {
                return Err(format!("manifest {m}: sets do not partition the indices"));
            }
        }
    }
    Ok(())
}

/// Accuracy and confusion matrix on a fixed prediction list, against a
/// hand count.
pub fn confusion_fixture_check() -> Result<(), String> {
    use learnet::train::metrics_from_predictions;
    let labels = [0, 0, 0, 1, 1, 2, 2, 2, 2, 3];
    let predicted = [0, 1, 0, 1, 1, 2, 0, 2, 3, 3];
    // Correct: indices 0, 2, 3, 4, 5, 7, 9.
    let m = metrics_from_predictions(&predicted, &labels, 4).map_err(|e| e.to_string())?;
    if (m.accuracy - 70.0).abs() > 1e-12 {
        return Err(format!("accuracy {} != 70", m.accuracy));
    }
    let rows = m.confusion.row_normalized();
    for (i, row) in rows.iter().enumerate() {
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-6 || row.iter().any(|&v| v < 0.0) {
            return Err(format!("row {i} sums to {s}"));
        }
    }
    // Predicted 0: true 0, 0, 2; predicted 1: true 0, 1, 1.
    let want0 = [2.0 / 3.0, 0.0, 1.0 / 3.0, 0.0];
    let want1 = [1.0 / 3.0, 2.0 / 3.0, 0.0, 0.0];
    for (got, want) in [(&rows[0], want0), (&rows[1], want1)] {
        if got.iter().zip(want).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(format!("row {got:?} != {want:?}"));
        }
    }
    // An 8-class matrix has 8 normalized rows.
    let labels8: Vec<usize> = (0..64).map(|i| i % 8).collect();
    let pred8: Vec<usize> = (0..64).map(|i| (i * 3 + i / 8) % 8).collect();
    let m8 = metrics_from_predictions(&pred8, &labels8, 8).map_err(|e| e.to_string())?;
    let rows8 = m8.confusion.row_normalized();
    if rows8.len() != 8
        || rows8
            .iter()
            .any(|r| (r.iter().sum::<f64>() - 1.0).abs() > 1e-6)
    {
        return Err("8-class rows do not sum to 1".into());
    }
    Ok(())
}

/// 28 variants per image, variant 0 is the input, double flip is identity.
pub fn augmentation_check() -> Result<(), String> {
    use learnet::data::image::flip_horizontal;
    use learnet::train::augment_expand;
    for seed in 0..3 {
        let mut r = rng(seed);
        let img = learnet::data::RgbImage::from_fn(23, 17, |_, _| [r.gen(), r.gen(), r.gen()]);
        let variants = augment_expand(&img);
        if variants.len() != 28 {
            return Err(format!("{} variants", variants.len()));
        }
        if variants[0] != img {
            return Err("variant 0 differs from the input".into());
        }
        if flip_horizontal(&flip_horizontal(&img)) != img {
            return Err("double flip is not the identity".into());
        }
        if variants.iter().any(|v| (v.width(), v.height()) != (23, 17)) {
            return Err("a variant changed size".into());
        }
    }
    Ok(())
}

/// Every file under `dir` with its bytes, in sorted relative-path order.
pub fn tree_bytes(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &std::path::Path, dir: &std::path::Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}

/// Seeded synthetic corpus pooled into 112×112 dynamic images.
pub fn synthetic_dataset(
    dir: &std::path::Path,
    seed: u64,
    per_class: usize,
) -> learnet::train::Dataset {
    use learnet::data::{generate_synthetic_dataset, load_dataset, SynthConfig, INPUT_SIZE};
    let cfg = SynthConfig {
        clips_per_class: per_class,
        seed,
        ..SynthConfig::default()
    };
    let manifest = generate_synthetic_dataset(dir, &cfg).unwrap();
    load_dataset(
        &manifest,
        INPUT_SIZE,
        &learnet::rankpool::RankPoolConfig::default(),
    )
    .unwrap()
}
