//! Mini-batch SGD training, model selection and the repeated-split protocol.

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::image::{images_to_batch, RgbImage};
use crate::error::{invalid, shape_err, Result};
use crate::graph::{Gradients, Mode, ModelParams, Network};
use crate::ops::softmax_cross_entropy;

use super::augment::augment_expand;
use super::metrics::{argmax, metrics_from_predictions, Metrics};
use super::sgd::{sgd_step, TrainConfig};
use super::split::{split_dataset, Split, SplitPlan};

/// Labeled dynamic images.
#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub images: Vec<RgbImage>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.class_names.len()
    }
}

/// A training example with its provenance: the dataset index it came from
/// and the augmentation variant (0 is the unmodified image).
#[derive(Clone, Debug)]
pub struct Sample {
    pub image: RgbImage,
    pub label: usize,
    pub source: usize,
    pub variant: usize,
}

/// Training samples for the given dataset indices, expanded by
/// augmentation when requested.
pub fn training_samples(data: &Dataset, indices: &[usize], augment: bool) -> Vec<Sample> {
    let mut out = Vec::new();
    for &i in indices {
        if augment {
            out.extend(augment_expand(&data.images[i]).into_iter().enumerate().map(
                |(variant, image)| Sample {
                    image,
                    label: data.labels[i],
                    source: i,
                    variant,
                },
            ));
        } else {
            out.push(Sample {
                image: data.images[i].clone(),
                label: data.labels[i],
                source: i,
                variant: 0,
            });
        }
    }
    out
}

const EVAL_BATCH: usize = 25;

fn check_image_size(net: &Network, image: &RgbImage) -> Result<()> {
    let shape = net.input_shape();
    if shape != [3, image.height(), image.width()] {
        return Err(shape_err!(
            "image is {}x{} but the network expects {:?}",
            image.width(),
            image.height(),
            shape
        ));
    }
    Ok(())
}

/// Eval-mode class predictions (argmax of the head, ties to the lowest).
pub fn predict_classes(
    net: &Network,
    params: &ModelParams,
    images: &[&RgbImage],
) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(images.len());
    for chunk in images.chunks(EVAL_BATCH) {
        for img in chunk {
            check_image_size(net, img)?;
        }
        let logits = net.predict(params, &images_to_batch(chunk)?)?;
        out.extend(logits.data().chunks(net.classes()).map(argmax));
    }
    Ok(out)
}

pub fn evaluate(
    net: &Network,
    params: &ModelParams,
    images: &[&RgbImage],
    labels: &[usize],
) -> Result<Metrics> {
    if images.is_empty() {
        return Err(invalid!("cannot evaluate an empty sample set"));
    }
    let predicted = predict_classes(net, params, images)?;
    metrics_from_predictions(&predicted, labels, net.classes())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean mini-batch loss over the epoch, weighted by batch size.
    pub train_loss: f64,
    pub val_accuracy: Option<f64>,
    pub train_accuracy: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct FitOutcome {
    /// Parameters at the selected epoch (best validation accuracy, or the
    /// last epoch without a validation set).
    pub params: ModelParams,
    pub selected_epoch: usize,
    pub curve: Vec<EpochRecord>,
}

impl FitOutcome {
    pub fn best_val_accuracy(&self) -> Option<f64> {
        self.curve[self.selected_epoch].val_accuracy
    }
}

fn step_seed(seed: u64, step: u64) -> u64 {
    seed.rotate_left(17) ^ step.wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Trains `params` on `train` for up to `cfg.epochs` epochs of shuffled
/// mini-batches, keeping the epoch with the best validation accuracy.
/// Runs single-writer and is bit-reproducible for fixed inputs.
pub fn fit(
    net: &Network,
    mut params: ModelParams,
    train: &[Sample],
    val: Option<(&[&RgbImage], &[usize])>,
    cfg: &TrainConfig,
) -> Result<FitOutcome> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(invalid!("training set is empty"));
    }
    for s in train {
        check_image_size(net, &s.image)?;
    }
    let val = val.filter(|(images, _)| !images.is_empty());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut velocity = Gradients::new();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut curve = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, ModelParams)> = None;
    let mut step = 0u64;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let images: Vec<&RgbImage> = chunk.iter().map(|&i| &train[i].image).collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| train[i].label).collect();
            let batch = images_to_batch(&images)?;
            let (logits, trace) =
                net.forward(&params, &batch, Mode::Train, step_seed(cfg.seed, step))?;
            let (loss, grad) = softmax_cross_entropy(&logits, &labels)?;
            let grads = net.backward(&params, &trace, &grad)?;
            net.update_running_stats(&mut params, &trace)?;
            sgd_step(&mut params, &grads.params, &mut velocity, cfg)?;
            loss_sum += loss * chunk.len() as f64;
            step += 1;
        }
        let train_loss = loss_sum / train.len() as f64;
        if !train_loss.is_finite() {
            return Err(invalid!(
                "training diverged at epoch {epoch} (loss {train_loss})"
            ));
        }

        let val_accuracy = match val {
            Some((images, labels)) => Some(evaluate(net, &params, images, labels)?.accuracy),
            None => None,
        };
        let train_accuracy = match cfg.stop_at_train_accuracy {
            Some(_) => {
                let images: Vec<&RgbImage> = train.iter().map(|s| &s.image).collect();
                let labels: Vec<usize> = train.iter().map(|s| s.label).collect();
                Some(evaluate(net, &params, &images, &labels)?.accuracy)
            }
            None => None,
        };
        info!(
            "epoch {epoch}: loss {train_loss:.5}{}{}",
            val_accuracy
                .map(|a| format!(", val {a:.2}%"))
                .unwrap_or_default(),
            train_accuracy
                .map(|a| format!(", train {a:.2}%"))
                .unwrap_or_default()
        );
        curve.push(EpochRecord {
            epoch,
            train_loss,
            val_accuracy,
            train_accuracy,
        });

        if let Some(acc) = val_accuracy {
            if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
                best = Some((acc, epoch, params.clone()));
            }
        }
        if let (Some(target), Some(acc)) = (cfg.stop_at_train_accuracy, train_accuracy) {
            if acc >= target {
                break;
            }
        }
    }

    let (params, selected_epoch) = match best {
        Some((_, epoch, p)) => (p, epoch),
        None => (params, curve.len() - 1),
    };
    Ok(FitOutcome {
        params,
        selected_epoch,
        curve,
    })
}

#[derive(Clone, Debug)]
pub struct RepeatOutcome {
    pub split: Split,
    pub fit: FitOutcome,
    pub test: Metrics,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub repeats: Vec<RepeatOutcome>,
    /// Mean test accuracy over repeats with the summed confusion matrix.
    pub metrics: Metrics,
    pub warnings: Vec<String>,
}

impl TrainOutcome {
    /// Repeat whose selected checkpoint scored best on validation (ties to
    /// the earliest repeat).
    pub fn best_repeat(&self) -> &RepeatOutcome {
        let score = |r: &RepeatOutcome| r.fit.best_val_accuracy().unwrap_or(f64::NEG_INFINITY);
        let mut best = &self.repeats[0];
        for r in &self.repeats[1..] {
            if score(r) > score(best) {
                best = r;
            }
        }
        best
    }
}

/// The repeated random-split protocol: per repeat, partition, augment the
/// training part only, train, select on validation, test. Reports the mean
/// test accuracy across repeats.
pub fn train_model(
    net: &Network,
    data: &Dataset,
    cfg: &TrainConfig,
    plan: &SplitPlan,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.classes() != net.classes() {
        return Err(invalid!(
            "dataset has {} classes but the network head has {}",
            data.classes(),
            net.classes()
        ));
    }
    let splits = split_dataset(&data.labels, data.classes(), plan)?;
    let mut warnings = Vec::new();
    let mut repeats = Vec::with_capacity(splits.len());
    for (r, split) in splits.into_iter().enumerate() {
        if split.train.is_empty() || split.test.is_empty() {
            return Err(invalid!(
                "{} samples are too few for a train/test split",
                data.len()
            ));
        }
        for (c, name) in data.class_names.iter().enumerate() {
            let n = split.train.iter().filter(|&&i| data.labels[i] == c).count();
            if n < 2 {
                let msg = format!("repeat {r}: class `{name}` has {n} training sample(s)");
                warn!("{msg}");
                warnings.push(msg);
            }
        }

        let train = training_samples(data, &split.train, cfg.augmentation);
        let val_images: Vec<&RgbImage> = split.val.iter().map(|&i| &data.images[i]).collect();
        let val_labels: Vec<usize> = split.val.iter().map(|&i| data.labels[i]).collect();
        let repeat_cfg = TrainConfig {
            seed: cfg.seed.wrapping_add(r as u64),
            ..cfg.clone()
        };
        let init = net.init_params(repeat_cfg.seed)?;
        info!("repeat {r}: {} training samples", train.len());
        let fit = fit(
            net,
            init,
            &train,
            Some((&val_images, &val_labels)),
            &repeat_cfg,
        )?;

        let test_images: Vec<&RgbImage> = split.test.iter().map(|&i| &data.images[i]).collect();
        let test_labels: Vec<usize> = split.test.iter().map(|&i| data.labels[i]).collect();
        let test = evaluate(net, &fit.params, &test_images, &test_labels)?;
        info!("repeat {r}: test accuracy {:.2}%", test.accuracy);
        repeats.push(RepeatOutcome { split, fit, test });
    }
    let metrics = Metrics::aggregate(&repeats.iter().map(|r| r.test.clone()).collect::<Vec<_>>())?;
    Ok(TrainOutcome {
        repeats,
        metrics,
        warnings,
    })
}
