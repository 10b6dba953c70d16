//! Training and evaluation: augmentation, data splits, SGD, metrics.

mod augment;
mod fit;
mod metrics;
mod sgd;
mod split;

pub use augment::{augment_expand, variant, Variant, ROTATIONS, VARIANTS_PER_IMAGE};
pub use fit::{
    evaluate, fit, predict_classes, train_model, training_samples, Dataset, EpochRecord,
    FitOutcome, RepeatOutcome, Sample, TrainOutcome,
};
pub use metrics::{
    argmax, metrics_from_predictions, recognition_accuracy, ConfusionMatrix, Metrics,
};
pub use sgd::{sgd_step, TrainConfig};
pub use split::{split_dataset, split_sizes, Split, SplitPlan};
