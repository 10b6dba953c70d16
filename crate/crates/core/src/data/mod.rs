//! Files in and out: frames, manifests, checkpoints, reports.

pub mod checkpoint;
pub mod dataset;
pub mod dump;
pub mod frames;
pub mod image;
pub mod manifest;
pub mod ppm;
pub mod reports;
pub mod synth;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use dataset::{clip_dynamic_image, load_dataset, INPUT_SIZE};
pub use dump::dump_feature_maps;
pub use frames::load_frame_sequence;
pub use image::RgbImage;
pub use manifest::{Manifest, ManifestEntry};
pub use synth::{generate_synthetic_dataset, SynthConfig};
