//! Manifest to labeled dynamic images.

use rayon::prelude::*;

use crate::data::frames::load_frame_sequence;
use crate::data::image::{resize_bilinear, RgbImage};
use crate::data::manifest::Manifest;
use crate::error::Result;
use crate::rankpool::{dynamic_image, RankPoolConfig};
use crate::train::Dataset;

/// Side length of the network input.
pub const INPUT_SIZE: usize = 112;

/// Resizes every frame to `size`×`size` and pools them into a quantized
/// dynamic image.
pub fn clip_dynamic_image(
    frames: &[RgbImage],
    size: usize,
    cfg: &RankPoolConfig,
) -> Result<RgbImage> {
    let resized: Vec<RgbImage> = frames
        .iter()
        .map(|f| resize_bilinear(f, size, size))
        .collect();
    Ok(dynamic_image(&resized, cfg)?.1)
}

/// Loads and pools every clip of the manifest. Clips are processed in
/// parallel; the result order follows the manifest.
pub fn load_dataset(manifest: &Manifest, size: usize, cfg: &RankPoolConfig) -> Result<Dataset> {
    let images = manifest
        .entries
        .par_iter()
        .map(|e| clip_dynamic_image(&load_frame_sequence(&manifest.frames_dir(e))?, size, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        images,
        labels: manifest.labels(),
        class_names: manifest.classes.clone(),
    })
}
