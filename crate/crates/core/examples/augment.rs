//! Expand one dynamic image into its rotated, equalized and flipped variants.
//!
//! `cargo run --example augment [OUT_DIR]`

use std::path::Path;

use learnet::data::ppm::write_ppm;
use learnet::data::synth::synth_clip;
use learnet::data::{clip_dynamic_image, RgbImage, SynthConfig};
use learnet::rankpool::RankPoolConfig;
use learnet::train::{augment_expand, variant};

pub fn run(out: &Path) -> learnet::Result<Vec<RgbImage>> {
    let cfg = SynthConfig {
        size: 48,
        seed: 2,
        ..SynthConfig::default()
    };
    let image = clip_dynamic_image(&synth_clip(2, 0, &cfg), 48, &RankPoolConfig::default())?;
    let variants = augment_expand(&image);
    std::fs::create_dir_all(out).map_err(|e| learnet::Error::io(out, e))?;
    for (i, v) in variants.iter().enumerate() {
        let spec = variant(i);
        println!(
            "{i:>2}: {:>4} deg{}{}",
            spec.degrees,
            if spec.equalized { " equalized" } else { "" },
            if spec.flipped { " flipped" } else { "" }
        );
        write_ppm(&out.join(format!("variant_{i:02}.ppm")), v)?;
    }
    Ok(variants)
}

fn main() -> learnet::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "augmented".into());
    run(Path::new(&out)).map(|_| ())
}
