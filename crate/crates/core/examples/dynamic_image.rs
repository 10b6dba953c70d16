//! Collapse a synthetic clip into dynamic images with both pooling modes.
//!
//! `cargo run --release --example dynamic_image [OUT_DIR]`

use std::path::{Path, PathBuf};

use learnet::data::ppm::write_ppm;
use learnet::data::synth::synth_clip;
use learnet::data::SynthConfig;
use learnet::rankpool::{dynamic_image, RankPoolConfig};

pub fn run(out: &Path) -> learnet::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| learnet::Error::io(out, e))?;
    let cfg = SynthConfig {
        size: 64,
        frames: 10,
        seed: 3,
        ..SynthConfig::default()
    };
    let mut written = Vec::new();
    for class in 0..cfg.classes {
        let frames = synth_clip(class, 0, &cfg);
        for (label, pool) in [
            ("approx", RankPoolConfig::default()),
            ("exact", RankPoolConfig::exact()),
        ] {
            let (map, image) = dynamic_image(&frames, &pool)?;
            let peak = map.weights.iter().fold(0f64, |m, v| m.max(v.abs()));
            println!(
                "class {class} {label:>6}: {} iterations, max |d| = {peak:.4}",
                map.iterations
            );
            let path = out.join(format!("class{class}_{label}.ppm"));
            write_ppm(&path, &image)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn main() -> learnet::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "dynamic_images".into());
    for path in run(Path::new(&out))? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
