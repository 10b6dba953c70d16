//! Seeded synthetic micro-motion corpus: a bright blob moving over a dark
//! face-like oval, one motion pattern per class.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::image::RgbImage;
use crate::data::manifest::{Manifest, ManifestEntry};
use crate::data::ppm::write_ppm;
use crate::error::{invalid, Error, Result};

/// Class names in label order. The first three are the default corpus.
pub const PATTERNS: [&str; 8] = [
    "drift_up",
    "oscillate_x",
    "expand",
    "drift_down",
    "oscillate_y",
    "contract",
    "drift_diagonal",
    "pulse",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub classes: usize,
    pub clips_per_class: usize,
    pub frames: usize,
    pub size: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: 3,
            clips_per_class: 20,
            frames: 8,
            size: 112,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 1 || self.classes > PATTERNS.len() {
            return Err(invalid!("classes must be in 1..={}", PATTERNS.len()));
        }
        if self.clips_per_class == 0 || self.frames == 0 {
            return Err(invalid!(
                "clips per class and frames per clip must be positive"
            ));
        }
        if self.size < 8 {
            return Err(invalid!("frame size must be at least 8"));
        }
        Ok(())
    }
}

/// Per-clip random draws.
struct Jitter {
    cx: f64,
    cy: f64,
    amplitude: f64,
    radius: f64,
    phase: f64,
    face: f64,
    blob: f64,
}

fn clip_rng(seed: u64, clip: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (clip as u64 + 1).wrapping_mul(0xA076_1D64_78BD_642F))
}

/// Renders the frames of one clip of class `class`. `clip` selects the
/// jitter stream, so any clip can be regenerated on its own.
pub fn synth_clip(class: usize, clip: usize, cfg: &SynthConfig) -> Vec<RgbImage> {
    let mut rng = clip_rng(cfg.seed, clip);
    let s = cfg.size as f64 / 112.0;
    let j = Jitter {
        cx: 56.0 * s + rng.gen_range(-6.0..6.0) * s,
        cy: 56.0 * s + rng.gen_range(-6.0..6.0) * s,
        amplitude: rng.gen_range(14.0..22.0) * s,
        radius: rng.gen_range(6.0..9.0) * s,
        phase: rng.gen_range(-0.3..0.3),
        face: rng.gen_range(70.0..100.0),
        blob: rng.gen_range(200.0..245.0),
    };
    let (w, h) = (cfg.size, cfg.size);
    let (fx, fy) = (w as f64 / 2.0, h as f64 / 2.0);
    let (ax, ay) = (0.36 * w as f64, 0.46 * h as f64);
    let last = (cfg.frames.max(2) - 1) as f64;

    (0..cfg.frames)
        .map(|t| {
            let u = t as f64 / last;
            let swing = (2.0 * PI * u + j.phase).sin();
            let (mut bx, mut by, mut r, mut gain) = (j.cx, j.cy, j.radius, 1.0);
            match class {
                0 => by += j.amplitude * (0.5 - u),
                1 => bx += j.amplitude * 0.6 * swing,
                2 => r *= 0.6 + 1.2 * u,
                3 => by -= j.amplitude * (0.5 - u),
                4 => by += j.amplitude * 0.6 * swing,
                5 => r *= 1.8 - 1.2 * u,
                6 => {
                    bx -= j.amplitude * 0.7 * (0.5 - u);
                    by += j.amplitude * 0.7 * (0.5 - u);
                }
                _ => gain = 0.3 + 0.7 * (0.5 + 0.5 * swing),
            }
            let noise: Vec<f64> = (0..w * h).map(|_| rng.gen_range(-3.0..3.0)).collect();
            RgbImage::from_fn(w, h, |x, y| {
                let (xf, yf) = (x as f64, y as f64);
                let oval = ((xf - fx) / ax).powi(2) + ((yf - fy) / ay).powi(2);
                let base = if oval <= 1.0 { j.face } else { 18.0 };
                let d2 = (xf - bx).powi(2) + (yf - by).powi(2);
                let blob = gain * (-d2 / (2.0 * r * r)).exp();
                let v = base + (j.blob - base) * blob + noise[y * w + x];
                let v = v.round().clamp(0.0, 255.0) as u8;
                // Warm skin-like tint, distinct per channel.
                [v, (v as f64 * 0.85) as u8, (v as f64 * 0.7) as u8]
            })
        })
        .collect()
}

/// Writes `clips/<id>/NNN.ppm`, `manifest.csv` and `classes.txt` under
/// `out`, returning the manifest. Identical configs give identical bytes.
pub fn generate_synthetic_dataset(out: &Path, cfg: &SynthConfig) -> Result<Manifest> {
    cfg.validate()?;
    let classes: Vec<String> = PATTERNS[..cfg.classes]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut entries = Vec::with_capacity(cfg.classes * cfg.clips_per_class);
    for (class, name) in classes.iter().enumerate() {
        for k in 0..cfg.clips_per_class {
            let clip = class * cfg.clips_per_class + k;
            let id = format!("{name}_{k:03}");
            let rel = PathBuf::from("clips").join(&id);
            let dir = out.join(&rel);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            for (t, frame) in synth_clip(class, clip, cfg).iter().enumerate() {
                write_ppm(&dir.join(format!("{t:03}.ppm")), frame)?;
            }
            entries.push(ManifestEntry {
                id,
                frames_path: rel,
                label: classes[class].clone(),
            });
        }
    }
    let manifest = Manifest::new(entries, classes, out.to_path_buf())?;
    manifest.save(&out.join("manifest.csv"), &out.join("classes.txt"))?;
    Ok(manifest)
}
