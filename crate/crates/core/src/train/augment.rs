//! Offline augmentation: every training image expands into 28 variants,
//! 7 rotations x {raw, equalized} x {unflipped, mirrored}.

use crate::data::image::{flip_horizontal, hist_equalize, rotate_bilinear, RgbImage};

/// Rotation angles in degrees; 0 comes first so variant 0 is the input.
pub const ROTATIONS: [f64; 7] = [0.0, -45.0, -30.0, -15.0, 15.0, 30.0, 45.0];

pub const VARIANTS_PER_IMAGE: usize = ROTATIONS.len() * 4;

/// Which transforms produced a variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Variant {
    pub degrees: f64,
    pub equalized: bool,
    pub flipped: bool,
}

/// Variant `i` is rotation `i / 4`, equalized if bit 1 is set, flipped if
/// bit 0 is set.
pub fn variant(index: usize) -> Variant {
    Variant {
        degrees: ROTATIONS[index / 4],
        equalized: index & 2 != 0,
        flipped: index & 1 != 0,
    }
}

pub fn augment_expand(image: &RgbImage) -> Vec<RgbImage> {
    let mut out = Vec::with_capacity(VARIANTS_PER_IMAGE);
    for &deg in &ROTATIONS {
        let rotated = rotate_bilinear(image, deg);
        let equalized = hist_equalize(&rotated);
        for base in [rotated, equalized] {
            let flipped = flip_horizontal(&base);
            out.push(base);
            out.push(flipped);
        }
    }
    out
}
