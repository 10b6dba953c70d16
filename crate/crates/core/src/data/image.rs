//! 8-bit RGB images and the preprocessing kernels used by the pipeline.
//!
//! All kernels are pure. Resampled values are rounded half away from zero
//! and clamped to `[0, 255]`.

use crate::error::{shape_err, Result};
use crate::tensor::Tensor;

/// Interleaved 8-bit RGB raster, row-major, `width * height * 3` bytes.
#[derive(Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for RgbImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RgbImage({}x{})", self.width, self.height)
    }
}

fn quantize(v: f64) -> u8 {
    // `f64::round` rounds half away from zero.
    v.round().clamp(0.0, 255.0) as u8
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(shape_err!("image size {width}x{height} is empty"));
        }
        if pixels.len() != width * height * 3 {
            return Err(shape_err!(
                "{width}x{height} RGB image needs {} bytes, got {}",
                width * height * 3,
                pixels.len()
            ));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let pixels = rgb
            .iter()
            .copied()
            .cycle()
            .take(width * height * 3)
            .collect();
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Self {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Values of one channel in raster order.
    pub fn channel(&self, c: usize) -> impl Iterator<Item = u8> + '_ {
        self.pixels.iter().skip(c).step_by(3).copied()
    }

    /// Interleaved features in `[0, 1]` (bytes divided by 255).
    pub fn to_features(&self) -> Vec<f32> {
        self.pixels.iter().map(|&b| b as f32 / 255.0).collect()
    }

    /// Planar `[3, H, W]` values in `[0, 1]`, the network's input layout.
    pub fn to_planar(&self) -> Vec<f32> {
        let plane = self.width * self.height;
        let mut out = vec![0f32; plane * 3];
        for (i, px) in self.pixels.chunks_exact(3).enumerate() {
            for c in 0..3 {
                out[c * plane + i] = px[c] as f32 / 255.0;
            }
        }
        out
    }

    fn sample_clamped(&self, x: f64, y: f64, c: usize) -> f64 {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        let x = x.clamp(0.0, max_x);
        let y = y.clamp(0.0, max_y);
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let x0 = x0 as usize;
        let y0 = y0 as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let at = |xx: usize, yy: usize| self.pixels[(yy * self.width + xx) * 3 + c] as f64;
        let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
        let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

/// Stacks images into a `[N, 3, H, W]` batch.
pub fn images_to_batch(images: &[&RgbImage]) -> Result<Tensor> {
    let first = images
        .first()
        .ok_or_else(|| shape_err!("cannot build a batch from zero images"))?;
    let (w, h) = (first.width, first.height);
    let mut data = Vec::with_capacity(images.len() * 3 * w * h);
    for img in images {
        if (img.width, img.height) != (w, h) {
            return Err(shape_err!(
                "batch images differ in size: {w}x{h} vs {}x{}",
                img.width,
                img.height
            ));
        }
        data.extend(img.to_planar());
    }
    Tensor::new(vec![images.len(), 3, h, w], data)
}

/// Bilinear resize with pixel-center alignment and edge clamping.
pub fn resize_bilinear(image: &RgbImage, width: usize, height: usize) -> RgbImage {
    if (image.width, image.height) == (width, height) {
        return image.clone();
    }
    let sx = image.width as f64 / width as f64;
    let sy = image.height as f64 / height as f64;
    RgbImage::from_fn(width, height, |x, y| {
        let src_x = (x as f64 + 0.5) * sx - 0.5;
        let src_y = (y as f64 + 0.5) * sy - 0.5;
        [0, 1, 2].map(|c| quantize(image.sample_clamped(src_x, src_y, c)))
    })
}

/// Rotation about the image center by `degrees` (counter-clockwise as
/// displayed). Samples falling outside the source are black.
pub fn rotate_bilinear(image: &RgbImage, degrees: f64) -> RgbImage {
    if degrees == 0.0 {
        return image.clone();
    }
    let (sin, cos) = degrees.to_radians().sin_cos();
    let cx = (image.width as f64 - 1.0) / 2.0;
    let cy = (image.height as f64 - 1.0) / 2.0;
    let max_x = (image.width - 1) as f64;
    let max_y = (image.height - 1) as f64;
    RgbImage::from_fn(image.width, image.height, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        // Inverse map; with y pointing down a displayed CCW turn is
        // (dx, dy) -> (dx cos + dy sin, -dx sin + dy cos).
        let src_x = cx + dx * cos - dy * sin;
        let src_y = cy + dx * sin + dy * cos;
        const SLACK: f64 = 1e-9;
        if src_x < -SLACK || src_y < -SLACK || src_x > max_x + SLACK || src_y > max_y + SLACK {
            return [0, 0, 0];
        }
        [0, 1, 2].map(|c| quantize(image.sample_clamped(src_x, src_y, c)))
    })
}

pub fn flip_horizontal(image: &RgbImage) -> RgbImage {
    RgbImage::from_fn(image.width, image.height, |x, y| {
        image.pixel(image.width - 1 - x, y)
    })
}

/// Per-channel histogram equalization with the classic
/// `(cdf(v) - cdf_min) / (N - cdf_min)` remap. Constant channels are
/// returned unchanged.
pub fn hist_equalize(image: &RgbImage) -> RgbImage {
    let n = image.width * image.height;
    let mut out = image.pixels.clone();
    for c in 0..3 {
        let mut hist = [0usize; 256];
        for v in image.channel(c) {
            hist[v as usize] += 1;
        }
        let cdf_min = hist.iter().copied().find(|&h| h > 0).unwrap_or(0);
        if cdf_min == n {
            continue;
        }
        let mut lut = [0u8; 256];
        let mut cdf = 0;
        for (v, &h) in hist.iter().enumerate() {
            cdf += h;
            if h > 0 {
                lut[v] = quantize((cdf - cdf_min) as f64 / (n - cdf_min) as f64 * 255.0);
            }
        }
        for px in out.iter_mut().skip(c).step_by(3) {
            *px = lut[*px as usize];
        }
    }
    RgbImage {
        width: image.width,
        height: image.height,
        pixels: out,
    }
}
