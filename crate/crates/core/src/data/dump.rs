//! Feature-map grids for visual inspection.

use std::fs;
use std::path::{Path, PathBuf};

use crate::data::ppm::encode_pgm;
use crate::error::{invalid, Error, Result};
use crate::graph::ForwardTrace;
use crate::tensor::Tensor;

/// An 8-bit grayscale grid image with one tile per channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileGrid {
    pub width: usize,
    pub height: usize,
    pub columns: usize,
    pub rows: usize,
    pub tiles: usize,
    pub pixels: Vec<u8>,
}

/// Min-max scales a tile to bytes; a constant tile becomes 128.
pub fn normalize_tile(values: &[f32]) -> Vec<u8> {
    let (lo, hi) = values
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = f64::from(hi) - f64::from(lo);
    values
        .iter()
        .map(|&v| {
            if range > 0.0 {
                ((f64::from(v) - f64::from(lo)) / range * 255.0).round() as u8
            } else {
                128
            }
        })
        .collect()
}

/// One grid per sample of a `[N, C, H, W]` or `[N, C]` activation. Tiles
/// fill a `ceil(sqrt(C))`-wide grid in row-major order; unused cells are
/// black.
pub fn feature_map_grids(activation: &Tensor) -> Result<Vec<TileGrid>> {
    let (n, c, h, w) = match *activation.shape() {
        [n, c, h, w] => (n, c, h, w),
        [n, c] => (n, c, 1, 1),
        _ => {
            return Err(invalid!(
                "cannot tile an activation of shape {:?}",
                activation.shape()
            ))
        }
    };
    let columns = (c as f64).sqrt().ceil() as usize;
    let rows = c.div_ceil(columns);
    let (gw, gh) = (columns * w, rows * h);
    Ok((0..n)
        .map(|s| {
            let sample = activation.sample(s);
            let mut pixels = vec![0u8; gw * gh];
            for ch in 0..c {
                let tile = normalize_tile(&sample[ch * h * w..(ch + 1) * h * w]);
                let (ox, oy) = ((ch % columns) * w, (ch / columns) * h);
                for y in 0..h {
                    let dst = (oy + y) * gw + ox;
                    pixels[dst..dst + w].copy_from_slice(&tile[y * w..(y + 1) * w]);
                }
            }
            TileGrid {
                width: gw,
                height: gh,
                columns,
                rows,
                tiles: c,
                pixels,
            }
        })
        .collect())
}

/// Writes `<node>_<sample>.pgm` grids for the output of `node`.
pub fn dump_feature_maps(trace: &ForwardTrace, node: &str, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let activation = trace
        .output(node)
        .ok_or_else(|| invalid!("node `{node}` is not in the forward trace"))?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for (s, grid) in feature_map_grids(activation)?.iter().enumerate() {
        let path = out_dir.join(format!("{node}_{s:03}.pgm"));
        fs::write(&path, encode_pgm(grid.width, grid.height, &grid.pixels))
            .map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
