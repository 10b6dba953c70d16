//! Batch-statistics normalization with a learnable per-channel scale and
//! shift: `y = scale * (x - mean) / sqrt(var + eps) + shift`, where `mean`
//! and `var` (the mean squared deviation) are taken per channel over the
//! batch and spatial positions.

use crate::error::{invalid, shape_err, Result};
use crate::tensor::Tensor;

pub const NORM_EPS: f64 = 1e-5;

/// Which statistics normalize the input.
#[derive(Clone, Copy, Debug)]
pub enum NormStatistics<'a> {
    /// Training: statistics of the current batch.
    Batch,
    /// Inference: running estimates accumulated during training.
    Running { mean: &'a [f32], var: &'a [f32] },
}

/// Saved forward state needed by [`norm_backward`].
#[derive(Clone, Debug)]
pub struct NormCache {
    pub batch_mean: Vec<f64>,
    pub batch_var: Vec<f64>,
    x_hat: Vec<f64>,
    inv_std: Vec<f64>,
    shape: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct NormGrads {
    pub input: Tensor,
    pub scale: Tensor,
    pub shift: Tensor,
}

/// Per-channel batch mean and mean squared deviation of `[N, C, H, W]`.
pub fn batch_stats(input: &Tensor) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, c, h, w) = input.dims4()?;
    let plane = h * w;
    let count = (n * plane) as f64;
    let mut mean = vec![0f64; c];
    for s in 0..n {
        for (ch, m) in input.sample(s).chunks(plane).zip(mean.iter_mut()) {
            *m += ch.iter().map(|&v| v as f64).sum::<f64>();
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let mut var = vec![0f64; c];
    for s in 0..n {
        for ((ch, v), m) in input.sample(s).chunks(plane).zip(var.iter_mut()).zip(&mean) {
            *v += ch.iter().map(|&x| (x as f64 - m).powi(2)).sum::<f64>();
        }
    }
    var.iter_mut().for_each(|v| *v /= count);
    Ok((mean, var))
}

fn check_params(c: usize, scale: &Tensor, shift: &Tensor, eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(invalid!("norm eps must be positive, got {eps}"));
    }
    if scale.shape() != [c] || shift.shape() != [c] {
        return Err(shape_err!(
            "norm over {c} channels got scale {:?} and shift {:?}",
            scale.shape(),
            shift.shape()
        ));
    }
    Ok(())
}

/// Normalizes `[N, C, H, W]`; returns a cache only for batch statistics.
pub fn norm_forward(
    input: &Tensor,
    scale: &Tensor,
    shift: &Tensor,
    eps: f64,
    stats: NormStatistics<'_>,
) -> Result<(Tensor, Option<NormCache>)> {
    let (n, c, h, w) = input.dims4()?;
    check_params(c, scale, shift, eps)?;
    let (mean, var, keep) = match stats {
        NormStatistics::Batch => {
            let (m, v) = batch_stats(input)?;
            (m, v, true)
        }
        NormStatistics::Running { mean, var } => {
            if mean.len() != c || var.len() != c {
                return Err(shape_err!("running statistics do not cover {c} channels"));
            }
            (
                mean.iter().map(|&v| v as f64).collect(),
                var.iter().map(|&v| v as f64).collect(),
                false,
            )
        }
    };
    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
    let plane = h * w;
    let mut out = Vec::with_capacity(input.len());
    let mut x_hat = Vec::with_capacity(if keep { input.len() } else { 0 });
    for s in 0..n {
        for (ch, xs) in input.sample(s).chunks(plane).enumerate() {
            let (g, b) = (scale.data()[ch] as f64, shift.data()[ch] as f64);
            for &x in xs {
                let xh = (x as f64 - mean[ch]) * inv_std[ch];
                if keep {
                    x_hat.push(xh);
                }
                out.push((g * xh + b) as f32);
            }
        }
    }
    let cache = keep.then(|| NormCache {
        batch_mean: mean,
        batch_var: var,
        x_hat,
        inv_std,
        shape: input.shape().to_vec(),
    });
    Ok((Tensor::new(input.shape().to_vec(), out)?, cache))
}

pub fn norm_backward(cache: &NormCache, scale: &Tensor, grad_out: &Tensor) -> Result<NormGrads> {
    grad_out.ensure_shape(&cache.shape, "norm grad_out")?;
    let (n, c, h, w) = grad_out.dims4()?;
    let plane = h * w;
    let count = (n * plane) as f64;
    let mut sum_g = vec![0f64; c];
    let mut sum_gx = vec![0f64; c];
    for s in 0..n {
        for (ch, gs) in grad_out.sample(s).chunks(plane).enumerate() {
            let base = (s * c + ch) * plane;
            for (k, &g) in gs.iter().enumerate() {
                sum_g[ch] += g as f64;
                sum_gx[ch] += g as f64 * cache.x_hat[base + k];
            }
        }
    }
    let mut dx = Vec::with_capacity(grad_out.len());
    for s in 0..n {
        for (ch, gs) in grad_out.sample(s).chunks(plane).enumerate() {
            let base = (s * c + ch) * plane;
            let k = scale.data()[ch] as f64 * cache.inv_std[ch] / count;
            for (j, &g) in gs.iter().enumerate() {
                let xh = cache.x_hat[base + j];
                dx.push((k * (count * g as f64 - sum_g[ch] - xh * sum_gx[ch])) as f32);
            }
        }
    }
    Ok(NormGrads {
        input: Tensor::new(cache.shape.clone(), dx)?,
        scale: Tensor::new(vec![c], sum_gx.into_iter().map(|v| v as f32).collect())?,
        shift: Tensor::new(vec![c], sum_g.into_iter().map(|v| v as f32).collect())?,
    })
}
