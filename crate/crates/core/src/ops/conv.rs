//! Strided, zero-padded 2-D cross-correlation over `[N, C, H, W]` tensors.
//!
//! Lowered to a matrix product per sample (im2col). Products and sums are
//! accumulated in `f64`; results are stored as `f32`.

use rayon::prelude::*;

use crate::error::{invalid, shape_err, Result};
use crate::gemm::{gemm, Layout};
use crate::tensor::Tensor;

/// Square-kernel convolution parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvParams {
    /// `[out_channels, in_channels, k, k]`
    pub weights: Tensor,
    /// `[out_channels]`
    pub bias: Tensor,
    pub stride: usize,
    pub pad: usize,
}

/// Output extent along one spatial axis, `None` if the kernel does not fit.
pub fn conv_output_dim(n: usize, kernel: usize, stride: usize, pad: usize) -> Option<usize> {
    if stride == 0 || kernel == 0 || n + 2 * pad < kernel {
        return None;
    }
    Some((n + 2 * pad - kernel) / stride + 1)
}

#[derive(Clone, Copy)]
struct Geometry {
    in_ch: usize,
    h: usize,
    w: usize,
    out_ch: usize,
    k: usize,
    stride: usize,
    pad: usize,
    oh: usize,
    ow: usize,
}

impl Geometry {
    fn patch(&self) -> usize {
        self.in_ch * self.k * self.k
    }

    fn positions(&self) -> usize {
        self.oh * self.ow
    }
}

impl ConvParams {
    pub fn new(weights: Tensor, bias: Tensor, stride: usize, pad: usize) -> Result<Self> {
        let p = Self {
            weights,
            bias,
            stride,
            pad,
        };
        p.check()?;
        Ok(p)
    }

    pub fn out_channels(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn kernel(&self) -> usize {
        self.weights.shape()[2]
    }

    fn check(&self) -> Result<()> {
        let ws = self.weights.shape();
        if ws.len() != 4 {
            return Err(shape_err!("conv weights must be rank 4, got {ws:?}"));
        }
        if ws[2] != ws[3] {
            return Err(shape_err!(
                "conv kernel must be square, got {}x{}",
                ws[2],
                ws[3]
            ));
        }
        if self.bias.shape() != [ws[0]] {
            return Err(shape_err!(
                "conv bias shape {:?} does not match {} output channels",
                self.bias.shape(),
                ws[0]
            ));
        }
        if self.stride == 0 {
            return Err(invalid!("conv stride must be positive"));
        }
        Ok(())
    }

    fn geometry(&self, input: &Tensor) -> Result<(usize, Geometry)> {
        self.check()?;
        let (n, c, h, w) = input.dims4()?;
        let ws = self.weights.shape();
        if c != ws[1] {
            return Err(shape_err!(
                "conv input has {c} channels but weights {ws:?} expect {}",
                ws[1]
            ));
        }
        let k = ws[2];
        let (oh, ow) = match (
            conv_output_dim(h, k, self.stride, self.pad),
            conv_output_dim(w, k, self.stride, self.pad),
        ) {
            (Some(oh), Some(ow)) => (oh, ow),
            _ => {
                return Err(shape_err!(
                    "conv kernel {k}x{k} with pad {} does not fit input {h}x{w}",
                    self.pad
                ))
            }
        };
        Ok((
            n,
            Geometry {
                in_ch: c,
                h,
                w,
                out_ch: ws[0],
                k,
                stride: self.stride,
                pad: self.pad,
                oh,
                ow,
            },
        ))
    }
}

fn im2col(src: &[f32], g: &Geometry, cols: &mut [f64]) {
    let p = g.positions();
    for c in 0..g.in_ch {
        let plane = &src[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ky in 0..g.k {
            for kx in 0..g.k {
                let row = ((c * g.k + ky) * g.k + kx) * p;
                let dst = &mut cols[row..row + p];
                for oy in 0..g.oh {
                    let iy = (oy * g.stride + ky) as isize - g.pad as isize;
                    let line = &mut dst[oy * g.ow..(oy + 1) * g.ow];
                    if iy < 0 || iy >= g.h as isize {
                        line.fill(0.0);
                        continue;
                    }
                    let srow = &plane[iy as usize * g.w..(iy as usize + 1) * g.w];
                    for (ox, v) in line.iter_mut().enumerate() {
                        let ix = (ox * g.stride + kx) as isize - g.pad as isize;
                        *v = if ix < 0 || ix >= g.w as isize {
                            0.0
                        } else {
                            srow[ix as usize] as f64
                        };
                    }
                }
            }
        }
    }
}

fn col2im(cols: &[f64], g: &Geometry, dst: &mut [f64]) {
    let p = g.positions();
    for c in 0..g.in_ch {
        let plane = &mut dst[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ky in 0..g.k {
            for kx in 0..g.k {
                let row = ((c * g.k + ky) * g.k + kx) * p;
                let src = &cols[row..row + p];
                for oy in 0..g.oh {
                    let iy = (oy * g.stride + ky) as isize - g.pad as isize;
                    if iy < 0 || iy >= g.h as isize {
                        continue;
                    }
                    let drow = &mut plane[iy as usize * g.w..(iy as usize + 1) * g.w];
                    for ox in 0..g.ow {
                        let ix = (ox * g.stride + kx) as isize - g.pad as isize;
                        if ix >= 0 && ix < g.w as isize {
                            drow[ix as usize] += src[oy * g.ow + ox];
                        }
                    }
                }
            }
        }
    }
}

fn to_f64(t: &Tensor) -> Vec<f64> {
    t.data().iter().map(|&v| v as f64).collect()
}

/// Forward convolution: `[N, C, H, W] -> [N, out_ch, H', W']`.
pub fn conv2d_forward(input: &Tensor, params: &ConvParams) -> Result<Tensor> {
    let (n, g) = params.geometry(input)?;
    let weights = to_f64(&params.weights);
    let bias = params.bias.data();
    let out_len = g.out_ch * g.positions();
    let mut out = vec![0f32; n * out_len];
    out.par_chunks_mut(out_len)
        .enumerate()
        .for_each(|(s, dst)| {
            let mut cols = vec![0f64; g.patch() * g.positions()];
            im2col(input.sample(s), &g, &mut cols);
            let mut acc = vec![0f64; out_len];
            gemm(
                &weights,
                Layout::row_major(g.out_ch, g.patch()),
                &cols,
                Layout::row_major(g.patch(), g.positions()),
                0.0,
                &mut acc,
            );
            for (o, (d, a)) in dst
                .chunks_mut(g.positions())
                .zip(acc.chunks(g.positions()))
                .enumerate()
            {
                let b = bias[o] as f64;
                for (dv, av) in d.iter_mut().zip(a) {
                    *dv = (av + b) as f32;
                }
            }
        });
    Tensor::new(vec![n, g.out_ch, g.oh, g.ow], out)
}

/// Gradients of a convolution with respect to its input, weights and bias.
#[derive(Clone, Debug)]
pub struct ConvGrads {
    pub input: Tensor,
    pub weights: Tensor,
    pub bias: Tensor,
}

pub fn conv2d_backward(
    input: &Tensor,
    params: &ConvParams,
    grad_out: &Tensor,
) -> Result<ConvGrads> {
    let (n, g) = params.geometry(input)?;
    grad_out.ensure_shape(&[n, g.out_ch, g.oh, g.ow], "conv grad_out")?;
    let weights = to_f64(&params.weights);
    let patch = g.patch();
    let positions = g.positions();

    // Input gradient, independent per sample.
    let in_len = g.in_ch * g.h * g.w;
    let mut grad_in = vec![0f32; n * in_len];
    grad_in
        .par_chunks_mut(in_len)
        .enumerate()
        .for_each(|(s, dst)| {
            let dy: Vec<f64> = grad_out.sample(s).iter().map(|&v| v as f64).collect();
            let mut dcols = vec![0f64; patch * positions];
            gemm(
                &weights,
                Layout::transposed(patch, g.out_ch),
                &dy,
                Layout::row_major(g.out_ch, positions),
                0.0,
                &mut dcols,
            );
            let mut acc = vec![0f64; in_len];
            col2im(&dcols, &g, &mut acc);
            for (d, a) in dst.iter_mut().zip(&acc) {
                *d = *a as f32;
            }
        });

    // Weight and bias gradients, summed over samples in index order.
    let mut dw = vec![0f64; g.out_ch * patch];
    let mut db = vec![0f64; g.out_ch];
    let mut cols = vec![0f64; patch * positions];
    for s in 0..n {
        let dy: Vec<f64> = grad_out.sample(s).iter().map(|&v| v as f64).collect();
        im2col(input.sample(s), &g, &mut cols);
        gemm(
            &dy,
            Layout::row_major(g.out_ch, positions),
            &cols,
            Layout::transposed(positions, patch),
            1.0,
            &mut dw,
        );
        for (o, row) in dy.chunks(positions).enumerate() {
            db[o] += row.iter().sum::<f64>();
        }
    }

    Ok(ConvGrads {
        input: Tensor::new(input.shape().to_vec(), grad_in)?,
        weights: Tensor::new(
            params.weights.shape().to_vec(),
            dw.into_iter().map(|v| v as f32).collect(),
        )?,
        bias: Tensor::new(vec![g.out_ch], db.into_iter().map(|v| v as f32).collect())?,
    })
}
