use crate::error::{shape_err, Result};
use crate::gemm::{gemm, Layout};
use crate::tensor::Tensor;

/// Fully connected layer parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineParams {
    /// `[out_features, in_features]`
    pub weights: Tensor,
    /// `[out_features]`
    pub bias: Tensor,
}

impl AffineParams {
    pub fn new(weights: Tensor, bias: Tensor) -> Result<Self> {
        let (out, _) = weights.dims2()?;
        if bias.shape() != [out] {
            return Err(shape_err!(
                "affine bias {:?} does not match {out} outputs",
                bias.shape()
            ));
        }
        Ok(Self { weights, bias })
    }

    fn dims(&self) -> Result<(usize, usize)> {
        self.weights.dims2()
    }
}

fn as_f64(data: &[f32]) -> Vec<f64> {
    data.iter().map(|&v| v as f64).collect()
}

fn input_dims(input: &Tensor, in_features: usize) -> Result<usize> {
    let n = input.batch();
    if input.rank() < 2 || input.sample_len() != in_features {
        return Err(shape_err!(
            "affine expects {in_features} features per sample, got shape {:?}",
            input.shape()
        ));
    }
    Ok(n)
}

/// `input * W^T + bias`; inputs of rank > 2 are flattened per sample.
pub fn affine_forward(input: &Tensor, params: &AffineParams) -> Result<Tensor> {
    let (out, inf) = params.dims()?;
    let n = input_dims(input, inf)?;
    let x = as_f64(input.data());
    let w = as_f64(params.weights.data());
    let mut acc: Vec<f64> = (0..n)
        .flat_map(|_| params.bias.data().iter().map(|&b| b as f64))
        .collect();
    gemm(
        &x,
        Layout::row_major(n, inf),
        &w,
        Layout::transposed(inf, out),
        1.0,
        &mut acc,
    );
    Tensor::new(vec![n, out], acc.into_iter().map(|v| v as f32).collect())
}

#[derive(Clone, Debug)]
pub struct AffineGrads {
    /// Same shape as the forward input (unflattened).
    pub input: Tensor,
    pub weights: Tensor,
    pub bias: Tensor,
}

pub fn affine_backward(
    input: &Tensor,
    params: &AffineParams,
    grad_out: &Tensor,
) -> Result<AffineGrads> {
    let (out, inf) = params.dims()?;
    let n = input_dims(input, inf)?;
    grad_out.ensure_shape(&[n, out], "affine grad_out")?;
    let x = as_f64(input.data());
    let w = as_f64(params.weights.data());
    let dy = as_f64(grad_out.data());

    let mut dx = vec![0f64; n * inf];
    gemm(
        &dy,
        Layout::row_major(n, out),
        &w,
        Layout::row_major(out, inf),
        0.0,
        &mut dx,
    );
    let mut dw = vec![0f64; out * inf];
    gemm(
        &dy,
        Layout::transposed(out, n),
        &x,
        Layout::row_major(n, inf),
        0.0,
        &mut dw,
    );
    let mut db = vec![0f64; out];
    for row in dy.chunks(out) {
        for (d, g) in db.iter_mut().zip(row) {
            *d += g;
        }
    }
    let narrow = |v: Vec<f64>| v.into_iter().map(|x| x as f32).collect::<Vec<_>>();
    Ok(AffineGrads {
        input: Tensor::new(input.shape().to_vec(), narrow(dx))?,
        weights: Tensor::new(vec![out, inf], narrow(dw))?,
        bias: Tensor::new(vec![out], narrow(db))?,
    })
}
