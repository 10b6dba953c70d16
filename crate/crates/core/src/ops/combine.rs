//! Shape-preserving merges: elementwise sum and channel concatenation.

use crate::error::{invalid, shape_err, Result};
use crate::tensor::Tensor;

pub fn elementwise_add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.shape() != b.shape() {
        return Err(shape_err!(
            "add needs equal shapes, got {:?} and {:?}",
            a.shape(),
            b.shape()
        ));
    }
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect();
    Tensor::new(a.shape().to_vec(), data)
}

/// Stacks `[N, c_i, H, W]` inputs along the channel axis in argument order.
pub fn channel_concat(inputs: &[&Tensor]) -> Result<Tensor> {
    let first = inputs
        .first()
        .ok_or_else(|| invalid!("concat needs at least one input"))?;
    let (n, _, h, w) = first.dims4()?;
    let mut channels = 0;
    for t in inputs {
        let (tn, tc, th, tw) = t.dims4()?;
        if (tn, th, tw) != (n, h, w) {
            return Err(shape_err!(
                "concat inputs disagree: {:?} vs {:?}",
                first.shape(),
                t.shape()
            ));
        }
        channels += tc;
    }
    let mut data = Vec::with_capacity(n * channels * h * w);
    for s in 0..n {
        for t in inputs {
            data.extend_from_slice(t.sample(s));
        }
    }
    Tensor::new(vec![n, channels, h, w], data)
}

/// Channels `[start, start + count)` of a `[N, C, H, W]` tensor.
pub fn channel_slice(input: &Tensor, start: usize, count: usize) -> Result<Tensor> {
    let (n, c, h, w) = input.dims4()?;
    if count == 0 || start + count > c {
        return Err(shape_err!(
            "channel range {start}..{} out of bounds for {c} channels",
            start + count
        ));
    }
    let plane = h * w;
    let mut data = Vec::with_capacity(n * count * plane);
    for s in 0..n {
        let sample = input.sample(s);
        data.extend_from_slice(&sample[start * plane..(start + count) * plane]);
    }
    Tensor::new(vec![n, count, h, w], data)
}
