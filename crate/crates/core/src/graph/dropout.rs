use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::tensor::Tensor;

use super::Mode;

#[derive(Clone, Debug)]
pub struct DropoutOutput {
    pub output: Tensor,
    /// Per-element multiplier (0 or `1 / (1 - rate)`); train mode only.
    pub mask: Option<Vec<f32>>,
}

/// Inverted dropout. Eval mode is the identity; train mode keeps each
/// element with probability `1 - rate` and rescales survivors so the
/// expectation is unchanged. Masks are a pure function of `seed`.
pub fn dropout_forward(input: &Tensor, rate: f64, mode: Mode, seed: u64) -> Result<DropoutOutput> {
    if !(0.0..1.0).contains(&rate) {
        return Err(invalid!("dropout rate {rate} outside [0, 1)"));
    }
    if mode == Mode::Eval {
        return Ok(DropoutOutput {
            output: input.clone(),
            mask: None,
        });
    }
    let keep = 1.0 - rate;
    let scale = (1.0 / keep) as f32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask: Vec<f32> = (0..input.len())
        .map(|_| if rng.gen::<f64>() < keep { scale } else { 0.0 })
        .collect();
    let data = input.data().iter().zip(&mask).map(|(x, m)| x * m).collect();
    Ok(DropoutOutput {
        output: Tensor::new(input.shape().to_vec(), data)?,
        mask: Some(mask),
    })
}
