//! Differentiable primitives. Every backward pass is written by hand.

mod activation;
mod affine;
mod combine;
mod conv;
mod loss;

pub use activation::{relu, relu_backward};
pub use affine::{affine_backward, affine_forward, AffineGrads, AffineParams};
pub use combine::{channel_concat, channel_slice, elementwise_add};
pub use conv::{conv2d_backward, conv2d_forward, conv_output_dim, ConvGrads, ConvParams};
pub use loss::{softmax, softmax_cross_entropy};
