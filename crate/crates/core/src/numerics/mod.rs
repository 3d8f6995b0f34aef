//! Dense real linear algebra and the elementary pieces of network training.

mod adam;
mod expm;
mod matrix;
mod nn;
mod skew;

pub use adam::{adam_step, AdamState};
pub use expm::{expm, expm_backward, expm_frechet, squaring_count};
pub use matrix::{axpy, dot, norm2, Matrix};
pub use nn::{dropout, dropout_mask, softmax, softmax_cross_entropy, Mode};
pub use skew::{skew, skew_grad, skew_len, SkewVector};
pub(crate) use skew::{skew_from_slice, skew_grad_accumulate};
