//! A small tensor/layer library with hand-derived backward passes for the
//! layer set the classifier needs: 2-D convolution (stride 1, same/valid
//! padding), ReLU, batch normalization, 2x2 max pooling, spatial pyramid
//! pooling, dense, inverted dropout, softmax cross-entropy, and Adam.
//!
//! Everything runs in f32 or f64; analytic gradients are validated against
//! central finite differences (see [`gradcheck`]).

pub mod adam;
pub mod conv;
pub mod dense;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod spp;
pub mod tensor;

pub use adam::{AdamParams, AdamState};
pub use conv::{Conv2d, Padding};
pub use dense::Dense;
pub use gradcheck::{central_diff_gradient, max_relative_error};
pub use layers::{BatchNorm, Dropout, MaxPool2x2, Relu};
pub use loss::{softmax, softmax_cross_entropy, softmax_cross_entropy_batch};
pub use spp::Spp;
pub use tensor::{Scalar, Tensor};

use thiserror::Error;

/// Whether stochastic/statistics-bearing layers run in training or inference
/// behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("batch normalization requires a batch of at least 2 in train mode")]
    InvalidBatch,
    #[error("input spatial size {got} is below the minimum {min} for this layer")]
    InputTooSmall { got: usize, min: usize },
}
