//! Dense numeric engine: tensors, the layer kinds of the window classifier,
//! softmax cross-entropy, Adam and a bit-exact weight format.

mod adam;
mod gemm;
pub mod io;
mod layers;
mod loss;
mod network;
mod tensor;

pub use adam::{Adam, AdamConfig};
pub use layers::{BatchNorm, Conv1d, Dense, GlobalAvgPool, Layer, Relu, BN_EPSILON, BN_MOMENTUM};
pub use loss::{softmax_in_place, softmax_rows, sparse_xent_loss};
pub use network::Sequential;
pub use tensor::Tensor;
