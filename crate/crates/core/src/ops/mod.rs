//! Layer primitives with hand-written forward and backward passes.

mod activation;
mod batchnorm;
mod conv;
mod linear;
mod loss;
mod pool;

pub use activation::{relu_backward, relu_forward};
pub use batchnorm::{
    batchnorm2d_backward, batchnorm2d_forward, BatchNormCache, BatchNormOptions, Mode, RunningStats, BN_EPS,
    BN_MOMENTUM,
};
pub use conv::{conv2d_backward, conv2d_backward_with, conv2d_forward, conv_output_len, ConvGrads};
pub use linear::{linear_backward, linear_forward};
pub use loss::{softmax, softmax_cross_entropy};
pub use pool::{
    global_avg_pool_backward, global_avg_pool_forward, maxpool_backward, maxpool_forward, PoolWindow,
};
