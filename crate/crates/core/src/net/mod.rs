//! Siamese fully-convolutional relative pose regressor: layer kernels with
//! hand-written backward passes, Adam, and a training loop driven by the
//! projection loss.

mod adam;
mod config;
mod layers;
mod network;
pub mod persist;
mod tensor;
mod train;

pub use adam::{adam_step, AdamState, TrainConfig};
pub use config::{LayerSpec, NetworkConfig, Shape3, OUTPUT_DIM};
pub use layers::{
    apply_mask, conv_backward, conv_forward, dropout_mask, prelu_backward, prelu_forward, ConvGeom,
};
pub use network::{output_pose, Mode, Network, PRELU_INIT};
pub use tensor::Tensor4;
pub use train::{
    evaluate, history_rows, positioning_error, predict_pairs, read_history, train_loop,
    train_step, write_history, HistoryRow, TrainPair, TrainReport, HISTORY_HEADER,
};
