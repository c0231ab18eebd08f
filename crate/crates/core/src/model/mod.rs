//! The tanh MLP whose hidden layer is gauged, plus data synthesis and I/O.

mod checkpoint;
mod dataset;
mod mlp;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use dataset::{make_blobs, Dataset};
pub use mlp::{
    apply_gauge, argmax, hidden_reps, train_mlp, train_mlp_with_history, verify_invariance,
    Activation, InvarianceReport, MlpModel, TrainHistory, BATCH_SIZE,
};
