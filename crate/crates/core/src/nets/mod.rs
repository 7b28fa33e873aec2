//! Dense feedforward networks with periodic activations.

mod activation;
mod net;
mod optim;
mod train;

pub use activation::{activate, Activation};
pub use net::{glorot_init, glorot_uniform, DenseLayer, FeedforwardNet, LayerGradients, NetGradients, Tape};
pub use optim::{Optimizer, OptimizerKind, OptimizerSpec, OptimizerState};
pub use train::{train, train_net, Regressor, TrainConfig, TrainOutcome};
