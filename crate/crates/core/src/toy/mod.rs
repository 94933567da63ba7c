//! Desk-scale embodiment of the training mathematics: synthetic screens, an
//! autoregressive coordinate-token model with analytic gradients, the
//! MLE/IAML/reward-weighted loss family, the factorization identities, and
//! the equal-step training protocol.

pub mod identities;
pub mod loss;
pub mod model;
pub mod screens;
pub mod token;
pub mod train;

pub use identities::{verify_kl_decomposition, IdentityReport};
pub use loss::{loss_iaml, loss_mle, loss_weighted, TrainItem};
pub use model::{ModelConfig, ToyModel};
pub use screens::{gen_screens, SyntheticScreen};
pub use token::{decode_box, encode_box, CoordToken};
pub use train::{sweep, train, LossKind, TrainConfig, TrainOutcome};
