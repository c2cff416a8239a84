//! Score functions, losses and gradients.

mod grad;
mod loss;
mod params;
mod score;

pub use grad::{batch_loss, batch_loss_and_grad, Dropout, Gradients, Operand, Query};
pub use loss::{bce_loss, LossConfig};
pub use params::{ModelKind, ModelParams};
pub use score::{dropout_mask, DropoutMasks, DropoutRates, Forward};
