//! Training loops, negative sampling, same-tail mixup, SWA and checkpoints.

mod checkpoint;
mod config;
mod mixup;
mod negatives;
mod swa;
mod trainer;

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, Checkpoint,
    VERSION as CHECKPOINT_VERSION,
};
pub use config::{Method, TrainConfig, CONFIG_KEYS};
pub use mixup::{mix, plan_synthetic, synth_batch, MixedTriple, SynthPlan};
pub use negatives::{corrupt_tail, sample_negatives};
pub use swa::SwaAverager;
pub use trainer::{
    epoch_triples, train, train_with_observer, BatchStats, EpochRecord, RunReport, TrainObserver,
    TrainOutcome,
};
