//! Tabular dual value learning over quantized ego-centric observations.

mod model_io;
mod quantize;
mod table;
mod train;

pub use model_io::{load, parse_model, save, write_model, MODEL_HEADER};
pub use quantize::{quantize, ObsKey, QuantizerConfig, MAX_PERSON_SLOTS};
pub use table::ValueTable;
pub use train::{
    train, train_with, DualQ, EpisodeStats, ScenarioSource, SocialTarget, TrainConfig, TrainEvent, Update,
};
