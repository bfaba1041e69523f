//! The representation network: a permutation-invariant encoder of
//! (measurement, outcome statistics) pairs, with either a generative decoder
//! or a scalar property predictor attached for training.

mod encoding;
mod network;
mod pca;
mod train;

pub use encoding::{EncodingScheme, MeasurementEncoding, MeasurementSpec, ENCODING_VERSION};
pub use network::{representation_distance, RepNet, RepNetConfig, RepNetMode, Representation};
pub use pca::pca_project;
pub use train::{evaluate_reconstruction, train_self_supervised, train_supervised, RepNetHyper, TrainingRecord, TrainingRun};
