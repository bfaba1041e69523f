//! Files: run configuration, datasets, network weights, manifests and CSV
//! exports. Every JSON document carries a `format_version` whose major
//! number must match [`FORMAT_MAJOR`].

mod config;
mod csv_out;
mod dataset;
mod files;
mod manifest;
mod weights;

pub use config::{DataSection, EvalSection, PpoSection, RepNetSection, RunConfig, Preset};
pub use csv_out::{fmt_f64, CsvTable};
pub use dataset::{generate_dataset, Dataset, DatasetOptions, DatasetRecord};
pub use files::{check_version, read_json, sha256_bytes, sha256_file, write_json, FORMAT_MAJOR, FORMAT_VERSION};
pub use manifest::{ArtifactRef, Manifest};
pub use weights::{MlpFile, PolicyFile, RepNetFile};

#[cfg(test)]
mod tests;
