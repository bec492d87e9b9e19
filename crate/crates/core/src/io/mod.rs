//! Manifests, run configuration, model files and report writers.

mod config;
mod manifest;
mod model_file;
pub mod reports;

pub use config::{HyperConfig, ProtocolSection, RunConfig};
pub use manifest::{
    load_manifest, parse_manifest, DatasetManifest, ManifestRecord, ManifestRules, MatedPair,
    Modality, MANIFEST_VERSION,
};
pub use model_file::{
    decode_model, encode_model, load_model, load_model_file, save_model, ModelFile, FORMAT_VERSION,
    MAGIC,
};
