use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("pairing error: {0}")]
    Pairing(String),

    #[error("feature-space mismatch: {0}")]
    FeatureSpace(String),

    #[error("identity `{0}` is not enrolled")]
    NotEnrolled(String),

    #[error("gallery is empty")]
    EmptyGallery,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },

    #[error("manifest: {0}")]
    ManifestContent(String),

    #[error("image {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("model file checksum mismatch")]
    Checksum,

    #[error("unsupported format version {found} (this build reads up to {supported})")]
    Version { found: u32, supported: u32 },

    #[error("model file is malformed: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short, stable category label used for CLI error reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Dimension(_)
            | Error::EmptyInput(_)
            | Error::Pairing(_)
            | Error::FeatureSpace(_)
            | Error::NotEnrolled(_)
            | Error::EmptyGallery => "input",
            Error::NonFinite(_) | Error::IllPosed(_) | Error::Numeric(_) => "numeric",
            Error::Config(_) => "config",
            Error::Manifest { .. } | Error::ManifestContent(_) => "manifest",
            Error::Image { .. } => "image",
            Error::Checksum | Error::Version { .. } | Error::Format(_) => "model-file",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
        }
    }

    /// Process exit status for this error class.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" => 3,
            "io" => 4,
            "manifest" | "image" | "csv" => 5,
            "model-file" => 6,
            "numeric" => 7,
            _ => 8,
        }
    }
}
