use std::path::PathBuf;

use thiserror::Error;

use crate::domain::MaskKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{kind} masks are not accepted as input (valid input kinds: S, MP, Sema)")]
    InvalidInputKind { kind: MaskKind },

    #[error("{output} mask cannot be derived from {input} input")]
    TransitionNotAllowed { input: MaskKind, output: MaskKind },

    #[error("class masks require a class label on every sample")]
    MissingClassLabels,

    #[error("samples in one scene must share an input kind, found {first} and {other}")]
    MixedInputKinds { first: MaskKind, other: MaskKind },

    #[error("image is {image_w}x{image_h} but mask is {mask_w}x{mask_h}")]
    SizeMismatch {
        image_w: u32,
        image_h: u32,
        mask_w: u32,
        mask_h: u32,
    },

    #[error("mask has no foreground pixels")]
    EmptyMask,

    #[error("{0}")]
    Config(#[from] ConfigError),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("rectangle {w}x{h} does not fit under height limit {limit}")]
    Unplaceable { w: u32, h: u32, limit: u32 },

    #[error("invalid sample pair {image} / {mask}: {reason}")]
    InvalidPair {
        image: PathBuf,
        mask: PathBuf,
        reason: String,
    },

    #[error("scene {scene}: {source}")]
    Scene {
        scene: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("cannot change `{0}` on a running stream")]
    FrozenField(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        Error::Image {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the filesystem or codecs rather than by
    /// configuration or input validation.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Image { .. } | Error::Json { .. } => true,
            Error::Scene { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

/// A parameter outside its admissible range. `field` is the CLI flag name.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("--{field} must be in {range}, got {value}")]
pub struct ConfigError {
    pub field: &'static str,
    pub range: &'static str,
    pub value: String,
}

impl ConfigError {
    pub fn new(field: &'static str, range: &'static str, value: impl ToString) -> Self {
        ConfigError {
            field,
            range,
            value: value.to_string(),
        }
    }
}
