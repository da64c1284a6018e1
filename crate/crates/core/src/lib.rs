//! Scene-composition augmentation.
//!
//! A handful of single-object image/mask pairs is turned into an unbounded
//! stream of multi-object scenes. Objects are packed with a
//! maximal-rectangles strip packer whose height limit steers the scene
//! aspect ratio and whose shrinked input sizes control object overlap.
//! Every scene carries synchronized annotations: boolean, per-object,
//! per-part, semantic and class masks, bounding boxes and per-class counts.

pub mod cli;
pub mod colors;
pub mod composer;
pub mod datagen;
pub mod domain;
pub mod error;
pub mod packing;
pub mod transform;

pub use composer::{compose, SceneBundle};
pub use datagen::{generate_offline, GeneratorConfig, SceneStream};
pub use domain::{allowed_outputs, MaskKind, MaskSet, ObjectSample};
pub use error::{ConfigError, Error, Result};
pub use transform::TransformConfig;
