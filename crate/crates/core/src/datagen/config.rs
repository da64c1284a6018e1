use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{allowed_outputs, MaskKind, MaskSet};
use crate::error::{ConfigError, Error, Result};
use crate::packing::Orientation;
use crate::transform::TransformConfig;

/// Everything that determines a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_per_scene: usize,
    pub num_scenes: u64,
    pub same_class_scene: bool,
    pub balance_classes: bool,
    pub input_kind: MaskKind,
    pub outputs: MaskSet,
    pub emit_boxes: bool,
    pub transform: TransformConfig,
    pub theta: Orientation,
    pub seed: u64,
    pub input_dir: PathBuf,
    pub background_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Worker threads for offline generation.
    pub jobs: usize,
    /// Scenes computed ahead of the consumer when streaming.
    pub prefetch: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_per_scene: 9,
            num_scenes: 250,
            same_class_scene: false,
            balance_classes: false,
            input_kind: MaskKind::Single,
            outputs: MaskSet::from([MaskKind::Single]),
            emit_boxes: false,
            transform: TransformConfig::default(),
            theta: Orientation::default(),
            seed: 0,
            input_dir: PathBuf::from("input"),
            background_dir: None,
            output_dir: PathBuf::from("out"),
            jobs: 1,
            prefetch: 0,
        }
    }
}

/// The subset of [`GeneratorConfig`] that influences scene content.
#[derive(Serialize)]
struct ContentView<'a> {
    n_per_scene: usize,
    same_class_scene: bool,
    balance_classes: bool,
    input_kind: MaskKind,
    outputs: &'a MaskSet,
    emit_boxes: bool,
    transform: &'a TransformConfig,
    theta: Orientation,
    seed: u64,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_scene == 0 {
            return Err(ConfigError::new("n-per-scene", "[1,inf)", 0).into());
        }
        if self.num_scenes == 0 {
            return Err(ConfigError::new("num-scenes", "[1,inf)", 0).into());
        }
        if self.jobs == 0 {
            return Err(ConfigError::new("jobs", "[1,inf)", 0).into());
        }
        self.transform.validate()?;
        if !self.input_kind.is_input_kind() {
            return Err(Error::InvalidInputKind {
                kind: self.input_kind,
            });
        }
        if self.outputs.is_empty() {
            return Err(ConfigError::new(
                "outputs",
                "a non-empty subset of S,MO,MP,Sema,C",
                "none",
            )
            .into());
        }
        let allowed = allowed_outputs(self.input_kind, true)?;
        if let Some(bad) = self.outputs.iter().find(|k| !allowed.contains(k)) {
            return Err(Error::TransitionNotAllowed {
                input: self.input_kind,
                output: *bad,
            });
        }
        Ok(())
    }

    /// Hex SHA-256 over the content-determining fields.
    pub fn digest(&self) -> String {
        let view = ContentView {
            n_per_scene: self.n_per_scene,
            same_class_scene: self.same_class_scene,
            balance_classes: self.balance_classes,
            input_kind: self.input_kind,
            outputs: &self.outputs,
            emit_boxes: self.emit_boxes,
            transform: &self.transform,
            theta: self.theta,
            seed: self.seed,
        };
        let json = serde_json::to_vec(&view).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

/// Seed of scene `index`, derived from the run seed alone so any scene can
/// be regenerated independently of the others.
pub fn scene_seed(seed: u64, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"scene");
    h.update(seed.to_le_bytes());
    h.update(index.to_le_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("8 bytes"))
}
