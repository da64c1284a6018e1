//! On-disk scene layout:
//!
//! ```text
//! out/manifest.json
//! out/scene_000000/image.png
//! out/scene_000000/mask_<S|MO|MP|Sema|C>.png   (requested kinds only)
//! out/scene_000000/annotations.json
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GeneratorConfig, PhaseTimes, SceneSource};
use crate::composer::SceneBundle;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneSize {
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectAnnotation {
    pub id: usize,
    #[serde(rename = "class")]
    pub class_label: String,
    /// `[x, y, w, h]` in pixels; present when boxes were requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bbox: Option<[u32; 4]>,
    pub mo_color: [u8; 3],
    pub occluded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotations {
    pub scene: SceneSize,
    pub objects: Vec<ObjectAnnotation>,
    pub counts: BTreeMap<String, usize>,
    pub config_digest: String,
}

impl Annotations {
    pub fn from_bundle(bundle: &SceneBundle, emit_boxes: bool, config_digest: &str) -> Self {
        let objects = bundle
            .registry
            .iter()
            .zip(&bundle.boxes)
            .enumerate()
            .map(|(id, (rec, b))| ObjectAnnotation {
                id,
                class_label: rec.class_label.clone(),
                bbox: emit_boxes.then_some([b.x, b.y, b.w, b.h]),
                mo_color: rec.mo_color,
                occluded: rec.occluded,
            })
            .collect();
        Annotations {
            scene: SceneSize {
                width: bundle.width(),
                height: bundle.height(),
            },
            objects,
            counts: bundle.counts.clone(),
            config_digest: config_digest.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("annotations serialize")
    }
}

pub fn scene_dir_name(index: u64) -> String {
    format!("scene_{index:06}")
}

/// Writes the scene image, every mask in the bundle and `annotations.json`
/// into `dir` (created if missing).
pub fn write_scene(dir: &Path, bundle: &SceneBundle, annotations: &Annotations) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let save = |name: String, img: &image::RgbImage| {
        let path = dir.join(name);
        img.save(&path).map_err(|e| Error::image(&path, e))
    };
    save("image.png".into(), &bundle.image)?;
    for (kind, mask) in &bundle.masks {
        save(format!("mask_{}.png", kind.code()), mask)?;
    }
    let path = dir.join("annotations.json");
    fs::write(&path, annotations.to_json()).map_err(|e| Error::io(&path, e))
}

/// Summary of an offline run, also written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub num_scenes: u64,
    pub config_digest: String,
    pub scenes: Vec<String>,
    pub config: GeneratorConfig,
}

impl Manifest {
    pub fn scene_paths(&self, root: &Path) -> Vec<PathBuf> {
        self.scenes.iter().map(|s| root.join(s)).collect()
    }
}

/// Generates `cfg.num_scenes` scenes into `cfg.output_dir` using
/// `cfg.jobs` worker threads.
pub fn generate_offline(cfg: &GeneratorConfig) -> Result<Manifest> {
    cfg.validate()?;
    let source = SceneSource::open(cfg)?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let digest = cfg.digest();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .expect("thread pool");
    pool.install(|| {
        (0..cfg.num_scenes)
            .into_par_iter()
            .try_for_each(|k| save_scene(&source, cfg, &digest, k).map(drop))
    })?;

    let manifest = Manifest {
        seed: cfg.seed,
        num_scenes: cfg.num_scenes,
        config_digest: digest,
        scenes: (0..cfg.num_scenes).map(scene_dir_name).collect(),
        config: cfg.clone(),
    };
    let path = out.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    log::info!("wrote {} scenes to {}", cfg.num_scenes, out.display());
    Ok(manifest)
}

pub(crate) fn save_scene(
    source: &SceneSource,
    cfg: &GeneratorConfig,
    digest: &str,
    k: u64,
) -> Result<PhaseTimes> {
    let (bundle, mut times) = source.scene(cfg, k)?;
    let start = Instant::now();
    let annotations = Annotations::from_bundle(&bundle, cfg.emit_boxes, digest);
    write_scene(
        &cfg.output_dir.join(scene_dir_name(k)),
        &bundle,
        &annotations,
    )
    .map_err(|e| Error::Scene {
        scene: k,
        source: Box::new(e),
    })?;
    times.save = start.elapsed();
    log::debug!("scene {k}: {:?}", times);
    Ok(times)
}
