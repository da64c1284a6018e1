//! Dataset-level generation: sample selection, offline writing, streaming,
//! the memory model and the timing benchmark.
//!
//! Scene `k` of a run is a pure function of the configuration, the catalog
//! and `k`: its RNG is seeded from [`scene_seed`], so offline and streaming
//! generation agree scene by scene and worker scheduling never matters.

mod bench;
mod catalog;
mod config;
mod memory;
mod output;
mod stream;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use image::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use bench::{benchmark, linear_fit_r2, BenchRow, BenchSpec, FeatureSet};
pub use catalog::{image_files, Catalog, CatalogEntry, CATALOG_FILE};
pub use config::{scene_seed, GeneratorConfig};
pub use memory::{estimate_memory, MemoryModelParams};
pub use output::{
    generate_offline, scene_dir_name, write_scene, Annotations, Manifest, ObjectAnnotation,
    SceneSize,
};
pub use stream::SceneStream;

use crate::composer::{compose, SceneBundle};
use crate::domain::ObjectSample;
use crate::error::{Error, Result};

/// Indices into `catalog` for one scene, drawn with replacement.
///
/// With `same_class_scene` one class is chosen uniformly and every draw
/// comes from it. With `balance_classes` each draw first picks a class
/// uniformly, then a member uniformly; otherwise members are drawn
/// uniformly from the whole catalog.
pub fn select_indices<R: Rng + ?Sized>(
    catalog: &Catalog,
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if catalog.is_empty() {
        return Err(Error::EmptyInput(
            "the input catalog has no image/mask pairs",
        ));
    }
    let classes = catalog.classes().len();
    let fixed_class = cfg.same_class_scene.then(|| rng.random_range(0..classes));
    let picks = (0..cfg.n_per_scene)
        .map(|_| {
            let class =
                fixed_class.or_else(|| cfg.balance_classes.then(|| rng.random_range(0..classes)));
            match class {
                Some(c) => {
                    let members = catalog.class_members(c);
                    members[rng.random_range(0..members.len())]
                }
                None => rng.random_range(0..catalog.len()),
            }
        })
        .collect();
    Ok(picks)
}

/// Draws and decodes the samples of one scene.
pub fn select_samples<R: Rng + ?Sized>(
    catalog: &Catalog,
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<Vec<ObjectSample>> {
    select_indices(catalog, cfg, rng)?
        .into_iter()
        .map(|i| catalog.load(i, cfg.input_kind))
        .collect()
}

/// Wall time spent in each stage of producing one scene.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    pub load: Duration,
    pub transform: Duration,
    pub save: Duration,
}

impl PhaseTimes {
    pub fn total(&self) -> Duration {
        self.load + self.transform + self.save
    }
}

/// Resolved inputs of a run, shared by the offline and streaming paths.
#[derive(Debug, Clone)]
pub struct SceneSource {
    catalog: Catalog,
    backgrounds: Vec<PathBuf>,
}

impl SceneSource {
    pub fn open(cfg: &GeneratorConfig) -> Result<Self> {
        let catalog = Catalog::scan(&cfg.input_dir)?;
        let backgrounds = match &cfg.background_dir {
            Some(dir) => {
                let files = image_files(dir)?;
                if files.is_empty() {
                    return Err(Error::EmptyInput("the background directory has no images"));
                }
                files
            }
            None => Vec::new(),
        };
        Ok(SceneSource {
            catalog,
            backgrounds,
        })
    }

    pub fn from_parts(catalog: Catalog, backgrounds: Vec<PathBuf>) -> Self {
        SceneSource {
            catalog,
            backgrounds,
        }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    /// Builds scene `index` of the run described by `cfg`.
    pub fn scene(&self, cfg: &GeneratorConfig, index: u64) -> Result<(SceneBundle, PhaseTimes)> {
        self.scene_inner(cfg, index).map_err(|e| Error::Scene {
            scene: index,
            source: Box::new(e),
        })
    }

    fn scene_inner(&self, cfg: &GeneratorConfig, index: u64) -> Result<(SceneBundle, PhaseTimes)> {
        let mut rng = ChaCha8Rng::seed_from_u64(scene_seed(cfg.seed, index));
        let mut times = PhaseTimes::default();

        let start = Instant::now();
        let samples = select_samples(&self.catalog, cfg, &mut rng)?;
        let background = if self.backgrounds.is_empty() {
            None
        } else {
            let path = &self.backgrounds[rng.random_range(0..self.backgrounds.len())];
            Some(load_rgb(path)?)
        };
        times.load = start.elapsed();

        let start = Instant::now();
        let bundle = compose(
            &samples,
            &cfg.transform,
            cfg.theta,
            background.as_ref(),
            &cfg.outputs,
            &mut rng,
        )?;
        times.transform = start.elapsed();
        Ok((bundle, times))
    }
}

fn load_rgb(path: &std::path::Path) -> Result<RgbImage> {
    Ok(image::open(path)
        .map_err(|e| Error::image(path, e))?
        .to_rgb8())
}
