use std::collections::VecDeque;

use rayon::prelude::*;

use super::{GeneratorConfig, SceneSource};
use crate::composer::SceneBundle;
use crate::error::{Error, Result};
use crate::transform::TransformConfig;

/// Pull-based scene sequence, scene-for-scene identical to offline output
/// for the same configuration.
///
/// Nothing is read from disk until the first pull. Configuration updates
/// take effect at the next scene boundary: any prefetched scenes are
/// discarded and recomputed with the new settings.
#[derive(Debug)]
pub struct SceneStream {
    cfg: GeneratorConfig,
    source: Option<SceneSource>,
    next: u64,
    limit: Option<u64>,
    buffer: VecDeque<SceneBundle>,
}

impl SceneStream {
    /// Unbounded stream.
    pub fn new(cfg: GeneratorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(SceneStream {
            cfg,
            source: None,
            next: 0,
            limit: None,
            buffer: VecDeque::new(),
        })
    }

    /// Stream that ends after `cfg.num_scenes` scenes.
    pub fn bounded(cfg: GeneratorConfig) -> Result<Self> {
        let limit = cfg.num_scenes;
        let mut s = SceneStream::new(cfg)?;
        s.limit = Some(limit);
        Ok(s)
    }

    /// Stream over an already opened source.
    pub fn with_source(cfg: GeneratorConfig, source: SceneSource) -> Result<Self> {
        let mut s = SceneStream::new(cfg)?;
        s.source = Some(source);
        Ok(s)
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.cfg
    }

    /// Index of the scene the next pull returns.
    pub fn position(&self) -> u64 {
        self.next
    }

    pub fn is_opened(&self) -> bool {
        self.source.is_some()
    }

    /// Replaces the transform parameters from the next scene on.
    pub fn update_transform(&mut self, transform: TransformConfig) -> Result<()> {
        let cfg = GeneratorConfig {
            transform,
            ..self.cfg.clone()
        };
        self.update(cfg)
    }

    /// Replaces the configuration from the next scene on. The seed, the
    /// inputs and the input kind are fixed for the life of the stream.
    pub fn update(&mut self, cfg: GeneratorConfig) -> Result<()> {
        if cfg.seed != self.cfg.seed {
            return Err(Error::FrozenField("seed"));
        }
        if cfg.input_dir != self.cfg.input_dir {
            return Err(Error::FrozenField("input_dir"));
        }
        if cfg.background_dir != self.cfg.background_dir {
            return Err(Error::FrozenField("background_dir"));
        }
        if cfg.input_kind != self.cfg.input_kind {
            return Err(Error::FrozenField("input_kind"));
        }
        cfg.validate()?;
        if cfg != self.cfg {
            self.buffer.clear();
            self.cfg = cfg;
        }
        Ok(())
    }

    fn refill(&mut self) -> Result<()> {
        if self.source.is_none() {
            self.source = Some(SceneSource::open(&self.cfg)?);
        }
        let source = self.source.as_ref().expect("opened above");
        let start = self.next + self.buffer.len() as u64;
        let mut end = start + self.cfg.prefetch.max(1) as u64;
        if let Some(limit) = self.limit {
            end = end.min(limit);
        }
        let cfg = &self.cfg;
        let scenes = (start..end)
            .into_par_iter()
            .map(|k| source.scene(cfg, k).map(|(b, _)| b))
            .collect::<Result<Vec<_>>>()?;
        self.buffer.extend(scenes);
        Ok(())
    }
}

impl Iterator for SceneStream {
    type Item = Result<SceneBundle>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.limit.is_some_and(|l| self.next >= l) {
            return None;
        }
        if self.buffer.is_empty() {
            if let Err(e) = self.refill() {
                return Some(Err(e));
            }
        }
        let bundle = self.buffer.pop_front()?;
        self.next += 1;
        Some(Ok(bundle))
    }
}
