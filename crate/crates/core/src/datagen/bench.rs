//! Scene generation timing, split into load / transform / save phases.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::output::save_scene;
use super::{GeneratorConfig, PhaseTimes, SceneSource};
use crate::domain::allowed_outputs;
use crate::error::{Error, Result};

/// Feature level of a benchmark run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    /// One output mask, no noise.
    #[serde(rename = "SA")]
    Simple,
    /// Adds noise and smoothing.
    #[serde(rename = "NA")]
    Noisy,
    /// Adds noise, smoothing, boxes and every producible mask kind.
    #[serde(rename = "NMA")]
    Full,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 3] = [FeatureSet::Simple, FeatureSet::Noisy, FeatureSet::Full];

    pub fn code(self) -> &'static str {
        match self {
            FeatureSet::Simple => "SA",
            FeatureSet::Noisy => "NA",
            FeatureSet::Full => "NMA",
        }
    }

    /// `base` with this feature level switched on.
    pub fn apply(self, base: &GeneratorConfig) -> GeneratorConfig {
        let mut cfg = base.clone();
        cfg.outputs = [crate::domain::MaskKind::Single].into();
        cfg.emit_boxes = false;
        cfg.transform.noise = 0.0;
        cfg.transform.smooth = 1;
        if self >= FeatureSet::Noisy {
            cfg.transform.noise = 100.0;
            cfg.transform.smooth = 5;
        }
        if self == FeatureSet::Full {
            cfg.emit_boxes = true;
            cfg.outputs = allowed_outputs(cfg.input_kind, true).expect("validated input kind");
        }
        cfg
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for FeatureSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureSet::ALL
            .into_iter()
            .find(|f| f.code().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown feature set `{s}` (expected SA, NA or NMA)"))
    }
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    /// Inputs, seed and base transform; `output_dir` is ignored.
    pub base: GeneratorConfig,
    pub object_counts: Vec<usize>,
    pub scenes_per_point: u64,
    pub features: Vec<FeatureSet>,
}

/// Mean phase times of one (n, variant, feature set) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    /// Input mask kind of the corpus.
    pub variant: String,
    pub features: FeatureSet,
    pub load_ms: f64,
    pub transform_ms: f64,
    pub save_ms: f64,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str = "n,variant,features,load_ms,transform_ms,save_ms";

    pub fn total_ms(&self) -> f64 {
        self.load_ms + self.transform_ms + self.save_ms
    }

    /// Time a streaming consumer would see: no save phase.
    pub fn streaming_ms(&self) -> f64 {
        self.load_ms + self.transform_ms
    }

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{:.3},{:.3},{:.3}",
            self.n, self.variant, self.features, self.load_ms, self.transform_ms, self.save_ms
        )
    }
}

/// Times every (n, feature set) point by generating scenes into a scratch
/// directory and averaging the per-scene phase times. Feature sets are
/// interleaved scene by scene so that drift in machine load hits all of
/// them alike, and all feature sets of one n share the seed, hence the same
/// object selection and layout.
pub fn benchmark(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    if spec.object_counts.is_empty() || spec.features.is_empty() || spec.scenes_per_point == 0 {
        return Err(Error::EmptyInput(
            "benchmark needs object counts, feature sets and scenes",
        ));
    }
    spec.base.validate()?;
    let source = SceneSource::open(&spec.base)?;
    let scratch = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;

    let mut rows = Vec::new();
    for &n in &spec.object_counts {
        let mut points = Vec::new();
        for &features in &spec.features {
            let mut cfg = features.apply(&spec.base);
            cfg.n_per_scene = n;
            cfg.num_scenes = spec.scenes_per_point;
            cfg.jobs = 1;
            cfg.output_dir = scratch.path().join(format!("n{n}_{features}"));
            cfg.validate()?;
            let digest = cfg.digest();
            // One untimed scene first so file caches and allocator are warm.
            save_scene(&source, &cfg, &digest, 0)?;
            points.push((features, cfg, digest, Vec::new()));
        }
        for k in 0..spec.scenes_per_point {
            for (_, cfg, digest, times) in &mut points {
                times.push(save_scene(&source, cfg, digest, k)?);
            }
        }
        for (features, cfg, _, times) in points {
            rows.push(mean_row(n, &cfg, features, &times));
            std::fs::remove_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
        }
    }
    Ok(rows)
}

fn mean_row(
    n: usize,
    cfg: &GeneratorConfig,
    features: FeatureSet,
    times: &[PhaseTimes],
) -> BenchRow {
    let mean = |f: fn(&PhaseTimes) -> Duration| {
        times.iter().map(|t| f(t).as_secs_f64() * 1e3).sum::<f64>() / times.len() as f64
    };
    BenchRow {
        n,
        variant: cfg.input_kind.code().to_string(),
        features,
        load_ms: mean(|t| t.load),
        transform_ms: mean(|t| t.transform),
        save_ms: mean(|t| t.save),
    }
}

/// Coefficient of determination of the least-squares line through the
/// points.
pub fn linear_fit_r2(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    if sxx == 0.0 {
        return 0.0;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    1.0 - ss_res / syy
}
