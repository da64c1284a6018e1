//! `sceneforge` command line.
//!
//! Exit codes: 0 success, 1 configuration error, 2 I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use image::RgbImage;

use crate::datagen::{
    benchmark, estimate_memory, generate_offline, scene_dir_name, write_scene, Annotations,
    BenchRow, BenchSpec, FeatureSet, GeneratorConfig, MemoryModelParams, SceneSource,
};
use crate::domain::{MaskKind, MaskSet};
use crate::error::{Error, Result};
use crate::packing::{Orientation, Shrinkage};
use crate::transform::TransformConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_IO: i32 = 2;

pub const LOG_ENV: &str = "SCENEFORGE_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "sceneforge",
    version,
    about = "Compose multi-object training scenes from single-object image/mask pairs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a dataset of scenes to disk.
    Generate(GenerateArgs),
    /// Compose one scene and write it with a side-by-side contact sheet.
    Preview(GenerateArgs),
    /// Time scene generation per object count; prints CSV.
    Bench(BenchArgs),
    /// Print the estimated RAM per scene in bytes.
    EstimateMem(MemArgs),
}

fn default_transform() -> TransformConfig {
    TransformConfig::default()
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    /// Shrinkage ratio, [0,1).
    #[arg(long, default_value_t = default_transform().shrinkage.value())]
    pub shrinkage: f64,
    /// Maximum rotation angle in degrees, [0,180].
    #[arg(long, default_value_t = default_transform().rotation)]
    pub rotation: f64,
    /// Horizontal flip probability, [0,1].
    #[arg(long, default_value_t = default_transform().flip_prob)]
    pub flip_prob: f64,
    /// Per-pixel probability of white, [0,1].
    #[arg(long, default_value_t = default_transform().salt)]
    pub salt: f64,
    /// Per-pixel probability of black, [0,1].
    #[arg(long, default_value_t = default_transform().pepper)]
    pub pepper: f64,
    /// Gaussian kernel size, odd.
    #[arg(long, default_value_t = default_transform().smooth)]
    pub smooth: u32,
    /// Share of width added before the perspective warp, [0,3].
    #[arg(long, default_value_t = default_transform().perspective)]
    pub perspective: f64,
    /// Variance of Gaussian noise, >= 0.
    #[arg(long, default_value_t = default_transform().noise)]
    pub noise: f64,
    /// Target scene width/height ratio, > 0.
    #[arg(long, default_value_t = Orientation::default().value())]
    pub theta: f64,
}

impl TransformArgs {
    pub fn transform(&self) -> Result<TransformConfig> {
        let cfg = TransformConfig {
            shrinkage: Shrinkage::new(self.shrinkage)?,
            rotation: self.rotation,
            flip_prob: self.flip_prob,
            salt: self.salt,
            pepper: self.pepper,
            smooth: self.smooth,
            perspective: self.perspective,
            noise: self.noise,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input root: <class>/images/*.png with <class>/masks/*.png, or a catalog.json.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory of background images; scenes are black without it.
    #[arg(long)]
    pub backgrounds: Option<PathBuf>,
    /// Input mask kind: S, MP or Sema.
    #[arg(long, default_value = "S")]
    pub input_kind: MaskKind,
    #[arg(long, default_value_t = GeneratorConfig::default().n_per_scene)]
    pub n_per_scene: usize,
    /// Draw every object of a scene from one class.
    #[arg(long)]
    pub same_class: bool,
    /// Draw classes uniformly instead of samples.
    #[arg(long)]
    pub balance: bool,
    #[arg(long, default_value_t = GeneratorConfig::default().seed)]
    pub seed: u64,
    #[command(flatten)]
    pub transform: TransformArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output directory (preview: defaults to a temporary directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = GeneratorConfig::default().num_scenes)]
    pub num_scenes: u64,
    /// Comma-separated output masks: S,MO,MP,Sema,C.
    #[arg(long, value_delimiter = ',', default_value = "S")]
    pub outputs: Vec<MaskKind>,
    /// Include bounding boxes in annotations.
    #[arg(long)]
    pub boxes: bool,
    /// Worker threads.
    #[arg(long, default_value_t = GeneratorConfig::default().jobs)]
    pub jobs: usize,
}

impl GenerateArgs {
    pub fn config(&self) -> Result<GeneratorConfig> {
        let i = &self.input;
        let cfg = GeneratorConfig {
            n_per_scene: i.n_per_scene,
            num_scenes: self.num_scenes,
            same_class_scene: i.same_class,
            balance_classes: i.balance,
            input_kind: i.input_kind,
            outputs: self.outputs.iter().copied().collect::<MaskSet>(),
            emit_boxes: self.boxes,
            transform: i.transform.transform()?,
            theta: Orientation::new(i.transform.theta)?,
            seed: i.seed,
            input_dir: i.input.clone(),
            background_dir: i.backgrounds.clone(),
            output_dir: self
                .out
                .clone()
                .unwrap_or_else(|| GeneratorConfig::default().output_dir),
            jobs: self.jobs,
            prefetch: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Object counts to time.
    #[arg(long = "n", value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub counts: Vec<usize>,
    /// Scenes averaged per point.
    #[arg(long, default_value_t = 20)]
    pub scenes: u64,
    #[arg(long, value_delimiter = ',', default_value = "SA,NA,NMA")]
    pub features: Vec<FeatureSet>,
}

#[derive(Debug, Clone, Args)]
pub struct MemArgs {
    /// Objects per scene.
    #[arg(long, default_value_t = MemoryModelParams::default().n)]
    pub n: f64,
    /// Number of output masks, [0,5].
    #[arg(long, default_value_t = MemoryModelParams::default().masks)]
    pub masks: f64,
    #[arg(long, default_value_t = MemoryModelParams::default().pack_overhead)]
    pub pack_overhead: f64,
    #[arg(long, default_value_t = MemoryModelParams::default().aux_overhead)]
    pub aux_overhead: f64,
    /// Constant system overhead in bytes.
    #[arg(long, default_value_t = MemoryModelParams::default().overhead_const)]
    pub overhead_const: f64,
    #[arg(long, default_value_t = MemoryModelParams::default().mean_h)]
    pub mean_h: f64,
    #[arg(long, default_value_t = MemoryModelParams::default().mean_w)]
    pub mean_w: f64,
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let _ =
        env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).try_init();

    let mut stdout = std::io::stdout().lock();
    match execute(cli.command, &mut stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                EXIT_IO
            } else {
                EXIT_CONFIG
            }
        }
    }
}

/// Runs a parsed command, writing its report to `out`.
pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    let report = |out: &mut dyn Write, line: String| {
        writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
    };
    match command {
        Command::Generate(args) => {
            let cfg = args.config()?;
            let manifest = generate_offline(&cfg)?;
            report(
                out,
                format!(
                    "{} scenes written to {}",
                    manifest.num_scenes,
                    cfg.output_dir.display()
                ),
            )
        }
        Command::Preview(args) => {
            let mut cfg = args.config()?;
            cfg.num_scenes = 1;
            let dir = match &args.out {
                Some(d) => d.clone(),
                None => std::env::temp_dir().join(format!("sceneforge-preview-{}", cfg.seed)),
            };
            let source = SceneSource::open(&cfg)?;
            let (bundle, _) = source.scene(&cfg, 0)?;
            let scene_dir = dir.join(scene_dir_name(0));
            let annotations = Annotations::from_bundle(&bundle, cfg.emit_boxes, &cfg.digest());
            write_scene(&scene_dir, &bundle, &annotations)?;
            let mut panels = vec![&bundle.image];
            panels.extend(bundle.masks.values());
            let sheet_path = dir.join("contact_sheet.png");
            contact_sheet(&panels)
                .save(&sheet_path)
                .map_err(|e| Error::image(&sheet_path, e))?;
            report(out, sheet_path.display().to_string())
        }
        Command::Bench(args) => {
            let base = GenerateArgs {
                input: args.input.clone(),
                out: None,
                num_scenes: args.scenes,
                outputs: vec![MaskKind::Single],
                boxes: false,
                jobs: 1,
            }
            .config()?;
            let rows = benchmark(&BenchSpec {
                base,
                object_counts: args.counts.clone(),
                scenes_per_point: args.scenes,
                features: args.features.clone(),
            })?;
            report(out, BenchRow::CSV_HEADER.to_string())?;
            for row in rows {
                report(out, row.csv())?;
            }
            Ok(())
        }
        Command::EstimateMem(args) => {
            let bytes = estimate_memory(&MemoryModelParams {
                n: args.n,
                masks: args.masks,
                pack_overhead: args.pack_overhead,
                aux_overhead: args.aux_overhead,
                overhead_const: args.overhead_const,
                mean_h: args.mean_h,
                mean_w: args.mean_w,
            })?;
            report(out, format!("{bytes}"))
        }
    }
}

const SHEET_GAP: u32 = 4;

/// Panels left to right on a black strip, top-aligned.
pub fn contact_sheet(panels: &[&RgbImage]) -> RgbImage {
    let width = panels.iter().map(|p| p.width()).sum::<u32>()
        + SHEET_GAP * panels.len().saturating_sub(1) as u32;
    let height = panels.iter().map(|p| p.height()).max().unwrap_or(0);
    let mut sheet = RgbImage::new(width.max(1), height.max(1));
    let mut x = 0;
    for p in panels {
        image::imageops::replace(&mut sheet, *p, x as i64, 0);
        x += p.width() + SHEET_GAP;
    }
    sheet
}
