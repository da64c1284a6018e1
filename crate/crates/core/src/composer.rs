//! Builds one scene: transform the selected objects, pack them, paste them
//! over a background and derive every requested annotation from a single
//! per-pixel ownership map.
//!
//! Overlaps are resolved by paste order: a later object owns a pixel over
//! an earlier one, in the scene image and in every mask alike.

use std::collections::{BTreeMap, HashMap};

use image::imageops::FilterType;
use image::{Rgb, RgbImage};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::colors::generate_colors;
use crate::domain::{
    check_outputs, is_foreground, BoundingBox, MaskKind, MaskSet, ObjectSample, BACKGROUND,
    FOREGROUND,
};
use crate::error::{Error, Result};
use crate::packing::{self, Orientation, PackedLayout, RectSize};
use crate::transform::{self, TransformConfig};

/// Annotation record of one placed object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub class_label: String,
    pub mo_color: [u8; 3],
    pub class_color: [u8; 3],
    /// Multi-part input: the scene colors of this object's parts.
    /// Semantic input: the category colors the object carries.
    pub part_colors: Vec<[u8; 3]>,
    /// No pixel of the object is visible in the final scene.
    pub occluded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneBundle {
    pub image: RgbImage,
    pub masks: BTreeMap<MaskKind, RgbImage>,
    /// One per object, in placement order.
    pub boxes: Vec<BoundingBox>,
    pub counts: BTreeMap<String, usize>,
    pub registry: Vec<ObjectRecord>,
    pub layout: PackedLayout,
}

impl SceneBundle {
    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }

    pub fn object_count(&self) -> usize {
        self.registry.len()
    }
}

const NO_OWNER: u32 = u32::MAX;

/// Who owns each scene pixel after pasting, and which input mask color
/// that pixel came from.
#[derive(Debug, Clone)]
pub struct OwnershipMap {
    pub width: u32,
    pub height: u32,
    pub input_kind: MaskKind,
    owner: Vec<u32>,
    source: Vec<[u8; 3]>,
}

impl OwnershipMap {
    fn new(width: u32, height: u32, input_kind: MaskKind) -> Self {
        let len = width as usize * height as usize;
        OwnershipMap {
            width,
            height,
            input_kind,
            owner: vec![NO_OWNER; len],
            source: vec![[0; 3]; len],
        }
    }

    pub fn owner(&self, x: u32, y: u32) -> Option<usize> {
        let o = self.owner[(y * self.width + x) as usize];
        (o != NO_OWNER).then_some(o as usize)
    }

    fn render(&self, mut paint: impl FnMut(usize, [u8; 3]) -> Rgb<u8>) -> RgbImage {
        let mut out = RgbImage::from_pixel(self.width, self.height, BACKGROUND);
        for (i, px) in out.pixels_mut().enumerate() {
            let o = self.owner[i];
            if o != NO_OWNER {
                *px = paint(o as usize, self.source[i]);
            }
        }
        out
    }

    /// Tight box of each object's visible pixels; `None` when occluded.
    fn visible_boxes(&self, objects: usize) -> Vec<Option<BoundingBox>> {
        let mut ext = vec![(u32::MAX, u32::MAX, 0u32, 0u32); objects];
        for (i, &o) in self.owner.iter().enumerate() {
            if o == NO_OWNER {
                continue;
            }
            let (x, y) = (i as u32 % self.width, i as u32 / self.width);
            let e = &mut ext[o as usize];
            e.0 = e.0.min(x);
            e.1 = e.1.min(y);
            e.2 = e.2.max(x + 1);
            e.3 = e.3.max(y + 1);
        }
        ext.into_iter()
            .map(|(x0, y0, x1, y1)| {
                (x0 != u32::MAX).then(|| BoundingBox {
                    x: x0,
                    y: y0,
                    w: x1 - x0,
                    h: y1 - y0,
                })
            })
            .collect()
    }
}

/// Scene colors assigned to objects, parts and classes.
#[derive(Debug, Clone)]
pub struct Palette {
    pub object: Vec<Rgb<u8>>,
    pub class_of: Vec<usize>,
    pub class: Vec<Rgb<u8>>,
    /// Per object: input part color -> scene part color.
    pub parts: Vec<HashMap<[u8; 3], Rgb<u8>>>,
}

/// Distinct foreground colors of a mask in ascending RGB order.
pub fn mask_palette(mask: &RgbImage) -> Vec<[u8; 3]> {
    let mut colors: Vec<[u8; 3]> = mask
        .pixels()
        .filter(|p| is_foreground(p))
        .map(|p| p.0)
        .collect();
    colors.sort_unstable();
    colors.dedup();
    colors
}

impl Palette {
    /// Colors are handed out in occurrence order: objects in placement
    /// order, parts in (object, ascending input color) order, classes by
    /// first appearance.
    pub fn build(objects: &[ObjectSample]) -> Result<Self> {
        let object = quantized(objects.len())?;

        let mut class_names: Vec<&str> = Vec::new();
        let class_of = objects
            .iter()
            .map(
                |o| match class_names.iter().position(|c| *c == o.class_label) {
                    Some(i) => i,
                    None => {
                        class_names.push(&o.class_label);
                        class_names.len() - 1
                    }
                },
            )
            .collect();
        let class = quantized(class_names.len().max(1))?;

        let palettes: Vec<Vec<[u8; 3]>> = objects.iter().map(|o| mask_palette(&o.mask)).collect();
        let total_parts: usize = palettes.iter().map(Vec::len).sum();
        let mut part_colors = quantized(total_parts.max(1))?.into_iter();
        let parts = palettes
            .iter()
            .map(|pal| {
                pal.iter()
                    .map(|c| (*c, part_colors.next().expect("one color per part")))
                    .collect()
            })
            .collect();

        Ok(Palette {
            object,
            class_of,
            class,
            parts,
        })
    }
}

fn quantized(n: usize) -> Result<Vec<Rgb<u8>>> {
    Ok(generate_colors(n)?
        .into_iter()
        .map(|c| c.to_rgb8())
        .collect())
}

/// Renders one mask kind from the ownership map.
pub fn derive_mask(kind: MaskKind, map: &OwnershipMap, palette: &Palette) -> Result<RgbImage> {
    check_outputs(map.input_kind, &MaskSet::from([kind]), true)?;
    let mask = match kind {
        MaskKind::Single => map.render(|_, _| FOREGROUND),
        MaskKind::MultiObject => map.render(|o, _| palette.object[o]),
        MaskKind::MultiPart => map.render(|o, src| palette.parts[o][&src]),
        MaskKind::Semantic => map.render(|_, src| Rgb(src)),
        MaskKind::Class => map.render(|o, _| palette.class[palette.class_of[o]]),
    };
    Ok(mask)
}

/// Fits a background to the scene: stretched (bilinear) when smaller in
/// either dimension, otherwise a uniformly random crop.
pub fn fit_background<R: Rng + ?Sized>(
    bg: &RgbImage,
    width: u32,
    height: u32,
    rng: &mut R,
) -> RgbImage {
    if bg.width() < width || bg.height() < height {
        return image::imageops::resize(bg, width, height, FilterType::Triangle);
    }
    let x = rng.random_range(0..=bg.width() - width);
    let y = rng.random_range(0..=bg.height() - height);
    if (x, y, width, height) == (0, 0, bg.width(), bg.height()) {
        return bg.clone();
    }
    image::imageops::crop_imm(bg, x, y, width, height).to_image()
}

/// Composes one scene from `samples`, which must share an input kind.
pub fn compose<R: Rng + ?Sized>(
    samples: &[ObjectSample],
    transform_cfg: &TransformConfig,
    theta: Orientation,
    background: Option<&RgbImage>,
    outputs: &MaskSet,
    rng: &mut R,
) -> Result<SceneBundle> {
    let first = samples
        .first()
        .ok_or(Error::EmptyInput("a scene needs at least one sample"))?;
    let input_kind = first.input_kind;
    if let Some(other) = samples.iter().find(|s| s.input_kind != input_kind) {
        return Err(Error::MixedInputKinds {
            first: input_kind,
            other: other.input_kind,
        });
    }
    let labelled = samples.iter().all(ObjectSample::has_class_label);
    check_outputs(input_kind, outputs, labelled)?;
    transform_cfg.validate()?;

    let objects = samples
        .iter()
        .map(|s| transform::geometric(&transform::crop_margins(s)?, transform_cfg, rng))
        .collect::<Result<Vec<_>>>()?;

    let original: Vec<RectSize> = objects
        .iter()
        .map(|o| RectSize::new(o.width(), o.height()))
        .collect();
    let shrinked = packing::shrink(&original, transform_cfg.shrinkage);
    let h_max = packing::height_limit(&shrinked, &original, theta)?;
    let layout = packing::realize(&packing::pack(&shrinked, h_max)?, &original);
    let (width, height) = (layout.scene_w, layout.scene_h);

    let mut image = match background {
        Some(bg) => fit_background(bg, width, height, rng),
        None => RgbImage::from_pixel(width, height, BACKGROUND),
    };
    let mut map = OwnershipMap::new(width, height, input_kind);
    for p in &layout.placements {
        let obj = &objects[p.index];
        for (x, y, m) in obj.mask.enumerate_pixels() {
            if !is_foreground(m) {
                continue;
            }
            let (sx, sy) = (p.real.x + x, p.real.y + y);
            image.put_pixel(sx, sy, *obj.image.get_pixel(x, y));
            let i = (sy * width + sx) as usize;
            map.owner[i] = p.index as u32;
            map.source[i] = m.0;
        }
    }

    if transform_cfg.has_photometric() {
        image = transform::photometric(&image, transform_cfg, rng)?;
    }

    let palette = Palette::build(&objects)?;
    let masks = outputs
        .iter()
        .map(|&k| Ok((k, derive_mask(k, &map, &palette)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;

    let visible = map.visible_boxes(objects.len());
    let boxes = layout
        .placements
        .iter()
        .map(|p| {
            visible[p.index].unwrap_or(BoundingBox {
                x: p.real.x,
                y: p.real.y,
                w: p.real.w,
                h: p.real.h,
            })
        })
        .collect();

    let mut counts = BTreeMap::new();
    for o in &objects {
        *counts.entry(o.class_label.clone()).or_insert(0) += 1;
    }

    let registry = objects
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let part_colors = match input_kind {
                MaskKind::MultiPart => mask_palette(&o.mask)
                    .iter()
                    .map(|c| palette.parts[i][c].0)
                    .collect(),
                MaskKind::Semantic => mask_palette(&o.mask),
                _ => Vec::new(),
            };
            ObjectRecord {
                class_label: o.class_label.clone(),
                mo_color: palette.object[i].0,
                class_color: palette.class[palette.class_of[i]].0,
                part_colors,
                occluded: visible[i].is_none(),
            }
        })
        .collect();

    Ok(SceneBundle {
        image,
        masks,
        boxes,
        counts,
        registry,
        layout,
    })
}
