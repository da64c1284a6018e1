//! Domain types shared by every stage of scene generation: mask kinds and
//! their transition rules, input samples, boxes and colors.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Background value in every mask raster.
pub const BACKGROUND: Rgb<u8> = Rgb([0, 0, 0]);
/// Foreground value of a `Single` mask.
pub const FOREGROUND: Rgb<u8> = Rgb([255, 255, 255]);

#[inline]
pub fn is_foreground(px: &Rgb<u8>) -> bool {
    px.0 != [0, 0, 0]
}

/// The five annotation mask kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MaskKind {
    /// Boolean object presence.
    #[serde(rename = "S")]
    Single,
    /// One color per object instance.
    #[serde(rename = "MO")]
    MultiObject,
    /// One color per object part, unique across all objects of a scene.
    #[serde(rename = "MP")]
    MultiPart,
    /// One color per semantic category, copied from the input masks.
    #[serde(rename = "Sema")]
    Semantic,
    /// One color per class label.
    #[serde(rename = "C")]
    Class,
}

pub type MaskSet = BTreeSet<MaskKind>;

impl MaskKind {
    pub const ALL: [MaskKind; 5] = [
        MaskKind::Single,
        MaskKind::MultiObject,
        MaskKind::MultiPart,
        MaskKind::Semantic,
        MaskKind::Class,
    ];

    pub fn code(self) -> &'static str {
        match self {
            MaskKind::Single => "S",
            MaskKind::MultiObject => "MO",
            MaskKind::MultiPart => "MP",
            MaskKind::Semantic => "Sema",
            MaskKind::Class => "C",
        }
    }

    pub fn is_input_kind(self) -> bool {
        matches!(
            self,
            MaskKind::Single | MaskKind::MultiPart | MaskKind::Semantic
        )
    }
}

impl fmt::Display for MaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for MaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MaskKind::ALL
            .into_iter()
            .find(|k| k.code().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown mask kind `{s}` (expected one of S, MO, MP, Sema, C)"))
    }
}

/// Output kinds producible from an input kind.
///
/// `Class` is dropped when the samples carry no class labels.
pub fn allowed_outputs(kind: MaskKind, has_class_labels: bool) -> Result<MaskSet> {
    use MaskKind::*;
    let row: &[MaskKind] = match kind {
        Single => &[Single, MultiObject, Class],
        MultiPart => &[Single, MultiObject, MultiPart, Class],
        Semantic => &[Single, MultiObject, Semantic, Class],
        MultiObject | Class => return Err(Error::InvalidInputKind { kind }),
    };
    Ok(row
        .iter()
        .copied()
        .filter(|k| has_class_labels || *k != Class)
        .collect())
}

/// Checks every requested output against [`allowed_outputs`].
pub fn check_outputs(input: MaskKind, outputs: &MaskSet, has_class_labels: bool) -> Result<()> {
    let allowed = allowed_outputs(input, true)?;
    for &output in outputs {
        if !allowed.contains(&output) {
            return Err(Error::TransitionNotAllowed { input, output });
        }
        if output == MaskKind::Class && !has_class_labels {
            return Err(Error::MissingClassLabels);
        }
    }
    Ok(())
}

/// One input image with the mask of the single object it shows.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSample {
    pub image: RgbImage,
    pub mask: RgbImage,
    pub class_label: String,
    pub input_kind: MaskKind,
}

impl ObjectSample {
    pub fn new(
        image: RgbImage,
        mask: RgbImage,
        class_label: impl Into<String>,
        input_kind: MaskKind,
    ) -> Result<Self> {
        if !input_kind.is_input_kind() {
            return Err(Error::InvalidInputKind { kind: input_kind });
        }
        if image.dimensions() != mask.dimensions() {
            return Err(Error::SizeMismatch {
                image_w: image.width(),
                image_h: image.height(),
                mask_w: mask.width(),
                mask_h: mask.height(),
            });
        }
        if !mask.pixels().any(is_foreground) {
            return Err(Error::EmptyMask);
        }
        Ok(ObjectSample {
            image,
            mask,
            class_label: class_label.into(),
            input_kind,
        })
    }

    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }

    pub fn has_class_label(&self) -> bool {
        !self.class_label.is_empty()
    }
}

/// Axis-aligned box in scene pixels, `x`/`y` from the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BoundingBox {
    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn fits_in(&self, width: u32, height: u32) -> bool {
        self.w > 0 && self.h > 0 && self.right() <= width && self.bottom() <= height
    }
}

/// Object or part color with channels in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Color {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Color {
    pub fn new(r: f64, g: f64, b: f64) -> Self {
        Color { r, g, b }
    }

    pub fn to_rgb8(self) -> Rgb<u8> {
        let q = |c: f64| (c.clamp(0.0, 1.0) * 255.0).round() as u8;
        Rgb([q(self.r), q(self.g), q(self.b)])
    }

    pub fn is_white(&self) -> bool {
        self.r == 1.0 && self.g == 1.0 && self.b == 1.0
    }

    pub fn is_black(&self) -> bool {
        self.r == 0.0 && self.g == 0.0 && self.b == 0.0
    }
}
