//! Per-object preprocessing and scene-level photometric noise.
//!
//! Geometric operations act on image and mask together (bilinear for the
//! image, nearest neighbour for the mask so no label color is invented).
//! Photometric operations touch the composed scene image only.

use image::{Rgb, RgbImage};
use nalgebra::{SMatrix, SVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::{is_foreground, ObjectSample, BACKGROUND};
use crate::error::{ConfigError, Error, Result};
use crate::packing::Shrinkage;

/// Augmentation parameters. Defaults are the documented defaults of each
/// parameter; every one except rotation and flip is a no-op at its default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransformConfig {
    pub shrinkage: Shrinkage,
    /// Maximum absolute rotation angle in degrees, [0, 180].
    pub rotation: f64,
    /// Horizontal flip probability, [0, 1].
    pub flip_prob: f64,
    /// Per-pixel probability of white, [0, 1].
    pub salt: f64,
    /// Per-pixel probability of black, [0, 1].
    pub pepper: f64,
    /// Odd Gaussian kernel size; 1 disables smoothing.
    pub smooth: u32,
    /// Share of the object width added as padding before the perspective
    /// warp, [0, 3].
    pub perspective: f64,
    /// Variance of additive Gaussian noise, >= 0.
    pub noise: f64,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            shrinkage: Shrinkage::default(),
            rotation: 180.0,
            flip_prob: 0.5,
            salt: 0.0,
            pepper: 0.0,
            smooth: 1,
            perspective: 0.0,
            noise: 0.0,
        }
    }
}

impl TransformConfig {
    /// No geometric or photometric change at all.
    pub fn identity() -> Self {
        TransformConfig {
            rotation: 0.0,
            flip_prob: 0.0,
            ..TransformConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn unit(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ConfigError::new(field, "[0,1]", v))
            }
        }
        Shrinkage::new(self.shrinkage.value())?;
        if !(0.0..=180.0).contains(&self.rotation) {
            return Err(ConfigError::new("rotation", "[0,180]", self.rotation));
        }
        unit("flip-prob", self.flip_prob)?;
        unit("salt", self.salt)?;
        unit("pepper", self.pepper)?;
        if self.salt + self.pepper > 1.0 {
            return Err(ConfigError::new(
                "pepper",
                "[0,1-salt]",
                format!("{} (salt + pepper > 1)", self.pepper),
            ));
        }
        if self.smooth == 0 || self.smooth.is_multiple_of(2) {
            return Err(ConfigError::new("smooth", "{1,3,5,...}", self.smooth));
        }
        if !(0.0..=3.0).contains(&self.perspective) {
            return Err(ConfigError::new("perspective", "[0,3]", self.perspective));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(ConfigError::new("noise", "[0,inf)", self.noise));
        }
        Ok(())
    }

    pub fn has_photometric(&self) -> bool {
        self.salt > 0.0 || self.pepper > 0.0 || self.noise > 0.0 || self.smooth > 1
    }
}

/// Tight bounding box `(x, y, w, h)` of the foreground pixels of a mask.
pub fn foreground_bounds(mask: &RgbImage) -> Option<(u32, u32, u32, u32)> {
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
    let mut any = false;
    for (x, y, px) in mask.enumerate_pixels() {
        if is_foreground(px) {
            any = true;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
    }
    any.then(|| (x0, y0, x1 - x0 + 1, y1 - y0 + 1))
}

/// Crops image and mask to the tight box around the mask foreground.
pub fn crop_margins(sample: &ObjectSample) -> Result<ObjectSample> {
    let (x, y, w, h) = foreground_bounds(&sample.mask).ok_or(Error::EmptyMask)?;
    if (x, y, w, h) == (0, 0, sample.width(), sample.height()) {
        return Ok(sample.clone());
    }
    let crop = |img: &RgbImage| image::imageops::crop_imm(img, x, y, w, h).to_image();
    Ok(ObjectSample {
        image: crop(&sample.image),
        mask: crop(&sample.mask),
        class_label: sample.class_label.clone(),
        input_kind: sample.input_kind,
    })
}

/// Random flip, rotation and perspective warp applied identically to image
/// and mask, followed by a margin crop.
///
/// Random draws happen in a fixed order (flip, angle, then two corner
/// fractions when perspective is enabled) so a scene's stream of draws does
/// not depend on which operations end up active.
pub fn geometric<R: Rng + ?Sized>(
    sample: &ObjectSample,
    cfg: &TransformConfig,
    rng: &mut R,
) -> Result<ObjectSample> {
    let flip = rng.random::<f64>() < cfg.flip_prob;
    let angle = (2.0 * rng.random::<f64>() - 1.0) * cfg.rotation;

    let mut out = sample.clone();
    if flip {
        image::imageops::flip_horizontal_in_place(&mut out.image);
        image::imageops::flip_horizontal_in_place(&mut out.mask);
    }
    if angle != 0.0 {
        out = rotate(&out, angle);
    }
    if cfg.perspective > 0.0 {
        let corners = (rng.random::<f64>(), rng.random::<f64>());
        out = perspective(&out, cfg.perspective, corners);
    }
    // Nearest-neighbour resampling can miss a sub-pixel object entirely.
    if !out.mask.pixels().any(is_foreground) {
        return crop_margins(sample);
    }
    crop_margins(&out)
}

/// Rotates by `degrees` (counter-clockwise) onto a canvas large enough to
/// keep every pixel.
pub fn rotate(sample: &ObjectSample, degrees: f64) -> ObjectSample {
    let (w, h) = (sample.width() as f64, sample.height() as f64);
    let (sin, cos) = degrees.to_radians().sin_cos();
    let extent = |v: f64| ((v - 1e-9).ceil() as u32).max(1);
    let out_w = extent(w * cos.abs() + h * sin.abs());
    let out_h = extent(w * sin.abs() + h * cos.abs());
    let (cx, cy) = (out_w as f64 / 2.0, out_h as f64 / 2.0);
    warp(sample, out_w, out_h, |x, y| {
        let (dx, dy) = (x - cx, y - cy);
        (cos * dx - sin * dy + w / 2.0, sin * dx + cos * dy + h / 2.0)
    })
}

/// Pads the width by `share * w` and pulls both top corners inward by
/// `fraction * pad / 2`, a keystone-style projective warp.
pub fn perspective(sample: &ObjectSample, share: f64, fractions: (f64, f64)) -> ObjectSample {
    let (w, h) = (sample.width(), sample.height());
    let pad = (share * w as f64).round() as u32;
    if pad == 0 {
        return sample.clone();
    }
    let out_w = w + pad;
    let (wf, hf, half) = (out_w as f64, h as f64, pad as f64 / 2.0);
    let dst = [
        (fractions.0 * half, 0.0),
        (wf - fractions.1 * half, 0.0),
        (wf, hf),
        (0.0, hf),
    ];
    let src = [(0.0, 0.0), (wf, 0.0), (wf, hf), (0.0, hf)];
    let Some(to_src) = homography(&dst, &src) else {
        return sample.clone();
    };
    let offset = (pad / 2) as f64;
    warp(sample, out_w, h, |x, y| {
        let p = to_src * SVector::<f64, 3>::new(x, y, 1.0);
        (p[0] / p[2] - offset, p[1] / p[2])
    })
}

// Solves for the 3x3 projective map sending each `from` corner to its `to`.
fn homography(from: &[(f64, f64); 4], to: &[(f64, f64); 4]) -> Option<SMatrix<f64, 3, 3>> {
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    let mut b = SVector::<f64, 8>::zeros();
    for (i, (&(x, y), &(u, v))) in from.iter().zip(to).enumerate() {
        let r = 2 * i;
        a.row_mut(r)
            .copy_from_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]);
        a.row_mut(r + 1)
            .copy_from_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]);
        b[r] = u;
        b[r + 1] = v;
    }
    let h = a.lu().solve(&b)?;
    Some(SMatrix::<f64, 3, 3>::new(
        h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0,
    ))
}

// Inverse-maps every output pixel center through `to_src` (continuous
// source coordinates, pixel centers at +0.5).
fn warp(
    sample: &ObjectSample,
    out_w: u32,
    out_h: u32,
    to_src: impl Fn(f64, f64) -> (f64, f64),
) -> ObjectSample {
    let (sw, sh) = (sample.width() as i64, sample.height() as i64);
    let mut image = RgbImage::new(out_w, out_h);
    let mut mask = RgbImage::from_pixel(out_w, out_h, BACKGROUND);
    for y in 0..out_h {
        for x in 0..out_w {
            let (u, v) = to_src(x as f64 + 0.5, y as f64 + 0.5);
            let (sx, sy) = (u.floor() as i64, v.floor() as i64);
            if sx < 0 || sy < 0 || sx >= sw || sy >= sh {
                continue;
            }
            let m = *sample.mask.get_pixel(sx as u32, sy as u32);
            if is_foreground(&m) {
                mask.put_pixel(x, y, m);
                image.put_pixel(x, y, bilinear(&sample.image, u - 0.5, v - 0.5));
            }
        }
    }
    ObjectSample {
        image,
        mask,
        class_label: sample.class_label.clone(),
        input_kind: sample.input_kind,
    }
}

fn bilinear(img: &RgbImage, x: f64, y: f64) -> Rgb<u8> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let at = |xi: i64, yi: i64| {
        img.get_pixel(xi.clamp(0, w - 1) as u32, yi.clamp(0, h - 1) as u32)
            .0
    };
    let (xi, yi) = (x0 as i64, y0 as i64);
    let (p00, p10, p01, p11) = (
        at(xi, yi),
        at(xi + 1, yi),
        at(xi, yi + 1),
        at(xi + 1, yi + 1),
    );
    let mut out = [0u8; 3];
    for c in 0..3 {
        let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
        let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
        out[c] = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
    }
    Rgb(out)
}

/// Salt/pepper, additive Gaussian noise and Gaussian smoothing, in that
/// order. Only ever applied to scene images, never to masks.
pub fn photometric<R: Rng + ?Sized>(
    scene: &RgbImage,
    cfg: &TransformConfig,
    rng: &mut R,
) -> Result<RgbImage> {
    if cfg.salt + cfg.pepper > 1.0 {
        return Err(ConfigError::new("pepper", "[0,1-salt]", cfg.pepper).into());
    }
    let mut out = scene.clone();
    if cfg.salt > 0.0 || cfg.pepper > 0.0 {
        for px in out.pixels_mut() {
            let u: f64 = rng.random();
            if u < cfg.salt {
                *px = Rgb([255, 255, 255]);
            } else if u < cfg.salt + cfg.pepper {
                *px = Rgb([0, 0, 0]);
            }
        }
    }
    if cfg.noise > 0.0 {
        let normal = Normal::new(0.0, cfg.noise.sqrt())
            .map_err(|_| ConfigError::new("noise", "[0,inf)", cfg.noise))?;
        for px in out.pixels_mut() {
            for c in px.0.iter_mut() {
                let v = *c as f64 + normal.sample(rng);
                *c = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    if cfg.smooth > 1 {
        out = gaussian_blur(&out, cfg.smooth);
    }
    Ok(out)
}

/// Normalized 1-D Gaussian taps for an odd kernel size, with the sigma a
/// kernel of that size implies (`0.3 * ((k - 1) / 2 - 1) + 0.8`).
pub fn gaussian_kernel(size: u32) -> Vec<f64> {
    let sigma = 0.3 * ((size as f64 - 1.0) * 0.5 - 1.0) + 0.8;
    let r = (size / 2) as i64;
    let taps: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Separable Gaussian blur with replicated borders.
pub fn gaussian_blur(img: &RgbImage, size: u32) -> RgbImage {
    let kernel = gaussian_kernel(size);
    let r = (size / 2) as i64;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut tmp = vec![[0f64; 3]; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0f64; 3];
            for (k, t) in kernel.iter().enumerate() {
                let sx = (x + k as i64 - r).clamp(0, w - 1);
                let p = img.get_pixel(sx as u32, y as u32).0;
                for c in 0..3 {
                    acc[c] += t * p[c] as f64;
                }
            }
            tmp[(y * w + x) as usize] = acc;
        }
    }
    RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let mut acc = [0f64; 3];
        for (k, t) in kernel.iter().enumerate() {
            let sy = (y as i64 + k as i64 - r).clamp(0, h - 1);
            let p = tmp[(sy * w + x as i64) as usize];
            for c in 0..3 {
                acc[c] += t * p[c];
            }
        }
        Rgb(acc.map(|v| v.round().clamp(0.0, 255.0) as u8))
    })
}
