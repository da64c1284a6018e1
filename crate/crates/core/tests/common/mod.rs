//! Synthetic input corpora for integration tests.
#![allow(dead_code)]

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sceneforge::domain::{is_foreground, MaskKind};
use sha2::{Digest, Sha256};

/// Category colors shared by every semantic-mask object.
pub const SEMANTIC_COLORS: [[u8; 3]; 2] = [[0, 180, 0], [160, 82, 45]];

/// Writes `count` objects per class under `root/<class>/{images,masks}`.
/// Objects are ellipses of 40..=110 px on a dark margin; multi-part masks
/// split them into angular sectors, semantic masks into core and rim.
pub fn write_corpus(root: &Path, kind: MaskKind, classes: &[(&str, usize)], seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &(class, count) in classes {
        let images = root.join(class).join("images");
        let masks = root.join(class).join("masks");
        fs::create_dir_all(&images).unwrap();
        fs::create_dir_all(&masks).unwrap();
        for i in 0..count {
            let (img, mask) = object(kind, &mut rng);
            img.save(images.join(format!("{i:03}.png"))).unwrap();
            mask.save(masks.join(format!("{i:03}.png"))).unwrap();
        }
    }
    root.to_path_buf()
}

pub fn object(kind: MaskKind, rng: &mut impl Rng) -> (RgbImage, RgbImage) {
    let (rx, ry) = (
        rng.random_range(20..=55) as f64,
        rng.random_range(20..=55) as f64,
    );
    let margin = rng.random_range(0..=12);
    let w = (2.0 * rx) as u32 + 2 * margin;
    let h = (2.0 * ry) as u32 + 2 * margin;
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let parts = rng.random_range(2..=5);
    let base = [
        rng.random_range(40..200u8),
        rng.random_range(80..220u8),
        rng.random_range(20..120u8),
    ];
    let part_colors: Vec<[u8; 3]> = (0..parts)
        .map(|p| [30 + 40 * p as u8, 200 - 30 * p as u8, 60 + 25 * p as u8])
        .collect();
    let image = RgbImage::from_fn(w, h, |x, y| {
        let t = ((x * 3 + y * 5) % 32) as u8;
        Rgb([
            base[0].saturating_add(t),
            base[1].saturating_sub(t),
            base[2].saturating_add(t / 2),
        ])
    });
    let mask = RgbImage::from_fn(w, h, |x, y| {
        let (dx, dy) = ((x as f64 + 0.5 - cx) / rx, (y as f64 + 0.5 - cy) / ry);
        let r2 = dx * dx + dy * dy;
        if r2 > 1.0 {
            return Rgb([0, 0, 0]);
        }
        match kind {
            MaskKind::MultiPart => {
                let a = dy.atan2(dx).rem_euclid(TAU);
                let p = ((a / TAU * parts as f64) as usize).min(parts - 1);
                Rgb(part_colors[p])
            }
            MaskKind::Semantic => Rgb(SEMANTIC_COLORS[usize::from(r2 > 0.35)]),
            _ => Rgb([255, 255, 255]),
        }
    });
    (image, mask)
}

pub fn write_backgrounds(root: &Path, count: usize, seed: u64) -> PathBuf {
    fs::create_dir_all(root).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let (w, h) = (rng.random_range(150..=700), rng.random_range(150..=700));
        let tint: u8 = rng.random_range(60..160);
        RgbImage::from_fn(w, h, |x, y| {
            Rgb([tint, ((x + y) % 200) as u8, (x * y % 97) as u8])
        })
        .save(root.join(format!("bg{i}.png")))
        .unwrap();
    }
    root.to_path_buf()
}

pub fn foreground_colors(img: &RgbImage) -> HashSet<[u8; 3]> {
    img.pixels()
        .filter(|p| is_foreground(p))
        .map(|p| p.0)
        .collect()
}

pub fn support(img: &RgbImage) -> Vec<bool> {
    img.pixels().map(is_foreground).collect()
}

pub fn pixel_digest(img: &RgbImage) -> String {
    let mut h = Sha256::new();
    h.update(img.width().to_le_bytes());
    h.update(img.height().to_le_bytes());
    h.update(img.as_raw());
    hex::encode(h.finalize())
}

pub fn load_rgb(path: &Path) -> RgbImage {
    image::open(path).unwrap().to_rgb8()
}

/// Every file under `root`, relative path and content hash, sorted.
pub fn tree_digest(root: &Path) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.push((rel, hex::encode(Sha256::digest(fs::read(&path).unwrap()))));
            }
        }
    }
    out.sort();
    out
}
