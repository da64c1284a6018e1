//! Rectangle layout for a scene.
//!
//! Objects are packed by their *shrinked* sizes with a maximal-rectangles
//! packer using Best Long Side Fit scoring. The bin has a fixed height (the
//! hard height limit derived from the orientation coefficient) and a width
//! that grows on demand. Real-size rectangles are then centered over their
//! shrinked slots, which is where controlled overlap comes from.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RectSize {
    pub w: u32,
    pub h: u32,
}

impl RectSize {
    pub fn new(w: u32, h: u32) -> Self {
        debug_assert!(w >= 1 && h >= 1, "empty rectangle {w}x{h}");
        RectSize { w, h }
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Rect { x, y, w, h }
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn size(&self) -> RectSize {
        RectSize {
            w: self.w,
            h: self.h,
        }
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x < other.right()
            && other.x < self.right()
            && self.y < other.bottom()
            && other.y < self.bottom()
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    pub fn intersection_area(&self, other: &Rect) -> u64 {
        let w = self
            .right()
            .min(other.right())
            .saturating_sub(self.x.max(other.x));
        let h = self
            .bottom()
            .min(other.bottom())
            .saturating_sub(self.y.max(other.y));
        w as u64 * h as u64
    }
}

/// Shrinkage ratio `s` in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Shrinkage(f64);

impl Shrinkage {
    pub fn new(s: f64) -> Result<Self, ConfigError> {
        if (0.0..1.0).contains(&s) {
            Ok(Shrinkage(s))
        } else {
            Err(ConfigError::new("shrinkage", "[0,1)", s))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Shrinkage {
    fn default() -> Self {
        Shrinkage(0.0)
    }
}

impl TryFrom<f64> for Shrinkage {
    type Error = ConfigError;
    fn try_from(s: f64) -> Result<Self, ConfigError> {
        Shrinkage::new(s)
    }
}

impl From<Shrinkage> for f64 {
    fn from(s: Shrinkage) -> f64 {
        s.0
    }
}

/// Orientation coefficient: the target scene width/height ratio, > 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Orientation(f64);

impl Orientation {
    pub fn new(theta: f64) -> Result<Self, ConfigError> {
        if theta > 0.0 && theta.is_finite() {
            Ok(Orientation(theta))
        } else {
            Err(ConfigError::new("theta", "(0,inf)", theta))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Orientation {
    fn default() -> Self {
        Orientation(1.2)
    }
}

impl TryFrom<f64> for Orientation {
    type Error = ConfigError;
    fn try_from(t: f64) -> Result<Self, ConfigError> {
        Orientation::new(t)
    }
}

impl From<Orientation> for f64 {
    fn from(t: Orientation) -> f64 {
        t.0
    }
}

/// One object's slot: the rectangle it was packed as, and where its
/// full-size raster goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub index: usize,
    pub shrinked: Rect,
    pub real: Rect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedLayout {
    pub scene_w: u32,
    pub scene_h: u32,
    pub placements: Vec<Placement>,
}

/// Reduces both sides of every rectangle by the factor `1 - s`, rounding
/// half up and keeping at least one pixel.
pub fn shrink(sizes: &[RectSize], s: Shrinkage) -> Vec<RectSize> {
    let keep = 1.0 - s.value();
    let scale = |d: u32| round_half_up_tolerant(keep * d as f64).max(1);
    sizes
        .iter()
        .map(|r| RectSize::new(scale(r.w), scale(r.h)))
        .collect()
}

/// Hard scene height limit:
/// `max(max original height, theta * sum(shrinked heights) / ceil(sqrt(n)))`,
/// rounded up to whole pixels.
pub fn height_limit(
    shrinked: &[RectSize],
    original: &[RectSize],
    theta: Orientation,
) -> Result<u32> {
    if shrinked.is_empty() || original.is_empty() {
        return Err(Error::EmptyInput(
            "height limit needs at least one rectangle",
        ));
    }
    assert_eq!(
        shrinked.len(),
        original.len(),
        "shrinked and original lists differ in length"
    );
    let max_h = original.iter().map(|r| r.h).max().unwrap_or(0);
    let sum: u64 = shrinked.iter().map(|r| r.h as u64).sum();
    let cols = ceil_sqrt(shrinked.len() as u64);
    let square_h = ceil_tolerant(theta.value() * sum as f64 / cols as f64);
    Ok(max_h.max(square_h))
}

fn ceil_sqrt(n: u64) -> u64 {
    let r = n.isqrt();
    if r * r == n {
        r
    } else {
        r + 1
    }
}

// Same tolerance as below: 0.7 * 5 is 3.4999999999999996 in binary.
fn round_half_up_tolerant(v: f64) -> u32 {
    let half = v.floor() + 0.5;
    if (v - half).abs() <= 1e-9 * v.abs().max(1.0) {
        half.ceil() as u32
    } else {
        v.round() as u32
    }
}

// theta is usually a short decimal like 1.2 whose binary form lands a hair
// above an integer product; treat values within 1e-9 relative of an integer
// as that integer.
fn ceil_tolerant(v: f64) -> u32 {
    let nearest = v.round();
    if (v - nearest).abs() <= 1e-9 * v.abs().max(1.0) {
        nearest as u32
    } else {
        v.ceil() as u32
    }
}

/// Packs `shrinked` rectangles (in order, without rotation) into a strip of
/// height `h_max`. Real rectangles in the returned layout equal the shrinked
/// ones; see [`realize`].
pub fn pack(shrinked: &[RectSize], h_max: u32) -> Result<PackedLayout> {
    let mut packer = StripPacker::new(h_max);
    let mut placements = Vec::with_capacity(shrinked.len());
    for (index, size) in shrinked.iter().enumerate() {
        let rect = packer.insert(*size)?;
        placements.push(Placement {
            index,
            shrinked: rect,
            real: rect,
        });
    }
    let scene_w = placements
        .iter()
        .map(|p| p.shrinked.right())
        .max()
        .unwrap_or(0);
    let scene_h = placements
        .iter()
        .map(|p| p.shrinked.bottom())
        .max()
        .unwrap_or(0);
    Ok(PackedLayout {
        scene_w,
        scene_h,
        placements,
    })
}

/// Centers each original-size rectangle on its shrinked slot. The scene is
/// extended to the union of all real rectangles and every coordinate is
/// shifted so that union starts at the origin.
pub fn realize(layout: &PackedLayout, original: &[RectSize]) -> PackedLayout {
    assert_eq!(
        layout.placements.len(),
        original.len(),
        "one original size per placement"
    );
    let centered: Vec<(i64, i64)> = layout
        .placements
        .iter()
        .zip(original)
        .map(|(p, o)| {
            let s = p.shrinked;
            let x = (2 * s.x as i64 + s.w as i64 - o.w as i64).div_euclid(2);
            let y = (2 * s.y as i64 + s.h as i64 - o.h as i64).div_euclid(2);
            (x, y)
        })
        .collect();

    let min_x = centered.iter().map(|c| c.0).min().unwrap_or(0).min(0);
    let min_y = centered.iter().map(|c| c.1).min().unwrap_or(0).min(0);
    let max_x = centered
        .iter()
        .zip(original)
        .map(|(c, o)| c.0 + o.w as i64)
        .max()
        .unwrap_or(0)
        .max(layout.scene_w as i64);
    let max_y = centered
        .iter()
        .zip(original)
        .map(|(c, o)| c.1 + o.h as i64)
        .max()
        .unwrap_or(0)
        .max(layout.scene_h as i64);

    let (dx, dy) = (-min_x, -min_y);
    let placements = layout
        .placements
        .iter()
        .zip(centered.iter().zip(original))
        .map(|(p, (c, o))| {
            let shift = |r: Rect| Rect::new(r.x + dx as u32, r.y + dy as u32, r.w, r.h);
            Placement {
                index: p.index,
                shrinked: shift(p.shrinked),
                real: Rect::new((c.0 + dx) as u32, (c.1 + dy) as u32, o.w, o.h),
            }
        })
        .collect();
    PackedLayout {
        scene_w: (max_x - min_x) as u32,
        scene_h: (max_y - min_y) as u32,
        placements,
    }
}

/// Sum of pairwise intersection areas of the real rectangles.
pub fn real_overlap_area(layout: &PackedLayout) -> u64 {
    let p = &layout.placements;
    let mut total = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            total += p[i].real.intersection_area(&p[j].real);
        }
    }
    total
}

/// Fraction of the shrinked scene area not covered by shrinked rectangles.
pub fn area_overhead(layout: &PackedLayout) -> f64 {
    let scene = layout.scene_w as u64 * layout.scene_h as u64;
    if scene == 0 {
        return 0.0;
    }
    let used: u64 = layout
        .placements
        .iter()
        .map(|p| p.shrinked.size().area())
        .sum();
    (scene - used) as f64 / scene as f64
}

/// Maximal-rectangles bin of fixed height whose width grows when a
/// rectangle fits nowhere.
#[derive(Debug, Clone)]
struct StripPacker {
    height: u32,
    width: u32,
    free: Vec<Rect>,
}

impl StripPacker {
    fn new(height: u32) -> Self {
        StripPacker {
            height,
            width: 0,
            free: Vec::new(),
        }
    }

    fn insert(&mut self, size: RectSize) -> Result<Rect> {
        if size.h > self.height {
            return Err(Error::Unplaceable {
                w: size.w,
                h: size.h,
                limit: self.height,
            });
        }
        let slot = match self.best_long_side_fit(size) {
            Some(i) => i,
            None => {
                self.grow(size);
                self.best_long_side_fit(size)
                    .expect("grown strip always has room")
            }
        };
        let f = self.free[slot];
        let placed = Rect::new(f.x, f.y, size.w, size.h);
        self.occupy(&placed);
        Ok(placed)
    }

    // Score = (longer leftover side, shorter leftover side); strict
    // comparison keeps the lowest free-rectangle index on ties.
    fn best_long_side_fit(&self, size: RectSize) -> Option<usize> {
        let mut best: Option<(usize, (u32, u32))> = None;
        for (i, f) in self.free.iter().enumerate() {
            if size.w > f.w || size.h > f.h {
                continue;
            }
            let (dw, dh) = (f.w - size.w, f.h - size.h);
            let score = (dw.max(dh), dw.min(dh));
            if best.is_none_or(|(_, b)| score < b) {
                best = Some((i, score));
            }
        }
        best.map(|(i, _)| i)
    }

    // Widen by the smallest amount that lets `size` fit against the right
    // edge, stretching every free rectangle that touches it.
    fn grow(&mut self, size: RectSize) {
        let width = self.width;
        let delta = self
            .free
            .iter()
            .filter(|f| f.right() == width && f.h >= size.h)
            .map(|f| size.w.saturating_sub(f.w))
            .fold(size.w, u32::min);
        for f in self.free.iter_mut().filter(|f| f.right() == width) {
            f.w += delta;
        }
        self.free.push(Rect::new(width, 0, delta, self.height));
        self.width += delta;
        self.prune();
    }

    fn occupy(&mut self, used: &Rect) {
        let mut next = Vec::with_capacity(self.free.len() + 4);
        for f in &self.free {
            if !f.intersects(used) {
                next.push(*f);
                continue;
            }
            if used.x > f.x {
                next.push(Rect::new(f.x, f.y, used.x - f.x, f.h));
            }
            if used.right() < f.right() {
                next.push(Rect::new(used.right(), f.y, f.right() - used.right(), f.h));
            }
            if used.y > f.y {
                next.push(Rect::new(f.x, f.y, f.w, used.y - f.y));
            }
            if used.bottom() < f.bottom() {
                next.push(Rect::new(
                    f.x,
                    used.bottom(),
                    f.w,
                    f.bottom() - used.bottom(),
                ));
            }
        }
        self.free = next;
        self.prune();
    }

    // Drops free rectangles contained in another; of two identical ones the
    // earlier survives.
    fn prune(&mut self) {
        let free = &self.free;
        let keep: Vec<bool> = (0..free.len())
            .map(|i| {
                !free.iter().enumerate().any(|(j, other)| {
                    j != i && other.contains(&free[i]) && (other != &free[i] || j < i)
                })
            })
            .collect();
        let mut k = keep.into_iter();
        self.free.retain(|_| k.next().unwrap_or(true));
    }
}
