//! Input discovery.
//!
//! Default layout: `<input>/<class>/images/<stem>.png` paired with
//! `<input>/<class>/masks/<stem>.png`. A `catalog.json` at the input root
//! (a list of `{"image", "mask", "class"}` entries with paths relative to
//! the root) replaces directory scanning.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{MaskKind, ObjectSample};
use crate::error::{Error, Result};

pub const CATALOG_FILE: &str = "catalog.json";

const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg"];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub image: PathBuf,
    pub mask: PathBuf,
    #[serde(rename = "class")]
    pub class_label: String,
}

/// All input pairs, sorted by path, with a per-class index.
#[derive(Debug, Clone)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
    classes: Vec<String>,
    by_class: Vec<Vec<usize>>,
}

impl Catalog {
    pub fn from_entries(mut entries: Vec<CatalogEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput(
                "the input catalog has no image/mask pairs",
            ));
        }
        entries.sort();
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            groups.entry(&e.class_label).or_default().push(i);
        }
        let classes = groups.keys().map(|c| c.to_string()).collect();
        let by_class = groups.into_values().collect();
        Ok(Catalog {
            entries,
            classes,
            by_class,
        })
    }

    /// Reads `catalog.json` if present, otherwise scans the class folders.
    pub fn scan(root: &Path) -> Result<Self> {
        let manifest = root.join(CATALOG_FILE);
        if manifest.is_file() {
            let text = fs::read_to_string(&manifest).map_err(|e| Error::io(&manifest, e))?;
            let entries: Vec<CatalogEntry> =
                serde_json::from_str(&text).map_err(|source| Error::Json {
                    path: manifest.clone(),
                    source,
                })?;
            let entries = entries
                .into_iter()
                .map(|e| CatalogEntry {
                    image: root.join(e.image),
                    mask: root.join(e.mask),
                    class_label: e.class_label,
                })
                .collect();
            return Catalog::from_entries(entries);
        }

        let mut entries = Vec::new();
        for class_dir in sorted_dir(root)? {
            if !class_dir.is_dir() {
                continue;
            }
            let images = class_dir.join("images");
            let masks = class_dir.join("masks");
            if !images.is_dir() {
                continue;
            }
            let class_label = class_dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            for image in image_files(&images)? {
                let mask = find_mask(&masks, &image).ok_or_else(|| Error::InvalidPair {
                    image: image.clone(),
                    mask: masks.join(image.file_name().unwrap_or_default()),
                    reason: "no mask with the same file stem".into(),
                })?;
                entries.push(CatalogEntry {
                    image,
                    mask,
                    class_label: class_label.clone(),
                });
            }
        }
        Catalog::from_entries(entries)
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Entry indices of the `class`-th class.
    pub fn class_members(&self, class: usize) -> &[usize] {
        &self.by_class[class]
    }

    pub fn class_index_of(&self, entry: usize) -> usize {
        let label = &self.entries[entry].class_label;
        self.classes
            .binary_search(label)
            .expect("every entry's class is indexed")
    }

    /// Decodes one pair. Decode and validation failures name both files.
    pub fn load(&self, index: usize, kind: MaskKind) -> Result<ObjectSample> {
        let e = &self.entries[index];
        let invalid = |reason: String| Error::InvalidPair {
            image: e.image.clone(),
            mask: e.mask.clone(),
            reason,
        };
        let image = image::open(&e.image)
            .map_err(|err| invalid(err.to_string()))?
            .to_rgb8();
        let mask = image::open(&e.mask)
            .map_err(|err| invalid(err.to_string()))?
            .to_rgb8();
        ObjectSample::new(image, mask, e.class_label.clone(), kind)
            .map_err(|err| invalid(err.to_string()))
    }
}

fn sorted_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<Vec<_>>>()?;
    paths.sort();
    Ok(paths)
}

/// Image files (by extension) directly inside `dir`, sorted.
pub fn image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    Ok(sorted_dir(dir)?
        .into_iter()
        .filter(|p| p.is_file() && has_image_extension(p))
        .collect())
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn find_mask(masks: &Path, image: &Path) -> Option<PathBuf> {
    let stem = image.file_stem()?;
    IMAGE_EXTENSIONS
        .iter()
        .map(|ext| masks.join(stem).with_extension(ext))
        .find(|p| p.is_file())
}
