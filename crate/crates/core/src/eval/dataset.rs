//! Dataset ingestion, flip augmentation, and stratified fold splits.

use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::gray::GrayImage;

use super::stream_rng;

/// Longest image side after ingestion resizing.
pub const MAX_SIDE: usize = 100;

/// Labeled grayscale samples plus the ordered class-name table.
#[derive(Debug, Clone)]
pub struct Dataset {
    samples: Vec<(GrayImage<f64>, usize)>,
    class_names: Vec<String>,
}

impl Dataset {
    pub fn new(samples: Vec<(GrayImage<f64>, usize)>, class_names: Vec<String>) -> Result<Self> {
        if samples
            .iter()
            .any(|(_, label)| *label >= class_names.len())
        {
            return Err(Error::Dataset("label outside the class-name table".into()));
        }
        Ok(Self {
            samples,
            class_names,
        })
    }

    pub fn samples(&self) -> &[(GrayImage<f64>, usize)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|(_, l)| *l).collect()
    }
}

/// Resizes so the longest side is at most [`MAX_SIDE`], preserving aspect.
pub fn ingest_resize(img: &GrayImage<f64>) -> Result<GrayImage<f64>> {
    let longest = img.width().max(img.height());
    if longest <= MAX_SIDE {
        return Ok(img.clone());
    }
    let f = MAX_SIDE as f64 / longest as f64;
    let w = ((img.width() as f64 * f).round() as usize).max(1);
    let h = ((img.height() as f64 * f).round() as usize).max(1);
    img.resample(w, h)
}

/// Decodes one 8-bit grayscale image at its native size (color converted
/// by luma).
pub fn load_image_raw(path: &Path) -> Result<GrayImage<f64>> {
    let decoded = image::open(path).map_err(|e| Error::ImageDecode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let luma = decoded.to_luma8();
    let (w, h) = luma.dimensions();
    Ok(GrayImage::from_fn(w as usize, h as usize, |x, y| {
        luma.get_pixel(x as u32, y as u32).0[0] as f64
    }))
}

/// Decodes one 8-bit grayscale image (color converted by luma) and applies
/// the ingestion resize.
pub fn load_image(path: &Path) -> Result<GrayImage<f64>> {
    ingest_resize(&load_image_raw(path)?)
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| {
            let e = e.to_ascii_lowercase();
            e == "png" || e == "pgm"
        })
        .unwrap_or(false)
}

/// Loads a `root/<class>/<image>.{png,pgm}` directory tree.
///
/// Classes and files are visited in lexicographic path order, so the sample
/// order is a pure function of the directory contents.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    let read_dir = |p: &Path| -> Result<Vec<std::path::PathBuf>> {
        let mut entries: Vec<_> = std::fs::read_dir(p)
            .map_err(|e| Error::Io {
                path: p.to_path_buf(),
                source: e,
            })?
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| Error::Io {
                path: p.to_path_buf(),
                source: e,
            })?
            .into_iter()
            .map(|e| e.path())
            .collect();
        entries.sort();
        Ok(entries)
    };

    let mut class_names = Vec::new();
    let mut samples = Vec::new();
    for class_dir in read_dir(root)? {
        if !class_dir.is_dir() {
            continue;
        }
        let class_name = class_dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::Dataset(format!("unreadable class name in {class_dir:?}")))?
            .to_string();
        let label = class_names.len();
        let mut count = 0usize;
        for file in read_dir(&class_dir)? {
            if !file.is_file() || !has_image_extension(&file) {
                continue;
            }
            samples.push((load_image(&file)?, label));
            count += 1;
        }
        if count == 0 {
            return Err(Error::Dataset(format!(
                "class directory {class_dir:?} contains no PNG/PGM images"
            )));
        }
        class_names.push(class_name);
    }
    if class_names.len() < 2 {
        return Err(Error::Dataset(format!(
            "{root:?} has {} class directories, need at least 2",
            class_names.len()
        )));
    }
    Dataset::new(samples, class_names)
}

/// Triples the dataset: each sample contributes the original plus its
/// horizontal and vertical flips, in that order.
pub fn augment_flips(train: &Dataset) -> Dataset {
    let mut samples = Vec::with_capacity(train.len() * 3);
    for (img, label) in train.samples() {
        samples.push((img.clone(), *label));
        samples.push((img.flip_horizontal(), *label));
        samples.push((img.flip_vertical(), *label));
    }
    Dataset {
        samples,
        class_names: train.class_names().to_vec(),
    }
}

pub(crate) const STREAM_KFOLD: u64 = 1 << 32;

/// Stratified k-fold split over a label sequence. Returns `(train, test)`
/// index pairs; per-class counts across folds differ by at most one.
pub fn stratified_kfold_indices(
    labels: &[usize],
    class_names: &[String],
    k: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(Error::Dataset(format!("{k} folds, need at least 2")));
    }
    let mut fold_members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (class, name) in class_names.iter().enumerate() {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == class)
            .map(|(i, _)| i)
            .collect();
        if idx.len() < k {
            return Err(Error::ClassSmallerThanFolds {
                class: name.clone(),
                count: idx.len(),
                folds: k,
            });
        }
        let mut rng = stream_rng(seed, STREAM_KFOLD + class as u64);
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            fold_members[pos % k].push(i);
        }
    }
    let splits = (0..k)
        .map(|f| {
            let mut test = fold_members[f].clone();
            test.sort_unstable();
            let mut train: Vec<usize> = fold_members
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, m)| m.iter().copied())
                .collect();
            train.sort_unstable();
            (train, test)
        })
        .collect();
    Ok(splits)
}

/// Stratified k-fold split of a dataset.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    stratified_kfold_indices(&ds.labels(), ds.class_names(), k, seed)
}
