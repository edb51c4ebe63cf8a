//! On-disk dataset layout:
//!
//! ```text
//! <root>/<image_id>/annotations/*.pgm
//! <root>/<image_id>/predictions/<model>/*.pgm
//! <root>/<image_id>/probmaps/<model>/*.pgm      (optional, 16-bit)
//! <root>/<image_id>/truth/truth.pgm             (synthetic data only)
//! ```
//!
//! Image directories are the unit of pairing. Files inside a mask directory
//! are taken in byte-wise lexicographic order of their names.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::entropy::ProbMap;
use crate::error::{Error, Result};
use crate::mask::SampleSet;

use super::pgm::{read_mask_with_threshold, read_probmap};

pub const ANNOTATIONS_DIR: &str = "annotations";
pub const PREDICTIONS_DIR: &str = "predictions";
pub const PROBMAPS_DIR: &str = "probmaps";
pub const TRUTH_DIR: &str = "truth";

#[derive(Debug, Clone)]
pub struct DatasetLayout {
    root: PathBuf,
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<(String, PathBuf, bool)>> {
    let mut entries = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') {
            continue;
        }
        let is_dir = entry
            .file_type()
            .map_err(|e| Error::io(entry.path(), e))?
            .is_dir();
        entries.push((name, entry.path(), is_dir));
    }
    entries.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
    Ok(entries)
}

fn pgm_files(dir: &Path) -> Result<Vec<PathBuf>> {
    Ok(read_dir_sorted(dir)?
        .into_iter()
        .filter(|(name, _, is_dir)| !is_dir && name.to_ascii_lowercase().ends_with(".pgm"))
        .map(|(_, path, _)| path)
        .collect())
}

/// Masks of every `.pgm` file in `dir`, in file name order.
pub fn load_sample_set(dir: &Path, threshold: u8) -> Result<SampleSet> {
    if !dir.is_dir() {
        return Err(Error::Layout(format!(
            "missing directory {}",
            dir.display()
        )));
    }
    let files = pgm_files(dir)?;
    if files.is_empty() {
        return Err(Error::Layout(format!("no .pgm masks in {}", dir.display())));
    }
    let masks = files
        .iter()
        .map(|f| read_mask_with_threshold(f, threshold))
        .collect::<Result<Vec<_>>>()?;
    SampleSet::new(masks).map_err(|e| Error::Layout(format!("{}: {e}", dir.display())))
}

impl DatasetLayout {
    /// A layout rooted at `root`; the directory does not need to exist yet.
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DatasetLayout { root: root.into() }
    }

    /// A layout over an existing directory.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        if !root.is_dir() {
            return Err(Error::Layout(format!(
                "dataset root {} is not a directory",
                root.display()
            )));
        }
        Ok(DatasetLayout { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn image_dir(&self, image_id: &str) -> PathBuf {
        self.root.join(image_id)
    }

    pub fn annotations_dir(&self, image_id: &str) -> PathBuf {
        self.image_dir(image_id).join(ANNOTATIONS_DIR)
    }

    pub fn predictions_dir(&self, image_id: &str, model: &str) -> PathBuf {
        self.image_dir(image_id).join(PREDICTIONS_DIR).join(model)
    }

    pub fn probmaps_dir(&self, image_id: &str, model: &str) -> PathBuf {
        self.image_dir(image_id).join(PROBMAPS_DIR).join(model)
    }

    pub fn truth_path(&self, image_id: &str) -> PathBuf {
        self.image_dir(image_id).join(TRUTH_DIR).join("truth.pgm")
    }

    /// Sorted image ids. Every subdirectory of the root is an image and must
    /// hold an `annotations/` directory.
    pub fn image_ids(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for (name, path, is_dir) in read_dir_sorted(&self.root)? {
            if !is_dir {
                continue;
            }
            if !path.join(ANNOTATIONS_DIR).is_dir() {
                return Err(Error::Layout(format!(
                    "image `{name}` has no {ANNOTATIONS_DIR}/ directory"
                )));
            }
            ids.push(name);
        }
        Ok(ids)
    }

    fn models_under(&self, sub: &str) -> Result<Vec<String>> {
        let mut models = BTreeSet::new();
        for id in self.image_ids()? {
            let dir = self.image_dir(&id).join(sub);
            if dir.is_dir() {
                for (name, _, is_dir) in read_dir_sorted(&dir)? {
                    if is_dir {
                        models.insert(name);
                    }
                }
            }
        }
        Ok(models.into_iter().collect())
    }

    /// Every model with predictions for at least one image.
    pub fn model_names(&self) -> Result<Vec<String>> {
        self.models_under(PREDICTIONS_DIR)
    }

    /// Every model with probability maps for at least one image.
    pub fn probmap_model_names(&self) -> Result<Vec<String>> {
        self.models_under(PROBMAPS_DIR)
    }

    pub fn load_annotations(&self, image_id: &str, threshold: u8) -> Result<SampleSet> {
        load_sample_set(&self.annotations_dir(image_id), threshold)
            .map_err(|e| with_image(image_id, e))
    }

    pub fn load_predictions(
        &self,
        image_id: &str,
        model: &str,
        threshold: u8,
    ) -> Result<SampleSet> {
        load_sample_set(&self.predictions_dir(image_id, model), threshold)
            .map_err(|e| with_image(image_id, e))
    }

    /// All probability maps of `model` for an image, in file name order.
    pub fn load_probmaps(&self, image_id: &str, model: &str) -> Result<Vec<ProbMap>> {
        let dir = self.probmaps_dir(image_id, model);
        if !dir.is_dir() {
            return Err(with_image(
                image_id,
                Error::Layout(format!("missing directory {}", dir.display())),
            ));
        }
        let files = pgm_files(&dir)?;
        if files.is_empty() {
            return Err(with_image(
                image_id,
                Error::Layout(format!("no .pgm maps in {}", dir.display())),
            ));
        }
        files.iter().map(read_probmap).collect()
    }
}

fn with_image(image_id: &str, e: Error) -> Error {
    match e {
        Error::Layout(msg) => Error::Layout(format!("image `{image_id}`: {msg}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_mask;
    use crate::mask::{BinaryMask, GridShape};

    fn mask(k: usize) -> BinaryMask {
        let s = GridShape::new(2, 2).unwrap();
        BinaryMask::from_fn(s, |r, c| r * 2 + c < k)
    }

    #[test]
    fn lexicographic_order_and_discovery() {
        let dir = tempfile::tempdir().unwrap();
        let layout = DatasetLayout::new(dir.path());
        // Written out of order on purpose.
        write_mask(&mask(3), layout.annotations_dir("b").join("z.pgm")).unwrap();
        write_mask(&mask(1), layout.annotations_dir("b").join("a10.pgm")).unwrap();
        write_mask(&mask(2), layout.annotations_dir("b").join("a2.pgm")).unwrap();
        write_mask(&mask(0), layout.annotations_dir("a").join("x.pgm")).unwrap();
        write_mask(&mask(4), layout.predictions_dir("a", "unet").join("s.pgm")).unwrap();
        std::fs::write(dir.path().join("manifest.json"), "{}").unwrap();
        std::fs::write(layout.annotations_dir("b").join("notes.txt"), "x").unwrap();

        assert_eq!(layout.image_ids().unwrap(), vec!["a", "b"]);
        assert_eq!(layout.model_names().unwrap(), vec!["unet"]);
        let set = layout.load_annotations("b", 128).unwrap();
        let counts: Vec<usize> = set.iter().map(|m| m.foreground_count()).collect();
        assert_eq!(counts, vec![1, 2, 3]);
    }

    #[test]
    fn missing_pieces_name_the_image() {
        let dir = tempfile::tempdir().unwrap();
        let layout = DatasetLayout::new(dir.path());
        write_mask(&mask(1), layout.annotations_dir("img7").join("a.pgm")).unwrap();
        let err = layout
            .load_predictions("img7", "unet", 128)
            .unwrap_err()
            .to_string();
        assert!(err.contains("img7"), "{err}");

        std::fs::create_dir_all(dir.path().join("stray")).unwrap();
        let err = layout.image_ids().unwrap_err().to_string();
        assert!(err.contains("stray"), "{err}");
    }

    #[test]
    fn open_requires_directory() {
        assert!(DatasetLayout::open("/definitely/not/here").is_err());
    }
}
