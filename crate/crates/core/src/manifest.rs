//! Dataset manifest: one JSON file listing every sample, its annotations and
//! the mask files derived from them.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "classes": [{"id": 0, "name": "Background"}, ...],
//!   "hierarchy": ["Rot", "Discoloration", "RotMaybe", "IngrowthCrack", "PressureWood", "Crosscut"],
//!   "split_seed": 42,
//!   "samples": [{
//!     "sample_id": "log-0001",
//!     "image": "images/log-0001.png",
//!     "width": 640, "height": 480,
//!     "subset": "data",
//!     "annotations": {"C": [...regions...], "B": [...regions...]},
//!     "masks": {"original": "masks/original/log-0001.png"},
//!     "predictions": {"uper": "pred/uper/log-0001.png"}
//!   }]
//! }
//! ```
//!
//! Mask and prediction paths are relative to the manifest's directory; image
//! paths are relative to an image root chosen by the caller. Annotators are
//! kept in revision order, the last one being the most recent revision.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Component, Path, PathBuf};
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::class::{ClassHierarchy, ClassId};
use crate::error::{Error, Result};
use crate::mask::LabelMask;
use crate::png_io::{png_dimensions, read_mask_png};
use crate::region::RegionAnnotation;

pub const FORMAT_VERSION: u32 = 1;

pub const VARIANT_ORIGINAL: &str = "original";
pub const VARIANT_NO_RM: &str = "no_rm";
pub const VARIANT_AUGMENTED: &str = "augmented";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    Examples,
    Warmup,
    Data,
}

impl Subset {
    pub const ALL: [Subset; 3] = [Subset::Examples, Subset::Warmup, Subset::Data];

    pub fn name(self) -> &'static str {
        match self {
            Subset::Examples => "examples",
            Subset::Warmup => "warmup",
            Subset::Data => "data",
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subset::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown subset {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDef {
    pub id: u8,
    pub name: String,
}

pub fn canonical_class_table() -> Vec<ClassDef> {
    ClassId::ALL
        .iter()
        .map(|c| ClassDef {
            id: *c as u8,
            name: c.name().to_string(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: String,
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub subset: Subset,
    #[serde(default)]
    pub annotations: IndexMap<String, Vec<RegionAnnotation>>,
    #[serde(default)]
    pub masks: BTreeMap<String, String>,
    #[serde(default)]
    pub predictions: BTreeMap<String, String>,
}

impl SampleRecord {
    pub fn new(sample_id: impl Into<String>, image: impl Into<String>, width: u32, height: u32, subset: Subset) -> Self {
        Self {
            sample_id: sample_id.into(),
            image: image.into(),
            width,
            height,
            subset,
            annotations: IndexMap::new(),
            masks: BTreeMap::new(),
            predictions: BTreeMap::new(),
        }
    }

    /// Annotator whose regions define the ground truth: the latest revision.
    pub fn latest_annotator(&self) -> Option<&str> {
        self.annotations.keys().last().map(String::as_str)
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidSample {
            sample: self.sample_id.clone(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub classes: Vec<ClassDef>,
    pub hierarchy: ClassHierarchy,
    pub split_seed: u64,
    pub samples: Vec<SampleRecord>,
    /// Directory mask paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for DatasetManifest {
    fn default() -> Self {
        Self {
            format_version: FORMAT_VERSION,
            classes: canonical_class_table(),
            hierarchy: ClassHierarchy::default(),
            split_seed: 0,
            samples: Vec::new(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl DatasetManifest {
    pub fn new(samples: Vec<SampleRecord>) -> Self {
        Self {
            samples,
            ..Default::default()
        }
    }

    pub fn sample(&self, sample_id: &str) -> Option<&SampleRecord> {
        self.samples.iter().find(|s| s.sample_id == sample_id)
    }

    pub fn subset(&self, subset: Subset) -> impl Iterator<Item = &SampleRecord> {
        self.samples.iter().filter(move |s| s.subset == subset)
    }

    pub fn resolve(&self, relative: &str) -> PathBuf {
        self.base_dir.join(relative)
    }

    pub fn mask_path(&self, sample: &SampleRecord, variant: &str) -> Option<PathBuf> {
        sample.masks.get(variant).map(|p| self.resolve(p))
    }

    pub fn load_mask(&self, sample: &SampleRecord, variant: &str) -> Result<LabelMask> {
        let path = self
            .mask_path(sample, variant)
            .ok_or_else(|| sample.invalid(format!("no mask for variant {variant:?}")))?;
        let mask = read_mask_png(&path)?;
        check_dims(sample, &mask, &path)?;
        Ok(mask)
    }

    pub fn load_prediction(&self, sample: &SampleRecord, model: &str) -> Result<LabelMask> {
        let path = sample
            .predictions
            .get(model)
            .map(|p| self.resolve(p))
            .ok_or_else(|| sample.invalid(format!("no prediction from {model:?}")))?;
        let mask = read_mask_png(&path)?;
        check_dims(sample, &mask, &path)?;
        Ok(mask)
    }

    /// True if any sample already references `variant`.
    pub fn has_variant(&self, variant: &str) -> bool {
        self.samples.iter().any(|s| s.masks.contains_key(variant))
    }

    /// Canonical serialization: pretty JSON with a trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Checks every invariant that does not need the file system.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::UnsupportedFormat(self.format_version));
        }
        let canonical = canonical_class_table();
        for def in &self.classes {
            if !canonical.contains(def) {
                return Err(Error::UnknownClass(format!("{} (id {})", def.name, def.id)));
            }
        }
        if self.classes.len() != canonical.len() {
            return Err(Error::Invalid(format!(
                "class table lists {} classes, expected {}",
                self.classes.len(),
                canonical.len()
            )));
        }
        let mut seen = HashSet::new();
        for sample in &self.samples {
            if sample.sample_id.is_empty() {
                return Err(Error::Invalid("sample with empty sample_id".into()));
            }
            if !seen.insert(sample.sample_id.as_str()) {
                return Err(Error::DuplicateSample(sample.sample_id.clone()));
            }
            if sample.image.is_empty() {
                return Err(sample.invalid("missing image reference"));
            }
            let has_regions = sample.annotations.values().any(|r| !r.is_empty());
            let has_masks = !sample.masks.is_empty() || !sample.predictions.is_empty();
            if (has_regions || has_masks) && (sample.width == 0 || sample.height == 0) {
                return Err(sample.invalid("image dimensions unknown"));
            }
            for region in sample.annotations.values().flatten() {
                region
                    .validate(sample.width, sample.height)
                    .map_err(|e| sample.invalid(e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Checks that every referenced mask exists and matches its sample's size.
    pub fn verify_files(&self) -> Result<()> {
        for sample in &self.samples {
            for rel in sample.masks.values().chain(sample.predictions.values()) {
                let path = self.resolve(rel);
                if !path.is_file() {
                    return Err(sample.invalid(format!("mask file {} not found", path.display())));
                }
                let (w, h) = png_dimensions(&path)?;
                if (w, h) != (sample.width, sample.height) {
                    return Err(sample.invalid(format!(
                        "mask {} is {w}x{h}, image is {}x{}",
                        path.display(),
                        sample.width,
                        sample.height
                    )));
                }
            }
        }
        Ok(())
    }
}

impl DatasetManifest {
    /// Moves the manifest to `new_base`, rewriting mask and prediction paths
    /// so they still point at the same files.
    pub fn rebase(&mut self, new_base: &Path) -> Result<()> {
        let old = absolute(&self.base_dir)?;
        let new = absolute(new_base)?;
        if old != new {
            for sample in &mut self.samples {
                for rel in sample.masks.values_mut().chain(sample.predictions.values_mut()) {
                    let target = normalize(&old.join(&*rel));
                    *rel = slash_path(&relative_path(&target, &new));
                }
            }
        }
        self.base_dir = new_base.to_path_buf();
        Ok(())
    }

    /// Location of a sample's photograph. Relative image references resolve
    /// against `image_root`; absolute ones are used as is when they exist,
    /// otherwise their file name is looked up in `image_root`.
    pub fn image_path(&self, sample: &SampleRecord, image_root: &Path) -> PathBuf {
        let image = Path::new(&sample.image);
        if image.is_relative() {
            return image_root.join(image);
        }
        if image.exists() {
            return image.to_path_buf();
        }
        image
            .file_name()
            .map(|f| image_root.join(f))
            .unwrap_or_else(|| image.to_path_buf())
    }
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::path::absolute(path)
        .map(|p| normalize(&p))
        .map_err(|e| Error::io(path, e))
}

/// Lexically resolves `.` and `..` components.
fn normalize(path: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for c in path.components() {
        match c {
            Component::CurDir => {}
            Component::ParentDir => {
                if !out.pop() {
                    out.push("..");
                }
            }
            other => out.push(other.as_os_str()),
        }
    }
    out
}

/// `target` relative to `base`, both absolute and normalized.
fn relative_path(target: &Path, base: &Path) -> PathBuf {
    let t: Vec<Component> = target.components().collect();
    let b: Vec<Component> = base.components().collect();
    let common = t.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let mut out = PathBuf::new();
    for _ in common..b.len() {
        out.push("..");
    }
    for c in &t[common..] {
        out.push(c.as_os_str());
    }
    out
}

fn slash_path(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn check_dims(sample: &SampleRecord, mask: &LabelMask, path: &Path) -> Result<()> {
    if (mask.width(), mask.height()) != (sample.width, sample.height) {
        return Err(sample.invalid(format!(
            "mask {} is {}x{}, image is {}x{}",
            path.display(),
            mask.width(),
            mask.height(),
            sample.width,
            sample.height
        )));
    }
    Ok(())
}

/// Parses manifest text. Samples are decoded one at a time so that errors
/// (for example an unknown class name) carry the offending sample id.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<DatasetManifest> {
    let malformed = |reason: String| Error::Malformed {
        path: base_dir.to_path_buf(),
        reason,
    };
    let mut root: serde_json::Value =
        serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let samples = match root.get_mut("samples") {
        Some(serde_json::Value::Array(items)) => std::mem::take(items),
        Some(_) => return Err(malformed("\"samples\" must be an array".into())),
        None => Vec::new(),
    };
    let mut records = Vec::with_capacity(samples.len());
    for (index, value) in samples.into_iter().enumerate() {
        let name = value
            .get("sample_id")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .unwrap_or_else(|| format!("#{index}"));
        let record: SampleRecord =
            serde_json::from_value(value).map_err(|e| Error::InvalidSample {
                sample: name,
                reason: e.to_string(),
            })?;
        records.push(record);
    }
    root["samples"] = serde_json::Value::Array(Vec::new());
    let mut manifest: DatasetManifest = serde_json::from_value(root).map_err(|e| {
        if e.to_string().contains("unknown class") {
            Error::UnknownClass(e.to_string())
        } else {
            malformed(e.to_string())
        }
    })?;
    manifest.samples = records;
    manifest.base_dir = base_dir.to_path_buf();
    manifest.validate()?;
    Ok(manifest)
}

/// Loads and fully validates a manifest, including referenced mask files.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base_dir = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let manifest = parse_manifest(&text, &base_dir).map_err(|e| match e {
        Error::Malformed { reason, .. } => Error::Malformed {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    })?;
    manifest.verify_files()?;
    Ok(manifest)
}

pub fn save_manifest(path: &Path, manifest: &DatasetManifest) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, manifest.to_canonical_string()).map_err(|e| Error::io(path, e))
}
