//! Label masks for wood-log defect segmentation: annotation import,
//! rasterization and cleanup, evaluation metrics and annotator agreement.

pub mod agreement;
pub mod class;
pub mod components;
pub mod error;
pub mod labelstudio;
pub mod manifest;
pub mod mask;
pub mod metrics;
pub mod morphology;
pub mod ops;
pub mod overlay;
pub mod pipeline;
pub mod png_io;
pub mod raster;
pub mod region;
pub mod rle;
pub mod split;
pub mod stats;

pub use class::{ClassHierarchy, ClassId, NUM_CLASSES};
pub use components::{connected_components, Components, Connectivity};
pub use error::{Error, Result};
pub use manifest::{DatasetManifest, SampleRecord, Subset};
pub use mask::{BinaryMask, LabelMask};
pub use morphology::{remove_small_artifacts, MorphologyParams};
pub use ops::{cast_rot_maybe, clip_to_crosscut, crosscut_support, diff_overlay, flatten};
pub use pipeline::{build_label_mask, BuiltMask};
pub use raster::rasterize_region;
pub use region::{Geometry, RegionAnnotation, RegionSource};
pub use rle::Rle;
