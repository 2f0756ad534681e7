//! Whole-mask operations: hierarchical flattening, crosscut clipping,
//! Rot(maybe) casting and disagreement maps.

use crate::class::{ClassHierarchy, ClassId};
use crate::error::{Error, Result};
use crate::mask::{check_shape, BinaryMask, LabelMask};
use crate::raster::rasterize_region;
use crate::region::RegionAnnotation;

/// Resolves overlapping regions to one class per pixel: each pixel takes the
/// highest-precedence class among the regions covering it, Background where
/// nothing does.
pub fn flatten(
    regions: &[RegionAnnotation],
    hierarchy: &ClassHierarchy,
    width: u32,
    height: u32,
) -> Result<LabelMask> {
    let mut mask = LabelMask::new(width, height);
    for region in regions {
        let coverage = rasterize_region(region, width, height)?;
        paint(&mut mask, &coverage, region.class, hierarchy);
    }
    Ok(mask)
}

fn paint(mask: &mut LabelMask, coverage: &BinaryMask, class: ClassId, hierarchy: &ClassHierarchy) {
    for (label, &covered) in mask.labels_mut().iter_mut().zip(coverage.bits()) {
        if covered && hierarchy.outranks(class, *label) {
            *label = class;
        }
    }
}

/// Union of all rasterized Crosscut regions, or `None` when the sample has no
/// Crosscut region covering any pixel.
pub fn crosscut_support(
    regions: &[RegionAnnotation],
    width: u32,
    height: u32,
) -> Result<Option<BinaryMask>> {
    let mut support = BinaryMask::new(width, height);
    for region in regions.iter().filter(|r| r.class == ClassId::Crosscut) {
        support.union_with(&rasterize_region(region, width, height)?)?;
    }
    Ok(support.any().then_some(support))
}

/// Sets every defect pixel outside the crosscut to Background. The crosscut
/// is `support` together with any pixel already labeled Crosscut.
pub fn clip_to_crosscut(mask: &LabelMask, support: &BinaryMask) -> Result<LabelMask> {
    check_shape(mask.width(), mask.height(), support.width(), support.height())?;
    let mut out = mask.clone();
    for (label, &inside) in out.labels_mut().iter_mut().zip(support.bits()) {
        if !inside && label.is_defect() {
            *label = ClassId::Background;
        }
    }
    Ok(out)
}

/// Replaces every RotMaybe pixel with `target`, which must be Rot or Crosscut.
pub fn cast_rot_maybe(mask: &LabelMask, target: ClassId) -> Result<LabelMask> {
    if !matches!(target, ClassId::Rot | ClassId::Crosscut) {
        return Err(Error::InvalidCastTarget(target));
    }
    let mut out = mask.clone();
    for label in out.labels_mut() {
        if *label == ClassId::RotMaybe {
            *label = target;
        }
    }
    Ok(out)
}

/// Pixels where the two masks disagree.
pub fn diff_overlay(gt: &LabelMask, pred: &LabelMask) -> Result<BinaryMask> {
    gt.same_shape(pred)?;
    let bits = gt
        .labels()
        .iter()
        .zip(pred.labels())
        .map(|(a, b)| a != b)
        .collect();
    BinaryMask::from_bits(gt.width(), gt.height(), bits)
}
