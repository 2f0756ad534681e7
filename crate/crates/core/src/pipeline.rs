//! Regions to clean label mask: rasterize, flatten by precedence, clip to the
//! crosscut, remove small artifacts.

use crate::class::ClassHierarchy;
use crate::error::Result;
use crate::mask::LabelMask;
use crate::morphology::{remove_small_artifacts, MorphologyParams};
use crate::ops::{clip_to_crosscut, crosscut_support, flatten};
use crate::region::RegionAnnotation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuiltMask {
    pub mask: LabelMask,
    /// False when the sample had no Crosscut region and clipping was skipped.
    pub clipped: bool,
}

pub fn build_label_mask(
    regions: &[RegionAnnotation],
    hierarchy: &ClassHierarchy,
    params: &MorphologyParams,
    width: u32,
    height: u32,
) -> Result<BuiltMask> {
    // Support has to come from the regions: flattening overwrites crosscut
    // pixels with defect labels.
    let support = crosscut_support(regions, width, height)?;
    let flat = flatten(regions, hierarchy, width, height)?;
    let (mask, clipped) = match support {
        Some(support) => (clip_to_crosscut(&flat, &support)?, true),
        None => (flat, false),
    };
    Ok(BuiltMask {
        mask: remove_small_artifacts(&mask, params, hierarchy),
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ClassId;

    fn rect(class: ClassId, x0: f64, y0: f64, x1: f64, y1: f64) -> RegionAnnotation {
        RegionAnnotation::polygon(class, vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]], "t")
    }

    #[test]
    fn full_pipeline() {
        let regions = vec![
            rect(ClassId::Crosscut, 2.0, 2.0, 30.0, 30.0),
            rect(ClassId::Rot, 10.0, 10.0, 20.0, 20.0),
            // speck inside the crosscut
            rect(ClassId::Discoloration, 5.0, 5.0, 6.0, 6.0),
            // defect outside the crosscut
            rect(ClassId::PressureWood, 0.0, 0.0, 2.0, 32.0),
        ];
        let built = build_label_mask(
            &regions,
            &ClassHierarchy::default(),
            &MorphologyParams {
                min_hole_area: 4,
                min_object_area: 4,
                ..Default::default()
            },
            32,
            32,
        )
        .unwrap();
        assert!(built.clipped);
        let counts = built.mask.class_counts();
        assert_eq!(counts[ClassId::Rot.index()], 100);
        assert_eq!(counts[ClassId::Discoloration.index()], 0);
        assert_eq!(counts[ClassId::PressureWood.index()], 0);
        assert_eq!(counts[ClassId::Crosscut.index()], 28 * 28 - 100);
    }

    #[test]
    fn no_crosscut_skips_clipping() {
        let built = build_label_mask(
            &[rect(ClassId::Rot, 0.0, 0.0, 2.0, 2.0)],
            &ClassHierarchy::default(),
            &MorphologyParams::disabled(),
            4,
            4,
        )
        .unwrap();
        assert!(!built.clipped);
        assert_eq!(built.mask.class_counts()[ClassId::Rot.index()], 4);
    }
}
