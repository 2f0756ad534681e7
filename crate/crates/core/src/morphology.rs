//! Removal of small objects and small holes from label masks.

use serde::{Deserialize, Serialize};

use crate::class::{ClassHierarchy, ClassId, NUM_CLASSES};
use crate::components::{connected_components, Components, Connectivity};
use crate::mask::{BinaryMask, LabelMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphologyParams {
    pub min_hole_area: u64,
    pub min_object_area: u64,
    pub connectivity: Connectivity,
}

impl Default for MorphologyParams {
    fn default() -> Self {
        Self {
            min_hole_area: 64,
            min_object_area: 64,
            connectivity: Connectivity::Eight,
        }
    }
}

impl MorphologyParams {
    /// Parameters that leave every mask unchanged.
    pub fn disabled() -> Self {
        Self {
            min_hole_area: 0,
            min_object_area: 0,
            connectivity: Connectivity::Eight,
        }
    }
}

/// Cleans small artifacts from `mask`.
///
/// Classes are visited from lowest to highest precedence. For each class,
/// components smaller than `min_object_area` take the most frequent label
/// among the pixels bordering them (ties go to the higher-precedence label,
/// Background ranking last), then regions enclosed by the class that are
/// smaller than `min_hole_area` are filled with it. Sweeps repeat until one
/// leaves the mask unchanged, so the result is a fixed point: every change
/// merges at least one labeled region into a neighbor, so the sweeps
/// terminate.
pub fn remove_small_artifacts(
    mask: &LabelMask,
    params: &MorphologyParams,
    hierarchy: &ClassHierarchy,
) -> LabelMask {
    let mut out = mask.clone();
    if params.min_object_area == 0 && params.min_hole_area == 0 {
        return out;
    }
    loop {
        let mut changed = false;
        for class in hierarchy.ascending() {
            changed |= remove_small_objects(&mut out, class, params, hierarchy);
            changed |= fill_small_holes(&mut out, class, params);
        }
        if !changed {
            return out;
        }
    }
}

fn pixels_by_component(components: &Components) -> Vec<Vec<usize>> {
    let mut pixels = vec![Vec::new(); components.count()];
    for (i, &l) in components.labels.iter().enumerate() {
        if l != 0 {
            pixels[l as usize - 1].push(i);
        }
    }
    pixels
}

fn remove_small_objects(
    mask: &mut LabelMask,
    class: ClassId,
    params: &MorphologyParams,
    hierarchy: &ClassHierarchy,
) -> bool {
    if params.min_object_area == 0 {
        return false;
    }
    let components = connected_components(&mask.class_mask(class), params.connectivity);
    if components.areas.iter().all(|&a| a >= params.min_object_area) {
        return false;
    }
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let offsets = params.connectivity.offsets();
    let mut seen_by = vec![0u32; mask.len()];
    let mut changed = false;

    // Components of one class never touch each other, so relabeling one
    // cannot alter the surroundings of another.
    for (k, pixels) in pixels_by_component(&components).into_iter().enumerate() {
        let label = k as u32 + 1;
        if components.area(label) >= params.min_object_area {
            continue;
        }
        let mut votes = [0u64; NUM_CLASSES];
        for &i in &pixels {
            let (x, y) = (i as i64 % w, i as i64 / w);
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx as i64, y + dy as i64);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let j = (ny * w + nx) as usize;
                if components.labels[j] == label || seen_by[j] == label {
                    continue;
                }
                seen_by[j] = label;
                votes[mask.labels()[j].index()] += 1;
            }
        }
        let Some(target) = dominant(&votes, hierarchy) else {
            continue;
        };
        let labels = mask.labels_mut();
        for &i in &pixels {
            labels[i] = target;
        }
        changed = true;
    }
    changed
}

fn dominant(votes: &[u64; NUM_CLASSES], hierarchy: &ClassHierarchy) -> Option<ClassId> {
    ClassId::ALL
        .into_iter()
        .filter(|c| votes[c.index()] > 0)
        .max_by(|&a, &b| {
            votes[a.index()]
                .cmp(&votes[b.index()])
                .then_with(|| hierarchy.rank(b).cmp(&hierarchy.rank(a)))
        })
}

fn fill_small_holes(mask: &mut LabelMask, class: ClassId, params: &MorphologyParams) -> bool {
    if params.min_hole_area == 0 {
        return false;
    }
    let complement = BinaryMask::from_bits(
        mask.width(),
        mask.height(),
        mask.labels().iter().map(|&c| c != class).collect(),
    )
    .expect("same dimensions");
    let components = connected_components(&complement, params.connectivity);
    if components.count() == 0 {
        return false;
    }
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let mut touches_border = vec![false; components.count() + 1];
    for (i, &l) in components.labels.iter().enumerate() {
        let (x, y) = (i % w, i / w);
        if l != 0 && (x == 0 || y == 0 || x + 1 == w || y + 1 == h) {
            touches_border[l as usize] = true;
        }
    }
    let fill: Vec<bool> = (1..=components.count())
        .map(|l| !touches_border[l] && components.areas[l - 1] < params.min_hole_area)
        .collect();
    if !fill.iter().any(|&f| f) {
        return false;
    }
    let labels = mask.labels_mut();
    for (i, &l) in components.labels.iter().enumerate() {
        if l != 0 && fill[l as usize - 1] {
            labels[i] = class;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(obj: u64, hole: u64) -> MorphologyParams {
        MorphologyParams {
            min_hole_area: hole,
            min_object_area: obj,
            connectivity: Connectivity::Eight,
        }
    }

    #[test]
    fn isolated_rot_pixel_becomes_crosscut() {
        let mut m = LabelMask::filled(5, 5, ClassId::Crosscut);
        m.set(2, 2, ClassId::Rot);
        let out = remove_small_artifacts(&m, &params(8, 0), &ClassHierarchy::default());
        assert_eq!(out, LabelMask::filled(5, 5, ClassId::Crosscut));
    }

    #[test]
    fn large_component_survives() {
        let mut m = LabelMask::filled(20, 20, ClassId::Crosscut);
        for y in 5..15 {
            for x in 5..15 {
                m.set(x, y, ClassId::Rot);
            }
        }
        let out = remove_small_artifacts(&m, &params(8, 8), &ClassHierarchy::default());
        assert_eq!(out, m);
    }

    #[test]
    fn hole_is_filled_with_enclosing_class() {
        // 2x2 background hole in a crosscut disc; the outer background touches
        // the border and stays.
        let mut m = LabelMask::new(8, 8);
        for y in 1..7 {
            for x in 1..7 {
                m.set(x, y, ClassId::Crosscut);
            }
        }
        for (x, y) in [(3, 3), (4, 3), (3, 4), (4, 4)] {
            m.set(x, y, ClassId::Background);
        }
        let out = remove_small_artifacts(&m, &params(0, 5), &ClassHierarchy::default());
        assert_eq!(out.class_counts()[ClassId::Crosscut.index()], 36);
        assert_eq!(out.get(0, 0), ClassId::Background);
    }

    #[test]
    fn tie_goes_to_higher_precedence() {
        // single PressureWood pixel between two Rot and two Discoloration pixels
        let raw = [
            0, 2, 0, //
            5, 4, 5, //
            0, 2, 0,
        ];
        let m = LabelMask::from_raw(3, 3, &raw).unwrap();
        let p = MorphologyParams {
            min_hole_area: 0,
            min_object_area: 2,
            connectivity: Connectivity::Four,
        };
        let out = remove_small_objects_only(&m, ClassId::PressureWood, &p);
        assert_eq!(out.get(1, 1), ClassId::Rot);
    }

    fn remove_small_objects_only(m: &LabelMask, class: ClassId, p: &MorphologyParams) -> LabelMask {
        let mut m = m.clone();
        remove_small_objects(&mut m, class, p, &ClassHierarchy::default());
        m
    }

    #[test]
    fn whole_image_component_is_kept() {
        let m = LabelMask::filled(2, 2, ClassId::Rot);
        let out = remove_small_artifacts(&m, &params(64, 64), &ClassHierarchy::default());
        assert_eq!(out, m);
    }

    #[test]
    fn disabled_params_are_identity() {
        let m = LabelMask::from_raw(3, 1, &[2, 0, 6]).unwrap();
        let out = remove_small_artifacts(&m, &MorphologyParams::disabled(), &ClassHierarchy::default());
        assert_eq!(out, m);
    }
}
